// SPDX-License-Identifier: Apache-2.0
/**
 * @file model_io.hpp
 * @brief JSON model documents.
 *
 * Layout:
 *   {"format": "seqx-model", "version": 1,
 *    "dims": {"feature_dim", "emb_dim", "hidden", "vocab"},
 *    "max_len": int, "vocab": [token...],
 *    "params": [{"name", "rows", "cols", "values": [column-major]}...]}
 * Parameter groups appear in ModelParams::groups() order. Doubles are
 * written as shortest round-trip decimals, so save/load is bit-exact.
 */
#ifndef SEQX_MODEL_IO_HPP
#define SEQX_MODEL_IO_HPP

#include <filesystem>
#include "json.hpp"

#include "seqx/seq_model.hpp"
#include "seqx/vocab.hpp"

namespace seqx {

inline constexpr int kModelFormatVersion = 1;

struct Model {
  Vocab vocab;
  ModelParams params;
  int max_len = 16;

  friend bool operator==(const Model&, const Model&) = default;
};

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace seqx

#endif  // SEQX_MODEL_IO_HPP
