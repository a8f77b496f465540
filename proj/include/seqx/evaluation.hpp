// SPDX-License-Identifier: Apache-2.0
/**
 * @file evaluation.hpp
 * @brief Precision/diversity evaluation with random-sampling (rs) and
 *        beam-search (bs) decoding.
 *
 * For each input a set of k captions is decoded (k samples, or the top k
 * beam hypotheses). Precision is the mean CIDEr-D of the set against the
 * input's references, with document frequencies from the evaluated corpus;
 * diversity is the set's Div-1 / Div-2 / mBleu-4. All figures are averaged
 * over inputs.
 */
#ifndef SEQX_EVALUATION_HPP
#define SEQX_EVALUATION_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seqx/corpus.hpp"
#include "seqx/seq_model.hpp"

namespace seqx {

enum class DecodeStrategy { kRandomSampling, kBeamSearch };

std::string strategy_name(DecodeStrategy s);
DecodeStrategy parse_strategy(std::string_view name);

struct EvalReport {
  DecodeStrategy strategy = DecodeStrategy::kRandomSampling;
  double mean_cider = 0.0;
  double div1 = 0.0;
  double div2 = 0.0;
  double mbleu4 = 0.0;
  int num_inputs = 0;
  int padded_beams = 0;  // inputs whose beam returned fewer than k captions
};

nlohmann::json report_to_json(const EvalReport& r);

struct DecodedSet {
  std::vector<Caption> captions;
  bool padded = false;
};

/// rs streams are derived from (seed, stable hash of the instance id), so a
/// report does not depend on dataset order.
DecodedSet decode_set(const ModelParams& params, const Instance& instance,
                      DecodeStrategy strategy, int k, std::uint64_t seed, int max_len);

/// SEQX_THREADS if set and positive, else hardware concurrency.
int evaluation_threads();

EvalReport evaluate_model(const ModelParams& params, const Corpus& corpus,
                          DecodeStrategy strategy, int k, std::uint64_t seed, int max_len,
                          int threads = evaluation_threads());

}  // namespace seqx

#endif  // SEQX_EVALUATION_HPP
