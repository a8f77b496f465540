// SPDX-License-Identifier: Apache-2.0
/**
 * @file dataset.hpp
 * @brief Synthetic attribute-grounded captioning benchmark and JSONL I/O.
 *
 * A scene is a (color, object, direction) tuple. Its features are the
 * concatenated one-hot codes of the three attributes plus optional Gaussian
 * noise; its references are distinct paraphrase templates filled with the
 * same attributes, so every input has several correct captions.
 */
#ifndef SEQX_DATASET_HPP
#define SEQX_DATASET_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seqx/corpus.hpp"
#include "seqx/vocab.hpp"

namespace seqx {

struct Attributes {
  std::string color;
  std::string object;
  std::string action;
  friend bool operator==(const Attributes&, const Attributes&) = default;
};

struct Scene {
  std::string id;
  std::optional<Attributes> attributes;
  std::vector<double> features;
  std::vector<std::string> refs;
  friend bool operator==(const Scene&, const Scene&) = default;
};

const std::vector<std::string>& scene_colors();
const std::vector<std::string>& scene_objects();
const std::vector<std::string>& scene_actions();
/// Paraphrase templates with {c}, {o}, {a} placeholders.
const std::vector<std::string>& caption_templates();

int scene_feature_dim();

std::string fill_template(const std::string& tmpl, const Attributes& attrs);

/// Deterministic in seed. Throws when refs_per_scene is outside
/// [2, number of templates].
std::vector<Scene> generate_dataset(int num_scenes, int refs_per_scene, double noise,
                                    std::uint64_t seed);

/// One JSON object per line: {"id", "features", "refs"} plus "attributes"
/// when known. Readers ignore unknown keys.
void save_dataset(const std::filesystem::path& path, const std::vector<Scene>& scenes);
/// Empty file yields an empty dataset; a malformed line throws a
/// ValidationError naming the line number.
std::vector<Scene> load_dataset(const std::filesystem::path& path);

Vocab vocab_from_scenes(const std::vector<Scene>& scenes);
/// Throws on out-of-vocabulary tokens.
Corpus encode_scenes(const std::vector<Scene>& scenes, const Vocab& vocab);

}  // namespace seqx

#endif  // SEQX_DATASET_HPP
