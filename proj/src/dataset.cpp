// SPDX-License-Identifier: Apache-2.0
#include "seqx/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "seqx/rng.hpp"

namespace seqx {

using nlohmann::json;

const std::vector<std::string>& scene_colors() {
  static const std::vector<std::string> v{"red", "blue", "green", "yellow", "purple"};
  return v;
}

const std::vector<std::string>& scene_objects() {
  static const std::vector<std::string> v{"circle", "square", "triangle",
                                          "star",   "ball",   "box"};
  return v;
}

const std::vector<std::string>& scene_actions() {
  static const std::vector<std::string> v{"left", "right", "up", "down"};
  return v;
}

const std::vector<std::string>& caption_templates() {
  static const std::vector<std::string> v{
      "a {c} {o} moves {a}",
      "the {c} {o} is moving {a}",
      "a {c} {o} is moving {a}",
      "the {c} {o} moves {a}",
      "a {o} that is {c} moves {a}",
      "there is a {c} {o} moving {a}",
  };
  return v;
}

int scene_feature_dim() {
  return static_cast<int>(scene_colors().size() + scene_objects().size() +
                          scene_actions().size());
}

std::string fill_template(const std::string& tmpl, const Attributes& attrs) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 'c': out += attrs.color; break;
        case 'o': out += attrs.object; break;
        case 'a': out += attrs.action; break;
        default: throw ValidationError("bad template placeholder in: " + tmpl);
      }
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

std::vector<Scene> generate_dataset(int num_scenes, int refs_per_scene, double noise,
                                    std::uint64_t seed) {
  const auto& templates = caption_templates();
  if (refs_per_scene < 2 || refs_per_scene > static_cast<int>(templates.size())) {
    throw ValidationError("refs_per_scene must be in [2, " +
                          std::to_string(templates.size()) + "], got " +
                          std::to_string(refs_per_scene));
  }
  if (num_scenes < 0) throw ValidationError("num_scenes must be >= 0");
  if (!(noise >= 0.0)) throw ValidationError("noise must be >= 0");

  const auto& colors = scene_colors();
  const auto& objects = scene_objects();
  const auto& actions = scene_actions();
  Rng rng(seed);
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(num_scenes));
  for (int n = 0; n < num_scenes; ++n) {
    const std::size_t c = rng.below(colors.size());
    const std::size_t o = rng.below(objects.size());
    const std::size_t a = rng.below(actions.size());
    Scene s;
    char id[32];
    std::snprintf(id, sizeof id, "scene-%05d", n);
    s.id = id;
    s.attributes = Attributes{colors[c], objects[o], actions[a]};
    s.features.assign(static_cast<std::size_t>(scene_feature_dim()), 0.0);
    s.features[c] = 1.0;
    s.features[colors.size() + o] = 1.0;
    s.features[colors.size() + objects.size() + a] = 1.0;
    if (noise > 0.0) {
      for (double& f : s.features) f += noise * rng.normal();
    }
    std::vector<std::size_t> pick(templates.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    rng.shuffle(pick);
    for (int r = 0; r < refs_per_scene; ++r) {
      s.refs.push_back(fill_template(templates[pick[static_cast<std::size_t>(r)]], *s.attributes));
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

void save_dataset(const std::filesystem::path& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const Scene& s : scenes) {
    json line{{"id", s.id}, {"features", s.features}, {"refs", s.refs}};
    if (s.attributes) {
      line["attributes"] = {{"color", s.attributes->color},
                            {"object", s.attributes->object},
                            {"action", s.attributes->action}};
    }
    out << line.dump() << '\n';
  }
}

std::vector<Scene> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::vector<Scene> scenes;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      Scene s;
      s.id = j.at("id").get<std::string>();
      s.features = j.at("features").get<std::vector<double>>();
      s.refs = j.at("refs").get<std::vector<std::string>>();
      if (j.contains("attributes")) {
        const json& a = j["attributes"];
        s.attributes = Attributes{a.at("color").get<std::string>(),
                                  a.at("object").get<std::string>(),
                                  a.at("action").get<std::string>()};
      }
      scenes.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed scene: " + e.what());
    }
  }
  return scenes;
}

Vocab vocab_from_scenes(const std::vector<Scene>& scenes) {
  std::vector<std::string> sentences;
  for (const Scene& s : scenes) sentences.insert(sentences.end(), s.refs.begin(), s.refs.end());
  return Vocab::from_sentences(sentences);
}

Corpus encode_scenes(const std::vector<Scene>& scenes, const Vocab& vocab) {
  Corpus corpus;
  corpus.reserve(scenes.size());
  for (const Scene& s : scenes) {
    Instance inst{s.id, s.features, {}};
    for (const std::string& r : s.refs) inst.refs.push_back(vocab.encode(r));
    corpus.push_back(std::move(inst));
  }
  return corpus;
}

}  // namespace seqx
