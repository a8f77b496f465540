// SPDX-License-Identifier: Apache-2.0
#include "seqx/model_io.hpp"

#include <fstream>

namespace seqx {

using nlohmann::json;

json model_to_json(const Model& model) {
  const ModelDims& d = model.params.dims();
  json params = json::array();
  for (const ParamGroup& g : model.params.groups()) {
    const auto values = model.params.group_values(g);
    params.push_back({{"name", g.name},
                      {"rows", g.rows},
                      {"cols", g.cols},
                      {"values", std::vector<double>(values.begin(), values.end())}});
  }
  return {{"format", "seqx-model"},
          {"version", kModelFormatVersion},
          {"dims",
           {{"feature_dim", d.feature_dim},
            {"emb_dim", d.emb_dim},
            {"hidden", d.hidden},
            {"vocab", d.vocab}}},
          {"max_len", model.max_len},
          {"vocab", model.vocab.tokens()},
          {"params", std::move(params)}};
}

Model model_from_json(const json& doc) {
  try {
    if (doc.at("format") != "seqx-model") throw ValidationError("not a seqx model document");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw ValidationError("unsupported model version " + doc.at("version").dump());
    }
    const json& jd = doc.at("dims");
    ModelDims dims{jd.at("feature_dim").get<int>(), jd.at("emb_dim").get<int>(),
                   jd.at("hidden").get<int>(), jd.at("vocab").get<int>()};
    Model model{Vocab::from_tokens(doc.at("vocab").get<std::vector<std::string>>()),
                ModelParams(dims), doc.at("max_len").get<int>()};
    if (model.vocab.size() != dims.vocab) {
      throw ValidationError("vocab list length does not match dims.vocab");
    }
    const json& jp = doc.at("params");
    const auto& groups = model.params.groups();
    if (jp.size() != groups.size()) throw ValidationError("wrong number of parameter groups");
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const ParamGroup& g = groups[i];
      const json& entry = jp[i];
      if (entry.at("name") != g.name || entry.at("rows").get<int>() != g.rows ||
          entry.at("cols").get<int>() != g.cols) {
        throw ValidationError("parameter group " + std::to_string(i) +
                              " does not match expected " + g.name);
      }
      const auto values = entry.at("values").get<std::vector<double>>();
      if (values.size() != g.size()) throw ValidationError("wrong value count in " + g.name);
      std::copy(values.begin(), values.end(), model.params.group_values(g).begin());
    }
    if (!model.params.all_finite()) throw ValidationError("model contains non-finite values");
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("malformed model file " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace seqx
