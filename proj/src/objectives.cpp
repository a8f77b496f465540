// SPDX-License-Identifier: Apache-2.0
#include "seqx/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace seqx {

using nlohmann::json;

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::kXe: return "XE";
    case Objective::kSll: return "SLL";
    case Objective::kSllMe: return "SLL-ME";
    case Objective::kSllSle: return "SLL-SLE";
  }
  return "?";
}

Objective parse_objective(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "XE") return Objective::kXe;
  if (upper == "SLL") return Objective::kSll;
  if (upper == "SLL-ME") return Objective::kSllMe;
  if (upper == "SLL-SLE") return Objective::kSllSle;
  throw ValidationError("unknown objective: " + std::string(name));
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("invalid config: " + msg); };
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must be in [0, 1]");
  if (s < 1) fail("s must be >= 1");
  if (objective == Objective::kSllSle && s < 2) fail("SLL-SLE needs s >= 2");
  if (M < 0 || N < 0 || M > N) fail("need 0 <= M <= N");
  if (!(lr_xe > 0.0) || !(lr_sll > 0.0)) fail("learning rates must be positive");
  if (!(beta_me >= 0.0)) fail("beta_me must be >= 0");
  if (max_len < 1) fail("max_len must be >= 1");
  if (beam_width < 1) fail("beam_width must be >= 1");
  if (hidden < 1 || emb_dim < 1) fail("hidden and emb_dim must be positive");
}

TrainConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> kKeys{"alpha", "s", "M", "N", "lr_xe", "lr_sll",
                                           "beta_me", "max_len", "beam_width", "seed",
                                           "objective", "hidden", "emb_dim"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.contains(key)) throw ValidationError("unknown config key: " + key);
  }
  TrainConfig c;
  try {
    if (doc.contains("alpha")) c.alpha = doc["alpha"].get<double>();
    if (doc.contains("s")) c.s = doc["s"].get<int>();
    if (doc.contains("M")) c.M = doc["M"].get<int>();
    if (doc.contains("N")) c.N = doc["N"].get<int>();
    if (doc.contains("lr_xe")) c.lr_xe = doc["lr_xe"].get<double>();
    if (doc.contains("lr_sll")) c.lr_sll = doc["lr_sll"].get<double>();
    if (doc.contains("beta_me")) c.beta_me = doc["beta_me"].get<double>();
    if (doc.contains("max_len")) c.max_len = doc["max_len"].get<int>();
    if (doc.contains("beam_width")) c.beam_width = doc["beam_width"].get<int>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("objective")) c.objective = parse_objective(doc["objective"].get<std::string>());
    if (doc.contains("hidden")) c.hidden = doc["hidden"].get<int>();
    if (doc.contains("emb_dim")) c.emb_dim = doc["emb_dim"].get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config value has wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const TrainConfig& c) {
  return {{"alpha", c.alpha},       {"s", c.s},
          {"M", c.M},               {"N", c.N},
          {"lr_xe", c.lr_xe},       {"lr_sll", c.lr_sll},
          {"beta_me", c.beta_me},   {"max_len", c.max_len},
          {"beam_width", c.beam_width}, {"seed", c.seed},
          {"objective", objective_name(c.objective)},
          {"hidden", c.hidden},     {"emb_dim", c.emb_dim}};
}

void score_sample_batch(SampleBatch& batch, const CiderReferences& refs,
                        const ModelParams& params, int max_len) {
  const int s = batch.size();
  batch.deltas.resize(static_cast<std::size_t>(s));
  std::vector<NGramTable> tables;
  tables.reserve(static_cast<std::size_t>(s));
  for (int j = 0; j < s; ++j) {
    batch.deltas[j] = refs.score(batch.traces[j].caption);
    tables.push_back(NGramTable::of(batch.traces[j].caption));
  }
  batch.dist = Eigen::MatrixXd::Zero(s, s);
  for (int j = 0; j < s; ++j) {
    for (int k = j + 1; k < s; ++k) {
      const double d = syntactic_distance(tables[j], tables[k]);
      batch.dist(j, k) = d;
      batch.dist(k, j) = d;
    }
  }
  batch.greedy_delta = refs.score(greedy_decode(batch.features, params, max_len));
}

SampleBatch make_sample_batch(int input_id, std::span<const double> features,
                              const CiderReferences& refs, const ModelParams& params,
                              int s, int max_len, Rng& rng) {
  SampleBatch batch;
  batch.input_id = input_id;
  batch.features.assign(features.begin(), features.end());
  for (int j = 0; j < s; ++j) batch.traces.push_back(sample_caption(features, params, max_len, rng));
  score_sample_batch(batch, refs, params, max_len);
  return batch;
}

std::vector<double> precision_advantage(const SampleBatch& batch, bool baseline) {
  std::vector<double> a(batch.deltas);
  if (baseline) {
    for (double& v : a) v -= batch.greedy_delta;
  }
  return a;
}

std::vector<double> diversity_advantage(const SampleBatch& batch, PairwiseScale scale,
                                        bool baseline) {
  const int s = batch.size();
  if (s < 2) throw ValidationError("diversity advantage needs at least 2 samples");
  const double c = scale == PairwiseScale::kUnbiased ? 2.0 / (s - 1) : 2.0 / s;
  std::vector<double> rows(static_cast<std::size_t>(s));
  double mean = 0.0;
  for (int j = 0; j < s; ++j) {
    rows[j] = batch.dist.row(j).sum();
    mean += rows[j];
  }
  mean /= s;
  for (double& r : rows) r = c * (baseline ? r - mean : r);
  return rows;
}

std::vector<double> surrogate_weights(const SampleBatch& batch, const TrainConfig& config,
                                      const EstimatorOptions& options) {
  if (config.objective == Objective::kXe) {
    throw ValidationError("surrogate loss is undefined for the XE objective");
  }
  const int s = batch.size();
  const double alpha = config.objective == Objective::kSllSle ? config.alpha : 1.0;
  const std::vector<double> ap = precision_advantage(batch, options.baselines);
  std::vector<double> w(static_cast<std::size_t>(s));
  if (alpha == 1.0) {
    for (int j = 0; j < s; ++j) w[j] = ap[j] / s;
    return w;
  }
  const std::vector<double> ad = diversity_advantage(batch, options.pairwise, options.baselines);
  for (int j = 0; j < s; ++j) w[j] = (alpha * ap[j] + (1.0 - alpha) * ad[j]) / s;
  return w;
}

LossAndGradient surrogate_loss_grad(const SampleBatch& batch, const ModelParams& params,
                                    const TrainConfig& config,
                                    const EstimatorOptions& options) {
  const std::vector<double> w = surrogate_weights(batch, config, options);
  std::vector<NllItem> items;
  items.reserve(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    items.push_back({batch.features, batch.traces[j].caption, w[j]});
  }
  return weighted_nll_grad(items, params, config.limits());
}

double entropy_reg_grad(const SampleBatch& batch, const ModelParams& params,
                        const TrainConfig& config, Gradient& grad) {
  const int s = batch.size();
  double mean = 0.0;
  const double scale = -config.beta_me / s;
  for (const Trace& t : batch.traces) {
    mean += accumulate_mean_entropy(batch.features, t.caption, params, config.limits(),
                                    scale, grad);
  }
  return mean / s;
}

LossAndGradient xe_loss_grad(std::span<const double> features, CaptionView reference,
                             const ModelParams& params, RolloutLimits limits) {
  const NllItem item{features, reference, 1.0};
  return weighted_nll_grad(std::span<const NllItem>(&item, 1), params, limits);
}

void adam_step(ModelParams& params, const Gradient& gradient, AdamState& state, double lr) {
  if (gradient.size() != params.size() || state.m.size() != params.size()) {
    throw ValidationError("ADAM shape mismatch");
  }
  if (!gradient.all_finite()) {
    throw TrainingDivergence("non-finite gradient at ADAM step " +
                             std::to_string(state.step + 1));
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto p = params.values();
  const auto g = gradient.values();
  auto m = state.m.values();
  auto v = state.v.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
  }
}

double clip_global_norm(Gradient& grad, double max_norm) {
  const double norm = std::sqrt(grad.squared_norm());
  if (norm > max_norm && std::isfinite(norm)) grad.scale(max_norm / norm);
  return norm;
}

}  // namespace seqx
