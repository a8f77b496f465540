// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "seqx/exact_oracle.hpp"
#include "seqx/rng.hpp"

namespace seqx {

namespace {

constexpr int kFeatureDim = 4;
constexpr int kEmbedDim = 4;
constexpr int kHidden = 8;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace

ModelParams random_params(const ModelDims& dims, std::uint64_t seed, double scale) {
  ModelParams p(dims);
  Rng rng(seed);
  for (double& v : p.values()) v = rng.uniform(-scale, scale);
  return p;
}

bool ExactCheckReport::pass() const {
  for (const ExactCheck& c : checks) {
    if (!c.pass) return false;
  }
  return !checks.empty();
}

ExactCheckReport run_exact_checks(int content_vocab, int max_len, std::uint64_t seed,
                                  int draws) {
  if (draws < 2) throw ValidationError("need at least 2 Monte-Carlo draws");
  ExactCheckReport report{content_vocab, max_len, seed, {}};
  const ModelDims dims{kFeatureDim, kEmbedDim, kHidden, content_vocab + kFirstContent};
  const ModelParams params = random_params(dims, derive_seed(seed, 1));
  const RolloutLimits limits{max_len, true};

  Rng rng(derive_seed(seed, 2));
  std::vector<double> features(kFeatureDim);
  for (double& f : features) f = rng.normal();

  const std::vector<Caption> space = enumerate_captions(content_vocab, max_len);
  auto random_caption = [&] { return space[rng.below(space.size())]; };
  std::vector<std::vector<Caption>> corpus(4);
  for (auto& set : corpus) {
    set = {random_caption(), random_caption()};
  }
  const std::vector<Caption>& refs = corpus.front();
  const DocFreqTable df = build_doc_freq(corpus);
  const ExactProblem problem(features, refs, df, content_vocab, max_len);

  auto add = [&](std::string name, double value, double threshold, bool pass) {
    report.checks.push_back({std::move(name), value, threshold, pass});
  };

  const EnumeratedSpace es = enumerate_space(features, params, limits);
  const double norm_err = std::abs(es.total_probability() - 1.0);
  add("normalization", norm_err, 1e-9, norm_err < 1e-9);

  const double sfi = score_function_identity_check(features, params, limits);
  add("score_function_identity", sfi, 1e-8, sfi < 1e-8);

  const double gp_gap = std::abs(problem.objective(params, 1.0) - problem.gp(params));
  add("objective_alpha1_equals_gp", gp_gap, 0.0, gp_gap == 0.0);

  constexpr double kAlpha = 0.75;
  const Gradient exact = problem.gradient(params, kAlpha);
  const Gradient exact_fd = finite_difference_gradient(
      params, [&](const ModelParams& p) { return -problem.objective(p, kAlpha); });
  const double e1 = max_group_relative_error(exact, exact_fd);
  add("exact_gradient_vs_fd", e1, 1e-4, e1 < 1e-4);

  const Caption probe = random_caption();
  const Caption probe2 = random_caption();
  const std::vector<NllItem> items{{features, probe, 0.7}, {features, probe2, -0.3}};
  const Gradient nll = weighted_nll_grad(items, params, limits).gradient;
  const Gradient nll_fd = finite_difference_gradient(params, [&](const ModelParams& p) {
    return weighted_nll_grad(items, p, limits).loss;
  });
  const double e2 = max_group_relative_error(nll, nll_fd);
  add("nll_gradient_vs_fd", e2, 1e-4, e2 < 1e-4);

  const Gradient ent = step_entropy(features, probe, params, limits).mean_gradient;
  const Gradient ent_fd = finite_difference_gradient(params, [&](const ModelParams& p) {
    return step_entropy(features, probe, p, limits).mean;
  });
  const double e3 = max_group_relative_error(ent, ent_fd);
  add("entropy_gradient_vs_fd", e3, 1e-4, e3 < 1e-4);

  const CiderReferences scorer(refs, df);
  Rng mc(derive_seed(seed, 3));
  std::vector<double> deltas, dists;
  deltas.reserve(static_cast<std::size_t>(draws));
  dists.reserve(static_cast<std::size_t>(draws));
  for (int i = 0; i < draws; ++i) {
    const Caption a = sample_caption(features, params, max_len, mc).caption;
    const Caption b = sample_caption(features, params, max_len, mc).caption;
    deltas.push_back(scorer.score(a));
    dists.push_back(syntactic_distance(a, b));
  }
  const MeanSe gp_mc = mean_and_se(deltas);
  const double z_gp = std::abs(gp_mc.mean - problem.gp(params)) / gp_mc.se;
  add("monte_carlo_gp_z", z_gp, 3.0, z_gp < 3.0);
  const MeanSe d_mc = mean_and_se(dists);
  const double z_d = std::abs(d_mc.mean - problem.expected_distance(params)) / d_mc.se;
  add("monte_carlo_distance_z", z_d, 3.0, z_d < 3.0);
  return report;
}

nlohmann::json exact_report_to_json(const ExactCheckReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const ExactCheck& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
  }
  return {{"vocab_size", report.content_vocab},
          {"max_len", report.max_len},
          {"seed", report.seed},
          {"checks", std::move(checks)},
          {"pass", report.pass()}};
}

}  // namespace seqx
