// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "seqx/exact_oracle.hpp"
#include "seqx/objectives.hpp"

using namespace seqx;

namespace {

SampleBatch hand_batch(std::vector<double> deltas, double greedy) {
  SampleBatch b;
  b.deltas = std::move(deltas);
  b.greedy_delta = greedy;
  b.traces.resize(b.deltas.size());
  b.dist = Eigen::MatrixXd::Zero(b.size(), b.size());
  return b;
}

struct Fixture {
  ModelDims dims = gen::tiny_dims(3);
  ModelParams params = random_params(dims, 41, 0.8);
  std::vector<double> features;
  std::vector<std::vector<Caption>> corpus;
  DocFreqTable df;
  std::unique_ptr<CiderReferences> refs;

  Fixture() {
    Rng rng(42);
    features = gen::features(rng, 4);
    for (int i = 0; i < 4; ++i) corpus.push_back(gen::captions(rng, 2, 3, 1, 3));
    df = build_doc_freq(corpus);
    refs = std::make_unique<CiderReferences>(corpus.front(), df);
  }
};

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("objective names") {
  CHECK(parse_objective("sll-sle") == Objective::kSllSle);
  CHECK(parse_objective("SLL-ME") == Objective::kSllMe);
  CHECK(parse_objective("xe") == Objective::kXe);
  CHECK(parse_objective(objective_name(Objective::kSll)) == Objective::kSll);
  CHECK_THROWS_AS(parse_objective("ppo"), ValidationError);
}

TEST_CASE("config validation and json") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.M = 30;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.s = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = {};
  c.alpha = 0.5;
  c.seed = 17;
  c.objective = Objective::kSllMe;
  const TrainConfig back = config_from_json(config_to_json(c));
  CHECK(back.alpha == 0.5);
  CHECK(back.seed == 17);
  CHECK(back.objective == Objective::kSllMe);
  CHECK(back.N == c.N);

  const TrainConfig partial = config_from_json({{"alpha", 0.25}, {"objective", "SLL"}});
  CHECK(partial.alpha == 0.25);
  CHECK(partial.objective == Objective::kSll);
  CHECK(partial.s == 5);
  CHECK_THROWS_AS(config_from_json({{"alpah", 0.25}}), ValidationError);
  CHECK_THROWS_AS(config_from_json({{"alpha", "high"}}), ValidationError);
}

TEST_CASE("precision advantage") {
  const SampleBatch b = hand_batch({0.8, 0.5}, 0.6);
  const auto a = precision_advantage(b);
  CHECK(a[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(-0.1).epsilon(1e-14));
  for (double v : precision_advantage(hand_batch({0.3, 0.3, 0.3}, 0.3))) CHECK(v == 0.0);
  CHECK(precision_advantage(b, false)[0] == 0.8);
}

TEST_CASE("diversity advantage") {
  for (double v : diversity_advantage(hand_batch({0, 0, 0}, 0))) CHECK(v == 0.0);

  SampleBatch two = hand_batch({0, 0}, 0);
  two.dist << 0.0, 0.5, 0.5, 0.0;
  for (double v : diversity_advantage(two)) CHECK(v == 0.0);

  // Row sums (1.0, 0.4, 0.6), mean 2/3, deviations (1/3, -4/15, -1/15).
  SampleBatch three = hand_batch({0, 0, 0}, 0);
  three.dist << 0.0, 0.4, 0.6,
                0.4, 0.0, 0.0,
                0.6, 0.0, 0.0;
  const auto per_sample = diversity_advantage(three, PairwiseScale::kPerSample);
  CHECK(per_sample[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(per_sample[1] == doctest::Approx(-8.0 / 45.0).epsilon(1e-14));
  CHECK(per_sample[2] == doctest::Approx(-2.0 / 45.0).epsilon(1e-14));
  const auto unbiased = diversity_advantage(three);
  CHECK(unbiased[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(unbiased[1] == doctest::Approx(-4.0 / 15.0).epsilon(1e-14));
  CHECK(unbiased[2] == doctest::Approx(-1.0 / 15.0).epsilon(1e-14));
  const auto raw = diversity_advantage(three, PairwiseScale::kUnbiased, false);
  CHECK(raw[0] == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(diversity_advantage(hand_batch({0.1}, 0)), ValidationError);
}

TEST_CASE("sample batch invariants") {
  Fixture fx;
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const SampleBatch b = make_sample_batch(trial, fx.features, *fx.refs, fx.params, 5, 3, rng);
    REQUIRE(b.size() == 5);
    CHECK(b.dist.isApprox(b.dist.transpose(), 0.0));
    for (int j = 0; j < 5; ++j) {
      CHECK(b.dist(j, j) == 0.0);
      CHECK(b.deltas[j] >= 0.0);
      CHECK(b.deltas[j] <= 1.0 + 1e-12);
      CHECK(b.deltas[j] == fx.refs->score(b.traces[j].caption));
    }
    CHECK(b.greedy_delta == fx.refs->score(greedy_decode(fx.features, fx.params, 3)));
    const Caption g = greedy_decode(fx.features, fx.params, 3);
    const auto a = precision_advantage(b);
    for (int j = 0; j < 5; ++j) {
      if (b.traces[j].caption == g) CHECK(a[j] == 0.0);
    }
  }
}

TEST_CASE("surrogate identities") {
  Fixture fx;
  Rng rng(44);
  TrainConfig cfg;
  cfg.max_len = 3;
  for (int trial = 0; trial < 20; ++trial) {
    const SampleBatch b = make_sample_batch(trial, fx.features, *fx.refs, fx.params, 5, 3, rng);

    cfg.objective = Objective::kSllSle;
    const auto w = surrogate_weights(b, cfg);
    std::vector<NllItem> items;
    for (int j = 0; j < b.size(); ++j) items.push_back({b.features, b.traces[j].caption, w[j]});
    CHECK(surrogate_loss_grad(b, fx.params, cfg).gradient ==
          weighted_nll_grad(items, fx.params, cfg.limits()).gradient);

    cfg.alpha = 1.0;
    const Gradient sle = surrogate_loss_grad(b, fx.params, cfg).gradient;
    cfg.objective = Objective::kSll;
    const Gradient sll = surrogate_loss_grad(b, fx.params, cfg).gradient;
    CHECK(sle == sll);
    cfg.alpha = 0.75;
    // SLL ignores alpha.
    CHECK(surrogate_loss_grad(b, fx.params, cfg).gradient == sll);

    cfg.objective = Objective::kSllMe;
    cfg.beta_me = 0.0;
    Gradient me = surrogate_loss_grad(b, fx.params, cfg).gradient;
    entropy_reg_grad(b, fx.params, cfg, me);
    CHECK(me == sll);
    cfg.beta_me = 1e-2;
  }
  const SampleBatch b = hand_batch({0.5, 0.4}, 0.45);
  cfg.objective = Objective::kXe;
  CHECK_THROWS_AS(surrogate_weights(b, cfg), ValidationError);
}

TEST_CASE("all advantages zero gives zero gradient") {
  Fixture fx;
  Rng rng(45);
  SampleBatch b = make_sample_batch(0, fx.features, *fx.refs, fx.params, 4, 3, rng);
  for (double& d : b.deltas) d = b.greedy_delta;
  b.dist.setZero();
  TrainConfig cfg;
  cfg.max_len = 3;
  const Gradient g = surrogate_loss_grad(b, fx.params, cfg).gradient;
  for (double v : g.values()) CHECK(v == 0.0);
}

TEST_CASE("entropy regulariser") {
  Fixture fx;
  Rng rng(46);
  const SampleBatch b = make_sample_batch(0, fx.features, *fx.refs, fx.params, 3, 3, rng);
  TrainConfig cfg;
  cfg.max_len = 3;
  cfg.objective = Objective::kSllMe;
  cfg.beta_me = 0.2;
  Gradient g(fx.dims);
  const double h = entropy_reg_grad(b, fx.params, cfg, g);
  double mean = 0.0;
  for (const Trace& t : b.traces) mean += step_entropy(b.features, t.caption, fx.params, cfg.limits()).mean;
  CHECK(h == doctest::Approx(mean / 3.0).epsilon(1e-14));
  const Gradient fd = finite_difference_gradient(fx.params, [&](const ModelParams& q) {
    double s = 0.0;
    for (const Trace& t : b.traces) s += step_entropy(b.features, t.caption, q, cfg.limits()).mean;
    return -cfg.beta_me * s / 3.0;
  });
  CHECK(max_group_relative_error(g, fd) < 1e-4);
}

TEST_CASE("xe loss") {
  Fixture fx;
  const Caption ref{2, 4, 3};
  const LossAndGradient lg = xe_loss_grad(fx.features, ref, fx.params, {3, true});
  CHECK(lg.loss >= 0.0);
  CHECK(lg.loss == -sequence_log_prob(fx.features, ref, fx.params, {3, true}).total_logprob);
  const Gradient fd = finite_difference_gradient(fx.params, [&](const ModelParams& q) {
    return xe_loss_grad(fx.features, ref, q, {3, true}).loss;
  });
  CHECK(max_group_relative_error(lg.gradient, fd) < 1e-4);
}

TEST_CASE("adam") {
  const ModelDims d{1, 1, 1, 3};
  ModelParams p(d);
  for (double& v : p.values()) v = 0.5;
  const ModelParams start = p;
  AdamState st(d);
  Gradient zero(d);
  adam_step(p, zero, st, 0.1);
  CHECK(p == start);
  CHECK(st.step == 1);

  ModelParams q = start;
  AdamState s2(d);
  Gradient g(d);
  g.values()[0] = 0.3;
  g.values()[1] = -2.0;
  adam_step(q, g, s2, 0.01);
  // First step: bias-corrected m = g, v = g^2.
  CHECK(q.values()[0] == doctest::Approx(0.5 - 0.01 * 0.3 / (0.3 + 1e-8)).epsilon(1e-14));
  CHECK(q.values()[1] == doctest::Approx(0.5 + 0.01 * 2.0 / (2.0 + 1e-8)).epsilon(1e-14));
  CHECK(q.values()[2] == 0.5);

  // Second step by hand.
  Gradient g2(d);
  g2.values()[0] = -0.1;
  adam_step(q, g2, s2, 0.01);
  const double m = 0.9 * 0.1 * 0.3 + 0.1 * -0.1;
  const double v = 0.999 * 0.001 * 0.09 + 0.001 * 0.01;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(q.values()[0] ==
        doctest::Approx(0.5 - 0.01 * 0.3 / (0.3 + 1e-8) - 0.01 * mh / (std::sqrt(vh) + 1e-8))
            .epsilon(1e-13));

  ModelParams r1 = start, r2 = start;
  AdamState a1(d), a2(d);
  adam_step(r1, g, a1, 0.01);
  adam_step(r2, g, a2, 0.01);
  CHECK(r1 == r2);

  Gradient bad(d);
  bad.values()[0] = std::nan("");
  CHECK_THROWS_AS(adam_step(r1, bad, a1, 0.01), TrainingDivergence);
}

TEST_CASE("gradient clipping") {
  const ModelDims d{1, 1, 1, 3};
  Gradient g(d);
  g.values()[0] = 3.0;
  g.values()[1] = 4.0;
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(5.0));
  CHECK(g.values()[0] == 3.0);
  clip_global_norm(g, 1.0);
  CHECK(std::sqrt(g.squared_norm()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.values()[0] == doctest::Approx(0.6));
}

TEST_CASE("gradient estimators are unbiased") {
  Fixture fx;
  const ExactProblem problem(fx.features, fx.corpus.front(), fx.df, 3, 3);
  TrainConfig cfg;
  cfg.max_len = 3;
  cfg.alpha = 0.75;
  cfg.objective = Objective::kSllSle;
  const Gradient exact = problem.gradient(fx.params, cfg.alpha);
  Rng drng(47);
  Gradient dir(fx.dims);
  for (double& v : dir.values()) v = drng.normal();
  const double truth = exact.dot(dir);

  Rng rng(48);
  constexpr int kDraws = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const SampleBatch b = make_sample_batch(0, fx.features, *fx.refs, fx.params, 4, 3, rng);
    const double x = surrogate_loss_grad(b, fx.params, cfg, {false, PairwiseScale::kUnbiased})
                         .gradient.dot(dir);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sq / kDraws - mean * mean) / (kDraws - 1));
  CHECK(std::abs(mean - truth) < 3.0 * se);
}

}  // TEST_SUITE
