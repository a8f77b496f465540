// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "doctest.h"
#include "seqx/dataset.hpp"
#include "seqx/trainer.hpp"

using namespace seqx;

namespace {

struct Setup {
  Vocab vocab;
  Corpus train;
  Corpus heldout;
  TrainConfig config;

  Setup() {
    const auto scenes = generate_dataset(24, 3, 0.1, 71);
    const std::vector<Scene> tr(scenes.begin(), scenes.begin() + 20);
    const std::vector<Scene> ho(scenes.begin() + 20, scenes.end());
    vocab = vocab_from_scenes(scenes);
    train = encode_scenes(tr, vocab);
    heldout = encode_scenes(ho, vocab);
    config.hidden = 8;
    config.emb_dim = 4;
    config.M = 2;
    config.N = 4;
    config.s = 3;
    config.max_len = 10;
    config.lr_xe = 1e-2;
    config.lr_sll = 1e-3;
    config.seed = 5;
  }
};

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("phases and log records") {
  Setup st;
  const TrainResult r = train(st.train, st.heldout, st.vocab.size(), st.config);
  REQUIRE(r.log.size() == 4);
  for (int e = 0; e < 4; ++e) {
    CHECK(r.log[e].epoch == e);
    CHECK(r.log[e].phase == (e < 2 ? Phase::kXe : Phase::kSequence));
    CHECK(std::isfinite(r.log[e].mean_loss));
    REQUIRE(r.log[e].eval_cider.has_value());
    CHECK(*r.log[e].eval_cider >= 0.0);
  }
  CHECK(r.log[0].mean_loss > r.log[1].mean_loss);
  const auto j = epoch_record_to_json(r.log[3]);
  CHECK(j.at("phase") == "sequence");
  for (const char* key : {"epoch", "phase", "mean_loss", "eval_cider", "wallclock_s"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("N == M is pure cross entropy") {
  Setup st;
  st.config.N = 2;
  const TrainResult r = train(st.train, {}, st.vocab.size(), st.config);
  REQUIRE(r.log.size() == 2);
  for (const auto& rec : r.log) {
    CHECK(rec.phase == Phase::kXe);
    CHECK_FALSE(rec.eval_cider.has_value());
  }
  st.config.objective = Objective::kXe;
  st.config.N = 3;
  Trainer t(st.config, st.train, {}, st.vocab.size());
  for (int e = 0; e < 3; ++e) CHECK(t.phase_of(e) == Phase::kXe);
}

TEST_CASE("fixed seed is bit-identical") {
  Setup st;
  for (Objective o : {Objective::kSll, Objective::kSllMe, Objective::kSllSle}) {
    st.config.objective = o;
    const TrainResult a = train(st.train, st.heldout, st.vocab.size(), st.config);
    const TrainResult b = train(st.train, st.heldout, st.vocab.size(), st.config);
    CHECK(a.params == b.params);
  }
  TrainConfig other = st.config;
  other.seed = 6;
  CHECK_FALSE(train(st.train, {}, st.vocab.size(), other).params ==
              train(st.train, {}, st.vocab.size(), st.config).params);
}

TEST_CASE("resuming at the phase boundary matches an uninterrupted run") {
  Setup st;
  const TrainResult full = train(st.train, {}, st.vocab.size(), st.config);
  TrainConfig xe = st.config;
  xe.N = xe.M;
  const TrainResult first = train(st.train, {}, st.vocab.size(), xe);
  Trainer resume(st.config, st.train, {}, first.params, st.config.M);
  while (!resume.done()) resume.run_epoch();
  CHECK(resume.params() == full.params);
  CHECK_THROWS_AS(resume.run_epoch(), ValidationError);
}

TEST_CASE("validation and divergence") {
  Setup st;
  CHECK_THROWS_AS(Trainer(st.config, {}, {}, st.vocab.size()), ValidationError);
  Corpus bad = st.train;
  bad[0].features.pop_back();
  CHECK_THROWS_AS(Trainer(st.config, bad, {}, st.vocab.size()), ValidationError);
  bad = st.train;
  bad[0].refs.clear();
  CHECK_THROWS_AS(Trainer(st.config, bad, {}, st.vocab.size()), ValidationError);

  Corpus poisoned = st.train;
  poisoned[3].features[0] = std::numeric_limits<double>::quiet_NaN();
  Trainer t(st.config, poisoned, {}, st.vocab.size());
  try {
    t.run_epoch();
    FAIL("expected divergence");
  } catch (const TrainingDivergence& e) {
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
  }
}

}  // TEST_SUITE
