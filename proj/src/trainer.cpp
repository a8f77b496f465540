// SPDX-License-Identifier: Apache-2.0
#include "seqx/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <utility>

namespace seqx {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;

void check_corpus(const Corpus& corpus, int feature_dim, int vocab, int max_len,
                  const char* name) {
  for (const Instance& inst : corpus) {
    if (static_cast<int>(inst.features.size()) != feature_dim) {
      throw ValidationError(std::string(name) + " instance " + inst.id +
                            " has wrong feature length");
    }
    if (inst.refs.empty()) {
      throw ValidationError(std::string(name) + " instance " + inst.id + " has no references");
    }
    for (const Caption& r : inst.refs) check_caption(r, vocab, max_len);
  }
}

}  // namespace

nlohmann::json epoch_record_to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"phase", r.phase == Phase::kXe ? "xe" : "sequence"},
          {"mean_loss", r.mean_loss},
          {"eval_cider", r.eval_cider ? nlohmann::json(*r.eval_cider) : nlohmann::json()},
          {"wallclock_s", r.wallclock_s}};
}

ModelDims model_dims_for(const TrainConfig& config, int feature_dim, int vocab_size) {
  ModelDims d{feature_dim, config.emb_dim, config.hidden, vocab_size};
  d.validate();
  return d;
}

Trainer::Trainer(TrainConfig config, Corpus train, Corpus heldout, int vocab_size)
    : config_(std::move(config)), train_(std::move(train)), heldout_(std::move(heldout)) {
  config_.validate();
  if (train_.empty()) throw ValidationError("training corpus is empty");
  params_ = init_params(
      model_dims_for(config_, static_cast<int>(train_.front().features.size()), vocab_size),
      config_.seed);
  setup();
}

Trainer::Trainer(TrainConfig config, Corpus train, Corpus heldout, ModelParams params,
                 int start_epoch)
    : config_(std::move(config)),
      train_(std::move(train)),
      heldout_(std::move(heldout)),
      params_(std::move(params)),
      epoch_(start_epoch) {
  config_.validate();
  if (train_.empty()) throw ValidationError("training corpus is empty");
  setup();
}

void Trainer::setup() {
  const ModelDims& d = params_.dims();
  check_corpus(train_, d.feature_dim, d.vocab, config_.max_len, "training");
  check_corpus(heldout_, d.feature_dim, d.vocab, config_.max_len, "held-out");

  const auto train_sets = reference_sets(train_);
  train_df_ = std::make_shared<const DocFreqTable>(build_doc_freq(train_sets));
  for (const Instance& inst : train_) train_refs_.emplace_back(inst.refs, *train_df_);
  if (!heldout_.empty()) {
    const auto sets = reference_sets(heldout_);
    heldout_df_ = std::make_shared<const DocFreqTable>(build_doc_freq(sets));
    for (const Instance& inst : heldout_) heldout_refs_.emplace_back(inst.refs, *heldout_df_);
  }
}

Phase Trainer::phase_of(int epoch) const {
  return (config_.objective == Objective::kXe || epoch < config_.M) ? Phase::kXe
                                                                     : Phase::kSequence;
}

std::optional<double> Trainer::heldout_cider() const {
  if (heldout_.empty()) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < heldout_.size(); ++i) {
    sum += heldout_refs_[i].score(greedy_decode(heldout_[i].features, params_, config_.max_len));
  }
  return sum / static_cast<double>(heldout_.size());
}

EpochRecord Trainer::run_epoch() {
  if (done()) throw ValidationError("training already finished");
  const auto start = std::chrono::steady_clock::now();
  const int epoch = epoch_;
  const Phase phase = phase_of(epoch);
  if (!adam_ || adam_phase_ != phase) {
    adam_.emplace(params_.dims());
    adam_phase_ = phase;
  }

  EpochRecord rec;
  rec.epoch = epoch;
  rec.phase = phase;
  try {
    rec.mean_loss = phase == Phase::kXe ? xe_epoch(epoch) : sequence_epoch(epoch);
  } catch (const TrainingDivergence& e) {
    throw TrainingDivergence("training diverged in epoch " + std::to_string(epoch) + ": " +
                             e.what());
  }
  if (!std::isfinite(rec.mean_loss)) {
    throw TrainingDivergence("training diverged in epoch " + std::to_string(epoch) +
                             ": non-finite loss");
  }
  rec.eval_cider = heldout_cider();
  ++epoch_;
  rec.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

double Trainer::xe_epoch(int epoch) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < train_.size(); ++i) {
    for (std::size_t r = 0; r < train_[i].refs.size(); ++r) pairs.emplace_back(i, r);
  }
  Rng order(derive_seed(config_.seed, kShuffleStream, static_cast<std::uint64_t>(epoch)));
  order.shuffle(pairs);

  double total = 0.0;
  for (const auto& [i, r] : pairs) {
    LossAndGradient lg = xe_loss_grad(train_[i].features, train_[i].refs[r], params_,
                                      config_.limits());
    if (!std::isfinite(lg.loss)) throw TrainingDivergence("non-finite XE loss");
    clip_global_norm(lg.gradient, kGradClipNorm);
    adam_step(params_, lg.gradient, *adam_, config_.lr_xe);
    total += lg.loss;
  }
  return total / static_cast<double>(pairs.size());
}

double Trainer::sequence_epoch(int epoch) {
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle(derive_seed(config_.seed, kShuffleStream, static_cast<std::uint64_t>(epoch)));
  shuffle.shuffle(order);

  double total = 0.0;
  for (std::size_t i : order) {
    Rng rng(derive_seed(config_.seed, i, static_cast<std::uint64_t>(epoch)));
    const SampleBatch batch =
        make_sample_batch(static_cast<int>(i), train_[i].features, train_refs_[i], params_,
                          config_.s, config_.max_len, rng);
    LossAndGradient lg = surrogate_loss_grad(batch, params_, config_);
    if (config_.objective == Objective::kSllMe && config_.beta_me != 0.0) {
      const double h = entropy_reg_grad(batch, params_, config_, lg.gradient);
      lg.loss -= config_.beta_me * h;
    }
    if (!std::isfinite(lg.loss)) throw TrainingDivergence("non-finite surrogate loss");
    clip_global_norm(lg.gradient, kGradClipNorm);
    adam_step(params_, lg.gradient, *adam_, config_.lr_sll);
    total += lg.loss;
  }
  return total / static_cast<double>(train_.size());
}

TrainResult train(const Corpus& train_set, const Corpus& heldout, int vocab_size,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  Trainer trainer(config, train_set, heldout, vocab_size);
  TrainResult result;
  while (!trainer.done()) {
    result.log.push_back(trainer.run_epoch());
    if (on_epoch) on_epoch(result.log.back());
  }
  result.params = trainer.params();
  return result;
}

}  // namespace seqx
