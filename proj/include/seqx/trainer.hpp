// SPDX-License-Identifier: Apache-2.0
/**
 * @file trainer.hpp
 * @brief Two-phase training: cross entropy for epochs [0, M), then the
 *        configured sequence-level objective for epochs [M, N).
 *
 * Parameters are updated after every instance. ADAM state is reset whenever
 * the phase changes, so a run resumed at epoch M from the XE checkpoint is
 * bit-identical to an uninterrupted run. Sampling streams are derived from
 * (seed, instance index, epoch).
 */
#ifndef SEQX_TRAINER_HPP
#define SEQX_TRAINER_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqx/corpus.hpp"
#include "seqx/objectives.hpp"

namespace seqx {

enum class Phase { kXe, kSequence };

struct EpochRecord {
  int epoch = 0;
  Phase phase = Phase::kXe;
  double mean_loss = 0.0;
  std::optional<double> eval_cider;  // mean greedy delta on held-out inputs
  double wallclock_s = 0.0;
};

nlohmann::json epoch_record_to_json(const EpochRecord& r);

class Trainer {
 public:
  /// Starts from init_params(dims, config.seed) at epoch 0.
  Trainer(TrainConfig config, Corpus train, Corpus heldout, int vocab_size);
  /// Resumes from `params` at `start_epoch`; exact only at a phase boundary.
  Trainer(TrainConfig config, Corpus train, Corpus heldout, ModelParams params,
          int start_epoch);

  Phase phase_of(int epoch) const;
  int next_epoch() const { return epoch_; }
  bool done() const { return epoch_ >= config_.N; }

  /// Throws TrainingDivergence naming the epoch on a non-finite loss.
  EpochRecord run_epoch();

  const ModelParams& params() const { return params_; }
  const TrainConfig& config() const { return config_; }
  /// Greedy mean delta over the held-out split (nullopt when empty).
  std::optional<double> heldout_cider() const;

 private:
  double xe_epoch(int epoch);
  double sequence_epoch(int epoch);
  void setup();

  TrainConfig config_;
  Corpus train_;
  Corpus heldout_;
  ModelParams params_;
  int epoch_ = 0;
  std::optional<AdamState> adam_;
  std::optional<Phase> adam_phase_;
  std::shared_ptr<const DocFreqTable> train_df_;
  std::shared_ptr<const DocFreqTable> heldout_df_;
  std::vector<CiderReferences> train_refs_;
  std::vector<CiderReferences> heldout_refs_;
};

ModelDims model_dims_for(const TrainConfig& config, int feature_dim, int vocab_size);

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> log;
};

TrainResult train(const Corpus& train_set, const Corpus& heldout, int vocab_size,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace seqx

#endif  // SEQX_TRAINER_HPP
