// SPDX-License-Identifier: Apache-2.0
/**
 * @file objectives.hpp
 * @brief Training objectives and their gradient estimators.
 *
 * XE is teacher-forced cross entropy. SLL maximises the expected semantic
 * score with a greedy-decode baseline. SLL-ME adds a per-step entropy bonus.
 * SLL-SLE mixes the SLL reward with a pairwise syntactic-distance reward
 * between the s samples of the same input:
 *
 *   maximise  alpha * E[delta(y)] + (1 - alpha) * E[d(y, y')]
 *
 * Both parts are estimated by the score-function (REINFORCE) trick and
 * packaged as per-sample weights on -log p(y_j | x), so the surrogate
 * gradient is exactly a weighted NLL gradient.
 */
#ifndef SEQX_OBJECTIVES_HPP
#define SEQX_OBJECTIVES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seqx/rng.hpp"
#include "seqx/seq_model.hpp"
#include "seqx/text_metrics.hpp"

namespace seqx {

enum class Objective { kXe, kSll, kSllMe, kSllSle };

std::string objective_name(Objective o);
/// Accepts "XE", "SLL", "SLL-ME", "SLL-SLE" in any case.
Objective parse_objective(std::string_view name);

struct TrainConfig {
  double alpha = 0.75;
  int s = 5;
  int M = 10;
  int N = 20;
  double lr_xe = 5e-4;
  double lr_sll = 5e-5;
  double beta_me = 1e-2;
  int max_len = 16;
  int beam_width = 5;
  std::uint64_t seed = 0;
  Objective objective = Objective::kSllSle;
  int hidden = kDefaultHiddenSize;
  int emb_dim = kDefaultEmbedDim;

  void validate() const;
  RolloutLimits limits() const { return {max_len, true}; }
};

/// Keys must be a subset of the TrainConfig field names; unknown keys throw.
TrainConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const TrainConfig& config);

inline constexpr double kGradClipNorm = 5.0;

/// s sampled captions for one input together with their scores.
struct SampleBatch {
  int input_id = 0;
  std::vector<double> features;
  std::vector<Trace> traces;
  std::vector<double> deltas;  // semantic score of each sample
  Eigen::MatrixXd dist;        // s x s syntactic distances
  double greedy_delta = 0.0;

  int size() const { return static_cast<int>(traces.size()); }
};

/// Samples s captions, scores them and the greedy decode against `refs`.
SampleBatch make_sample_batch(int input_id, std::span<const double> features,
                              const CiderReferences& refs, const ModelParams& params,
                              int s, int max_len, Rng& rng);

/// Fills deltas, greedy_delta and dist for already sampled traces.
void score_sample_batch(SampleBatch& batch, const CiderReferences& refs,
                        const ModelParams& params, int max_len);

/**
 * Normalisation of the pairwise reward sum_k d(y_j, y_k).
 *
 * kUnbiased divides by (s - 1) and gives an unbiased estimate of the gradient
 * of E[d]. kPerSample divides by s; its estimate has expectation (s - 1)/s
 * times the true gradient.
 */
enum class PairwiseScale { kUnbiased, kPerSample };

struct EstimatorOptions {
  bool baselines = true;
  PairwiseScale pairwise = PairwiseScale::kUnbiased;
};

/// delta_j - greedy_delta (or delta_j without the baseline).
std::vector<double> precision_advantage(const SampleBatch& batch, bool baseline = true);

/// c * (R_j - mean_j' R_j') with R_j the row sum of dist and c = 2/(s-1)
/// (kUnbiased) or 2/s (kPerSample).
std::vector<double> diversity_advantage(const SampleBatch& batch,
                                        PairwiseScale scale = PairwiseScale::kUnbiased,
                                        bool baseline = true);

/// Per-sample weights w_j = (1/s)(alpha a_delta_j + (1 - alpha) a_d_j); alpha
/// is forced to 1 for SLL and SLL-ME.
std::vector<double> surrogate_weights(const SampleBatch& batch, const TrainConfig& config,
                                      const EstimatorOptions& options = {});

/// Surrogate loss sum_j w_j * (-log p(y_j|x)) and its gradient.
LossAndGradient surrogate_loss_grad(const SampleBatch& batch, const ModelParams& params,
                                    const TrainConfig& config,
                                    const EstimatorOptions& options = {});

/// grad += -beta * grad of the sample-averaged mean step entropy. Returns the
/// averaged entropy.
double entropy_reg_grad(const SampleBatch& batch, const ModelParams& params,
                        const TrainConfig& config, Gradient& grad);

/// Teacher-forced NLL of one reference and its gradient.
LossAndGradient xe_loss_grad(std::span<const double> features, CaptionView reference,
                             const ModelParams& params, RolloutLimits limits);

struct AdamState {
  Gradient m;
  Gradient v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(const ModelDims& dims) : m(dims), v(dims) {}
};

/// Bias-corrected ADAM update. Throws TrainingDivergence on a non-finite
/// gradient, leaving params and state untouched.
void adam_step(ModelParams& params, const Gradient& gradient, AdamState& state, double lr);

/// Rescales grad to norm at most max_norm. Returns the norm before clipping.
double clip_global_norm(Gradient& grad, double max_norm);

}  // namespace seqx

#endif  // SEQX_OBJECTIVES_HPP
