// SPDX-License-Identifier: Apache-2.0
/**
 * @file seq_model.hpp
 * @brief Encoder projection + LSTM decoder caption policy p(y|x).
 *
 * The encoder is one dense layer with tanh whose output initialises the
 * decoder hidden state (cell starts at zero). Each step embeds the previous
 * token, applies a standard LSTM cell (gate order i, f, o, g) and projects
 * the new hidden state to vocabulary logits.
 *
 * The output distribution never emits BOS, never emits EOS at the first
 * step (captions are non-empty) and, at step max_len, emits EOS with
 * probability one. With these rules the probabilities of all captions of
 * length 1..max_len sum to exactly one, which the enumeration oracles rely
 * on.
 */
#ifndef SEQX_SEQ_MODEL_HPP
#define SEQX_SEQ_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqx/rng.hpp"
#include "seqx/types.hpp"

namespace seqx {

inline constexpr int kDefaultHiddenSize = 512;
inline constexpr int kDefaultEmbedDim = 64;
inline constexpr double kInitRange = 0.08;

struct ModelDims {
  int feature_dim = 0;
  int emb_dim = kDefaultEmbedDim;
  int hidden = kDefaultHiddenSize;
  int vocab = 0;  // includes BOS and EOS

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// One named tensor inside the flat parameter vector.
struct ParamGroup {
  std::string name;
  int rows;
  int cols;
  std::size_t offset;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/**
 * All learnable weights stored contiguously; accessors return Eigen maps
 * into the buffer. The same type doubles as a gradient accumulator.
 *
 * Shapes (column-major): enc_w hidden x feature, lstm_wx 4H x emb,
 * lstm_wh 4H x H, embed emb x vocab (one column per token), out_w vocab x H.
 */
class ModelParams {
 public:
  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  ModelParams() = default;
  /// Zero-filled.
  explicit ModelParams(const ModelDims& dims);

  const ModelDims& dims() const { return dims_; }
  /// Groups in declared (serialisation) order.
  const std::vector<ParamGroup>& groups() const { return groups_; }
  const ParamGroup& group(const std::string& name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> group_values(const ParamGroup& g) {
    return std::span<double>(values_).subspan(g.offset, g.size());
  }
  std::span<const double> group_values(const ParamGroup& g) const {
    return std::span<const double>(values_).subspan(g.offset, g.size());
  }

  MatMap enc_w() { return mat(0); }
  VecMap enc_b() { return vec(1); }
  MatMap lstm_wx() { return mat(2); }
  MatMap lstm_wh() { return mat(3); }
  VecMap lstm_b() { return vec(4); }
  MatMap embed() { return mat(5); }
  MatMap out_w() { return mat(6); }
  VecMap out_b() { return vec(7); }

  ConstMatMap enc_w() const { return mat(0); }
  ConstVecMap enc_b() const { return vec(1); }
  ConstMatMap lstm_wx() const { return mat(2); }
  ConstMatMap lstm_wh() const { return mat(3); }
  ConstVecMap lstm_b() const { return vec(4); }
  ConstMatMap embed() const { return mat(5); }
  ConstMatMap out_w() const { return mat(6); }
  ConstVecMap out_b() const { return vec(7); }

  void set_zero();
  /// this += scale * other
  void add_scaled(const ModelParams& other, double scale);
  void scale(double factor);
  double squared_norm() const;
  double dot(const ModelParams& other) const;
  bool all_finite() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  MatMap mat(std::size_t i);
  ConstMatMap mat(std::size_t i) const;
  VecMap vec(std::size_t i);
  ConstVecMap vec(std::size_t i) const;

  ModelDims dims_;
  std::vector<ParamGroup> groups_;
  std::vector<double> values_;
};

using Gradient = ModelParams;

/// Uniform in [-0.08, 0.08] for weights and embeddings, zero biases.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

struct DecoderState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
};

DecoderState encode(std::span<const double> features, const ModelParams& params);

struct StepOutput {
  Eigen::VectorXd logits;  // length vocab
  DecoderState next;
};

StepOutput decode_step(const DecoderState& state, TokenId input,
                       const ModelParams& params);

/// Output rules of the policy at one step.
struct StepMask {
  bool allow_eos = true;
  bool allowed(TokenId t) const { return t != kBos && (allow_eos || t != kEos); }
};

/// Log-softmax over allowed tokens; masked entries are -infinity.
Eigen::VectorXd masked_log_softmax(const Eigen::VectorXd& logits, StepMask mask);

struct RolloutLimits {
  int max_len = 16;
  /// Disabling breaks normalisation; only oracle tests do this.
  bool force_final_eos = true;
};

struct Trace {
  Caption caption;
  /// One entry per emitted token including the terminal EOS.
  std::vector<double> step_logprobs;
  double total_logprob = 0.0;
};

/// Throws ValidationError on empty, over-length or invalid-token captions.
void check_caption(CaptionView caption, int vocab, int max_len);

/// Teacher-forced log-probability of caption followed by EOS.
Trace sequence_log_prob(std::span<const double> features, CaptionView caption,
                        const ModelParams& params, RolloutLimits limits);

/// Ancestral sampling at temperature 1.
Trace sample_caption(std::span<const double> features, const ModelParams& params,
                     int max_len, Rng& rng);

/// Argmax per step, ties to the lowest token id.
Caption greedy_decode(std::span<const double> features, const ModelParams& params,
                      int max_len);

struct Hypothesis {
  Caption caption;
  double logprob = 0.0;
};

/// Up to `width` completed hypotheses sorted by total log-probability
/// (no length normalisation).
std::vector<Hypothesis> beam_search(std::span<const double> features,
                                    const ModelParams& params, int width,
                                    int max_len);

/// One term of a weighted negative log-likelihood.
struct NllItem {
  std::span<const double> features;
  CaptionView caption;
  double weight = 1.0;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

/// Sum_j weight_j * (-log p(caption_j | features_j)) and its exact gradient;
/// weights are constants.
LossAndGradient weighted_nll_grad(std::span<const NllItem> items,
                                  const ModelParams& params, RolloutLimits limits);

/// Accumulating form: grad += d/dtheta of the weighted NLL; returns the loss.
double accumulate_weighted_nll(std::span<const NllItem> items,
                               const ModelParams& params, RolloutLimits limits,
                               Gradient& grad);

struct EntropyResult {
  /// Entropy of every non-forced step of the teacher-forced rollout.
  std::vector<double> entropies;
  double mean = 0.0;
  /// Gradient of `mean`.
  Gradient mean_gradient;
};

EntropyResult step_entropy(std::span<const double> features, CaptionView caption,
                           const ModelParams& params, RolloutLimits limits);

/// grad += scale * d(mean step entropy)/dtheta; returns the mean entropy.
double accumulate_mean_entropy(std::span<const double> features,
                               CaptionView caption, const ModelParams& params,
                               RolloutLimits limits, double scale, Gradient& grad);

}  // namespace seqx

#endif  // SEQX_SEQ_MODEL_HPP
