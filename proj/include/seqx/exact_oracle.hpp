// SPDX-License-Identifier: Apache-2.0
/**
 * @file exact_oracle.hpp
 * @brief Exhaustive enumeration over tiny caption spaces.
 *
 * With forced EOS the caption space is every content sequence of length
 * 1..max_len, so expectations under the policy are finite sums:
 *
 *   GP        = sum_y delta(y) p(y)
 *   J(alpha)  = alpha GP + (1 - alpha) sum_y sum_y' d(y, y') p(y) p(y')
 *   -grad J   = -sum_y [alpha delta(y) + (1 - alpha) 2 D(y)] p(y) grad log p(y)
 *
 * where D(y) = sum_y' d(y, y') p(y'). These are the ground truth for every
 * Monte-Carlo estimator in the trainer.
 */
#ifndef SEQX_EXACT_ORACLE_HPP
#define SEQX_EXACT_ORACLE_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqx/seq_model.hpp"
#include "seqx/text_metrics.hpp"

namespace seqx {

inline constexpr double kMaxEnumeratedCaptions = 1e6;

/// All content sequences of length 1..max_len in lexicographic order (shorter
/// first within a shared prefix). Throws when content_vocab^max_len > 1e6.
std::vector<Caption> enumerate_captions(int content_vocab, int max_len);

struct EnumeratedSpace {
  std::vector<Caption> captions;
  std::vector<double> probabilities;

  double total_probability() const;
};

EnumeratedSpace enumerate_space(std::span<const double> features, const ModelParams& params,
                                RolloutLimits limits);

/**
 * Enumerated space with the parameter-independent scores cached: delta of
 * every caption against the references and the full pairwise distance
 * matrix. Finite-difference sweeps re-evaluate only the probabilities.
 */
class ExactProblem {
 public:
  ExactProblem(std::vector<double> features, std::span<const Caption> refs,
               const DocFreqTable& df, int content_vocab, int max_len);

  const std::vector<Caption>& captions() const { return captions_; }
  const std::vector<double>& deltas() const { return deltas_; }
  const Eigen::MatrixXd& distances() const { return dist_; }
  std::span<const double> features() const { return features_; }
  int max_len() const { return max_len_; }

  std::vector<double> probabilities(const ModelParams& params) const;
  double gp(const ModelParams& params) const;
  double expected_distance(const ModelParams& params) const;
  double objective(const ModelParams& params, double alpha) const;
  /// Gradient of -objective.
  Gradient gradient(const ModelParams& params, double alpha) const;

 private:
  std::vector<double> features_;
  int max_len_;
  std::vector<Caption> captions_;
  std::vector<double> deltas_;
  Eigen::MatrixXd dist_;
};

double exact_gp(std::span<const double> features, std::span<const Caption> refs,
                const ModelParams& params, const DocFreqTable& df, int max_len);
double exact_objective(std::span<const double> features, std::span<const Caption> refs,
                       const ModelParams& params, const DocFreqTable& df, int max_len,
                       double alpha);
Gradient exact_gradient(std::span<const double> features, std::span<const Caption> refs,
                        const ModelParams& params, const DocFreqTable& df, int max_len,
                        double alpha);

/// max_i |sum_y p(y) d log p(y) / d theta_i|; ~0 whenever probabilities are
/// normalised over the enumerated space.
double score_function_identity_check(std::span<const double> features,
                                     const ModelParams& params, RolloutLimits limits);

/// Central differences of f over every parameter.
Gradient finite_difference_gradient(const ModelParams& params,
                                    const std::function<double(const ModelParams&)>& f,
                                    double step = 1e-5);

/// Weights and biases uniform in [-scale, scale]; far from uniform policies,
/// unlike init_params.
ModelParams random_params(const ModelDims& dims, std::uint64_t seed, double scale = 1.0);

struct ExactCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ExactCheckReport {
  int content_vocab = 0;
  int max_len = 0;
  std::uint64_t seed = 0;
  std::vector<ExactCheck> checks;
  bool pass() const;
};

/**
 * Builds a random hidden-8 model over `content_vocab` tokens with random
 * references and runs every enumeration check: normalisation, the score
 * function identity, alpha = 1 objective == GP, finite-difference checks of
 * the exact, NLL and entropy gradients, and Monte-Carlo agreement of the GP
 * and pairwise-distance estimates (3 standard errors over `draws` draws).
 */
ExactCheckReport run_exact_checks(int content_vocab, int max_len, std::uint64_t seed,
                                  int draws = 10000);

nlohmann::json exact_report_to_json(const ExactCheckReport& report);

/// Largest per-group ||a - b|| / max(||a||, ||b||, floor) over parameter groups.
double max_group_relative_error(const Gradient& a, const Gradient& b, double floor = 1e-8);

}  // namespace seqx

#endif  // SEQX_EXACT_ORACLE_HPP
