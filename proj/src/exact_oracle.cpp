// SPDX-License-Identifier: Apache-2.0
#include "seqx/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace seqx {

namespace {

void enumerate_from(Caption& prefix, int content_vocab, int max_len,
                    std::vector<Caption>& out) {
  for (int v = 0; v < content_vocab; ++v) {
    prefix.push_back(kFirstContent + v);
    out.push_back(prefix);
    if (static_cast<int>(prefix.size()) < max_len) {
      enumerate_from(prefix, content_vocab, max_len, out);
    }
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Caption> enumerate_captions(int content_vocab, int max_len) {
  if (content_vocab < 1 || max_len < 1) {
    throw ValidationError("enumeration needs content_vocab >= 1 and max_len >= 1");
  }
  if (std::pow(static_cast<double>(content_vocab), max_len) > kMaxEnumeratedCaptions) {
    throw ValidationError("caption space too large to enumerate: " +
                          std::to_string(content_vocab) + "^" + std::to_string(max_len));
  }
  std::vector<Caption> out;
  Caption prefix;
  enumerate_from(prefix, content_vocab, max_len, out);
  return out;
}

double EnumeratedSpace::total_probability() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

EnumeratedSpace enumerate_space(std::span<const double> features, const ModelParams& params,
                                RolloutLimits limits) {
  EnumeratedSpace space;
  space.captions = enumerate_captions(params.dims().vocab - kFirstContent, limits.max_len);
  space.probabilities.reserve(space.captions.size());
  for (const Caption& c : space.captions) {
    space.probabilities.push_back(
        std::exp(sequence_log_prob(features, c, params, limits).total_logprob));
  }
  return space;
}

ExactProblem::ExactProblem(std::vector<double> features, std::span<const Caption> refs,
                           const DocFreqTable& df, int content_vocab, int max_len)
    : features_(std::move(features)),
      max_len_(max_len),
      captions_(enumerate_captions(content_vocab, max_len)) {
  const CiderReferences scorer(refs, df);
  std::vector<NGramTable> tables;
  tables.reserve(captions_.size());
  for (const Caption& c : captions_) {
    deltas_.push_back(scorer.score(c));
    tables.push_back(NGramTable::of(c));
  }
  const auto n = static_cast<Eigen::Index>(captions_.size());
  dist_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = syntactic_distance(tables[i], tables[j]);
      dist_(i, j) = d;
      dist_(j, i) = d;
    }
  }
}

std::vector<double> ExactProblem::probabilities(const ModelParams& params) const {
  if (params.dims().vocab - kFirstContent < 1) throw ValidationError("empty content vocab");
  std::vector<double> p;
  p.reserve(captions_.size());
  for (const Caption& c : captions_) {
    p.push_back(std::exp(sequence_log_prob(features_, c, params, {max_len_, true}).total_logprob));
  }
  return p;
}

double ExactProblem::gp(const ModelParams& params) const {
  const std::vector<double> p = probabilities(params);
  return std::inner_product(deltas_.begin(), deltas_.end(), p.begin(), 0.0);
}

double ExactProblem::expected_distance(const ModelParams& params) const {
  const std::vector<double> p = probabilities(params);
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
  return pv.dot(dist_ * pv);
}

double ExactProblem::objective(const ModelParams& params, double alpha) const {
  const std::vector<double> p = probabilities(params);
  const double gp_value = std::inner_product(deltas_.begin(), deltas_.end(), p.begin(), 0.0);
  if (alpha == 1.0) return gp_value;
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
  return alpha * gp_value + (1.0 - alpha) * pv.dot(dist_ * pv);
}

Gradient ExactProblem::gradient(const ModelParams& params, double alpha) const {
  const std::vector<double> p = probabilities(params);
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
  const Eigen::VectorXd expected_d = dist_ * pv;  // D(y)
  std::vector<NllItem> items;
  items.reserve(captions_.size());
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    const double w = p[i] * (alpha * deltas_[i] + (1.0 - alpha) * 2.0 * expected_d[i]);
    items.push_back({features_, captions_[i], w});
  }
  return weighted_nll_grad(items, params, {max_len_, true}).gradient;
}

double exact_gp(std::span<const double> features, std::span<const Caption> refs,
                const ModelParams& params, const DocFreqTable& df, int max_len) {
  return ExactProblem({features.begin(), features.end()}, refs, df,
                      params.dims().vocab - kFirstContent, max_len)
      .gp(params);
}

double exact_objective(std::span<const double> features, std::span<const Caption> refs,
                       const ModelParams& params, const DocFreqTable& df, int max_len,
                       double alpha) {
  return ExactProblem({features.begin(), features.end()}, refs, df,
                      params.dims().vocab - kFirstContent, max_len)
      .objective(params, alpha);
}

Gradient exact_gradient(std::span<const double> features, std::span<const Caption> refs,
                        const ModelParams& params, const DocFreqTable& df, int max_len,
                        double alpha) {
  return ExactProblem({features.begin(), features.end()}, refs, df,
                      params.dims().vocab - kFirstContent, max_len)
      .gradient(params, alpha);
}

double score_function_identity_check(std::span<const double> features,
                                     const ModelParams& params, RolloutLimits limits) {
  const EnumeratedSpace space = enumerate_space(features, params, limits);
  std::vector<NllItem> items;
  items.reserve(space.captions.size());
  for (std::size_t i = 0; i < space.captions.size(); ++i) {
    items.push_back({features, space.captions[i], space.probabilities[i]});
  }
  const Gradient g = weighted_nll_grad(items, params, limits).gradient;
  double worst = 0.0;
  for (double v : g.values()) worst = std::max(worst, std::abs(v));
  return worst;
}

Gradient finite_difference_gradient(const ModelParams& params,
                                    const std::function<double(const ModelParams&)>& f,
                                    double step) {
  ModelParams probe = params;
  Gradient g(params.dims());
  auto pv = probe.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double orig = pv[i];
    pv[i] = orig + step;
    const double up = f(probe);
    pv[i] = orig - step;
    const double down = f(probe);
    pv[i] = orig;
    gv[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double max_group_relative_error(const Gradient& a, const Gradient& b, double floor) {
  double worst = 0.0;
  for (const ParamGroup& g : a.groups()) {
    const auto av = a.group_values(g);
    const auto bv = b.group_values(g);
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
      diff += (av[i] - bv[i]) * (av[i] - bv[i]);
      na += av[i] * av[i];
      nb += bv[i] * bv[i];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nb), floor});
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

}  // namespace seqx
