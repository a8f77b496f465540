// SPDX-License-Identifier: Apache-2.0
#include "seqx/seq_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace seqx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::Map<const VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_features(std::span<const double> features, const ModelDims& dims) {
  if (static_cast<int>(features.size()) != dims.feature_dim) {
    throw ValidationError("feature length " + std::to_string(features.size()) +
                          " does not match feature_dim " +
                          std::to_string(dims.feature_dim));
  }
}

void check_token(TokenId t, int vocab) {
  if (t < 0 || t >= vocab) {
    throw ValidationError("token id out of range: " + std::to_string(t));
  }
}

/// LSTM cell forward, writing activated gates into `gates` (4H).
void lstm_forward(const ModelParams& p, TokenId input, const VectorXd& h_prev,
                  const VectorXd& c_prev, Eigen::Ref<VectorXd> gates,
                  Eigen::Ref<VectorXd> c, Eigen::Ref<VectorXd> tanh_c,
                  Eigen::Ref<VectorXd> h) {
  const int hs = p.dims().hidden;
  gates.noalias() = p.lstm_wx() * p.embed().col(input);
  gates.noalias() += p.lstm_wh() * h_prev;
  gates += p.lstm_b();
  for (int k = 0; k < 3 * hs; ++k) gates[k] = sigmoid(gates[k]);
  for (int k = 3 * hs; k < 4 * hs; ++k) gates[k] = std::tanh(gates[k]);
  const auto i = gates.segment(0, hs);
  const auto f = gates.segment(hs, hs);
  const auto o = gates.segment(2 * hs, hs);
  const auto g = gates.segment(3 * hs, hs);
  c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  tanh_c = c.array().tanh().matrix();
  h = o.cwiseProduct(tanh_c);
}

/// Cached teacher-forced rollout of one caption.
struct Rollout {
  int steps = 0;
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;
  MatrixXd h;       // H x (steps + 1); column 0 is the encoder state
  MatrixXd c;       // H x (steps + 1)
  MatrixXd gates;   // 4H x steps
  MatrixXd tanh_c;  // H x steps
  MatrixXd logp;    // vocab x steps
  bool forced_tail = false;
  std::span<const double> features;

  Rollout(std::span<const double> feats, CaptionView caption,
          const ModelParams& p, RolloutLimits limits)
      : features(feats) {
    const ModelDims& d = p.dims();
    check_features(features, d);
    check_caption(caption, d.vocab, limits.max_len);
    const int len = static_cast<int>(caption.size());
    forced_tail = limits.force_final_eos && len == limits.max_len;
    steps = forced_tail ? len : len + 1;

    inputs.resize(static_cast<std::size_t>(steps));
    targets.resize(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
      inputs[t] = t == 0 ? kBos : caption[t - 1];
      targets[t] = t < len ? caption[t] : kEos;
    }

    const int hs = d.hidden;
    h.resize(hs, steps + 1);
    c.resize(hs, steps + 1);
    gates.resize(4 * hs, steps);
    tanh_c.resize(hs, steps);
    logp.resize(d.vocab, steps);

    VectorXd pre = p.enc_w() * as_vector(features) + p.enc_b();
    h.col(0) = pre.array().tanh().matrix();
    c.col(0).setZero();
    VectorXd h_prev;
    VectorXd c_prev;
    for (int t = 0; t < steps; ++t) {
      h_prev = h.col(t);
      c_prev = c.col(t);
      lstm_forward(p, inputs[t], h_prev, c_prev, gates.col(t), c.col(t + 1),
                   tanh_c.col(t), h.col(t + 1));
      VectorXd logits = p.out_w() * h.col(t + 1) + p.out_b();
      logp.col(t) = masked_log_softmax(logits, StepMask{t != 0});
    }
  }

  double total_logprob() const {
    double s = 0.0;
    for (int t = 0; t < steps; ++t) s += logp(targets[t], t);
    return s;
  }

  static bool masked(TokenId k, int t) { return k == kBos || (t == 0 && k == kEos); }

  /// grad += backprop of the per-step logit gradients `dlogits` (vocab x steps).
  void backward(const ModelParams& p, const MatrixXd& dlogits, Gradient& grad) const {
    const int hs = p.dims().hidden;
    auto g_enc_w = grad.enc_w();
    auto g_enc_b = grad.enc_b();
    auto g_wx = grad.lstm_wx();
    auto g_wh = grad.lstm_wh();
    auto g_b = grad.lstm_b();
    auto g_embed = grad.embed();
    auto g_out_w = grad.out_w();
    auto g_out_b = grad.out_b();

    VectorXd dh_next = VectorXd::Zero(hs);
    VectorXd dc_next = VectorXd::Zero(hs);
    VectorXd dh(hs), dc(hs), dz(4 * hs);
    for (int t = steps - 1; t >= 0; --t) {
      const auto dl = dlogits.col(t);
      g_out_w.noalias() += dl * h.col(t + 1).transpose();
      g_out_b += dl;
      dh.noalias() = p.out_w().transpose() * dl;
      dh += dh_next;

      const auto gt = gates.col(t);
      const auto i = gt.segment(0, hs);
      const auto f = gt.segment(hs, hs);
      const auto o = gt.segment(2 * hs, hs);
      const auto g = gt.segment(3 * hs, hs);
      const auto tc = tanh_c.col(t);

      dc = dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
      dz.segment(0, hs) = dc.cwiseProduct(g).cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
      dz.segment(hs, hs) = dc.cwiseProduct(c.col(t)).cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
      dz.segment(2 * hs, hs) = dh.cwiseProduct(tc).cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));
      dz.segment(3 * hs, hs) = dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());
      dc_next = dc.cwiseProduct(f);

      const TokenId in = inputs[t];
      g_wx.noalias() += dz * p.embed().col(in).transpose();
      g_wh.noalias() += dz * h.col(t).transpose();
      g_b += dz;
      g_embed.col(in).noalias() += p.lstm_wx().transpose() * dz;
      dh_next.noalias() = p.lstm_wh().transpose() * dz;
    }
    // dh_next now holds dL/dh0; h0 = tanh(W x + b).
    VectorXd da = dh_next.cwiseProduct((1.0 - h.col(0).array().square()).matrix());
    g_enc_b += da;
    g_enc_w.noalias() += da * as_vector(features).transpose();
  }
};

}  // namespace

void ModelDims::validate() const {
  if (feature_dim <= 0 || emb_dim <= 0 || hidden <= 0 || vocab <= kFirstContent) {
    throw ValidationError(
        "model dims must be positive and vocab must contain a content token "
        "(feature_dim=" + std::to_string(feature_dim) +
        ", emb_dim=" + std::to_string(emb_dim) + ", hidden=" + std::to_string(hidden) +
        ", vocab=" + std::to_string(vocab) + ")");
  }
}

ModelParams::ModelParams(const ModelDims& dims) : dims_(dims) {
  dims.validate();
  const int hs = dims.hidden;
  const int g4 = 4 * hs;
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    groups_.push_back({std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows) * cols;
  };
  add("encoder_w", hs, dims.feature_dim);
  add("encoder_b", hs, 1);
  add("lstm_wx", g4, dims.emb_dim);
  add("lstm_wh", g4, hs);
  add("lstm_b", g4, 1);
  add("embed", dims.emb_dim, dims.vocab);
  add("output_w", dims.vocab, hs);
  add("output_b", dims.vocab, 1);
  values_.assign(offset, 0.0);
}

const ParamGroup& ModelParams::group(const std::string& name) const {
  for (const ParamGroup& g : groups_) {
    if (g.name == name) return g;
  }
  throw ValidationError("unknown parameter group: " + name);
}

ModelParams::MatMap ModelParams::mat(std::size_t i) {
  const ParamGroup& g = groups_[i];
  return {values_.data() + g.offset, g.rows, g.cols};
}
ModelParams::ConstMatMap ModelParams::mat(std::size_t i) const {
  const ParamGroup& g = groups_[i];
  return {values_.data() + g.offset, g.rows, g.cols};
}
ModelParams::VecMap ModelParams::vec(std::size_t i) {
  const ParamGroup& g = groups_[i];
  return {values_.data() + g.offset, g.rows};
}
ModelParams::ConstVecMap ModelParams::vec(std::size_t i) const {
  const ParamGroup& g = groups_[i];
  return {values_.data() + g.offset, g.rows};
}

void ModelParams::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void ModelParams::add_scaled(const ModelParams& other, double s) {
  if (other.values_.size() != values_.size()) {
    throw ValidationError("parameter shape mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
}

void ModelParams::scale(double factor) {
  for (double& v : values_) v *= factor;
}

double ModelParams::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double ModelParams::dot(const ModelParams& other) const {
  if (other.values_.size() != values_.size()) {
    throw ValidationError("parameter shape mismatch");
  }
  return std::inner_product(values_.begin(), values_.end(), other.values_.begin(), 0.0);
}

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  ModelParams p(dims);
  Rng rng(seed);
  for (const ParamGroup& g : p.groups()) {
    if (g.cols == 1 && g.name.ends_with("_b")) continue;
    for (double& v : p.group_values(g)) v = rng.uniform(-kInitRange, kInitRange);
  }
  return p;
}

DecoderState encode(std::span<const double> features, const ModelParams& params) {
  check_features(features, params.dims());
  VectorXd pre = params.enc_w() * as_vector(features) + params.enc_b();
  return {pre.array().tanh().matrix(), VectorXd::Zero(params.dims().hidden)};
}

StepOutput decode_step(const DecoderState& state, TokenId input,
                       const ModelParams& params) {
  const ModelDims& d = params.dims();
  check_token(input, d.vocab);
  if (state.hidden.size() != d.hidden || state.cell.size() != d.hidden) {
    throw ValidationError("decoder state size does not match hidden size");
  }
  VectorXd gates(4 * d.hidden);
  StepOutput out;
  out.next.cell.resize(d.hidden);
  out.next.hidden.resize(d.hidden);
  VectorXd tanh_c(d.hidden);
  lstm_forward(params, input, state.hidden, state.cell, gates, out.next.cell, tanh_c,
               out.next.hidden);
  out.logits = params.out_w() * out.next.hidden + params.out_b();
  return out;
}

VectorXd masked_log_softmax(const VectorXd& logits, StepMask mask) {
  const auto n = static_cast<TokenId>(logits.size());
  double mx = kNegInf;
  for (TokenId k = 0; k < n; ++k) {
    if (mask.allowed(k)) mx = std::max(mx, logits[k]);
  }
  double sum = 0.0;
  for (TokenId k = 0; k < n; ++k) {
    if (mask.allowed(k)) sum += std::exp(logits[k] - mx);
  }
  const double lse = mx + std::log(sum);
  VectorXd out(n);
  for (TokenId k = 0; k < n; ++k) out[k] = mask.allowed(k) ? logits[k] - lse : kNegInf;
  return out;
}

void check_caption(CaptionView caption, int vocab, int max_len) {
  if (caption.empty()) throw ValidationError("caption must be non-empty");
  if (static_cast<int>(caption.size()) > max_len) {
    throw ValidationError("caption length " + std::to_string(caption.size()) +
                          " exceeds max_len " + std::to_string(max_len));
  }
  for (TokenId t : caption) {
    if (t < kFirstContent || t >= vocab) {
      throw ValidationError("caption token out of content range: " + std::to_string(t));
    }
  }
}

Trace sequence_log_prob(std::span<const double> features, CaptionView caption,
                        const ModelParams& params, RolloutLimits limits) {
  const Rollout r(features, caption, params, limits);
  Trace trace;
  trace.caption.assign(caption.begin(), caption.end());
  for (int t = 0; t < r.steps; ++t) trace.step_logprobs.push_back(r.logp(r.targets[t], t));
  if (r.forced_tail) trace.step_logprobs.push_back(0.0);
  trace.total_logprob = std::accumulate(trace.step_logprobs.begin(),
                                        trace.step_logprobs.end(), 0.0);
  return trace;
}

Trace sample_caption(std::span<const double> features, const ModelParams& params,
                     int max_len, Rng& rng) {
  if (max_len < 1) throw ValidationError("max_len must be >= 1");
  DecoderState state = encode(features, params);
  TokenId input = kBos;
  Trace trace;
  for (int t = 0;; ++t) {
    if (t == max_len) {
      trace.step_logprobs.push_back(0.0);
      break;
    }
    StepOutput step = decode_step(state, input, params);
    const VectorXd logp = masked_log_softmax(step.logits, StepMask{t != 0});
    const double u = rng.uniform();
    double cum = 0.0;
    TokenId chosen = -1;
    for (TokenId k = 0; k < logp.size(); ++k) {
      if (logp[k] == kNegInf) continue;
      chosen = k;
      cum += std::exp(logp[k]);
      if (u < cum) break;
    }
    trace.step_logprobs.push_back(logp[chosen]);
    if (chosen == kEos) break;
    trace.caption.push_back(chosen);
    state = std::move(step.next);
    input = chosen;
  }
  trace.total_logprob = std::accumulate(trace.step_logprobs.begin(),
                                        trace.step_logprobs.end(), 0.0);
  return trace;
}

Caption greedy_decode(std::span<const double> features, const ModelParams& params,
                      int max_len) {
  if (max_len < 1) throw ValidationError("max_len must be >= 1");
  DecoderState state = encode(features, params);
  TokenId input = kBos;
  Caption out;
  for (int t = 0; t < max_len; ++t) {
    StepOutput step = decode_step(state, input, params);
    const VectorXd logp = masked_log_softmax(step.logits, StepMask{t != 0});
    TokenId best = -1;
    for (TokenId k = 0; k < logp.size(); ++k) {
      if (logp[k] == kNegInf) continue;
      if (best < 0 || logp[k] > logp[best]) best = k;
    }
    if (best == kEos) break;
    out.push_back(best);
    state = std::move(step.next);
    input = best;
  }
  return out;
}

std::vector<Hypothesis> beam_search(std::span<const double> features,
                                    const ModelParams& params, int width,
                                    int max_len) {
  if (width < 1) throw ValidationError("beam width must be >= 1");
  if (max_len < 1) throw ValidationError("max_len must be >= 1");

  struct Live {
    Caption caption;
    double logprob;
    DecoderState state;
  };
  struct Candidate {
    double logprob;
    std::size_t parent;
    TokenId token;
  };

  std::vector<Live> live{{Caption{}, 0.0, encode(features, params)}};
  std::vector<Hypothesis> finished;

  for (int t = 0; !live.empty() && static_cast<int>(finished.size()) < width; ++t) {
    const int slots = width - static_cast<int>(finished.size());
    if (t == max_len) {
      // Forced EOS: remaining hypotheses complete with log-prob unchanged.
      for (int i = 0; i < slots && i < static_cast<int>(live.size()); ++i) {
        finished.push_back({std::move(live[i].caption), live[i].logprob});
      }
      break;
    }
    std::vector<Candidate> cands;
    std::vector<DecoderState> next_states(live.size());
    for (std::size_t b = 0; b < live.size(); ++b) {
      const TokenId input = t == 0 ? kBos : live[b].caption.back();
      StepOutput step = decode_step(live[b].state, input, params);
      const VectorXd logp = masked_log_softmax(step.logits, StepMask{t != 0});
      for (TokenId k = 0; k < logp.size(); ++k) {
        if (logp[k] != kNegInf) cands.push_back({live[b].logprob + logp[k], b, k});
      }
      next_states[b] = std::move(step.next);
    }
    // Candidates are generated in (parent, token) order, so a stable sort
    // breaks ties towards better parents and lower token ids.
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.logprob > b.logprob; });
    if (static_cast<int>(cands.size()) > slots) cands.resize(static_cast<std::size_t>(slots));

    std::vector<Live> next;
    for (const Candidate& c : cands) {
      const Live& parent = live[c.parent];
      if (c.token == kEos) {
        finished.push_back({parent.caption, c.logprob});
      } else {
        Caption cap = parent.caption;
        cap.push_back(c.token);
        next.push_back({std::move(cap), c.logprob, next_states[c.parent]});
      }
    }
    live = std::move(next);
  }

  std::stable_sort(finished.begin(), finished.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.logprob > b.logprob; });
  return finished;
}

double accumulate_weighted_nll(std::span<const NllItem> items,
                               const ModelParams& params, RolloutLimits limits,
                               Gradient& grad) {
  double loss = 0.0;
  for (const NllItem& item : items) {
    const Rollout r(item.features, item.caption, params, limits);
    loss -= item.weight * r.total_logprob();
    if (item.weight == 0.0) continue;
    MatrixXd dlogits = MatrixXd::Zero(params.dims().vocab, r.steps);
    for (int t = 0; t < r.steps; ++t) {
      for (TokenId k = 0; k < params.dims().vocab; ++k) {
        if (!Rollout::masked(k, t)) dlogits(k, t) = item.weight * std::exp(r.logp(k, t));
      }
      dlogits(r.targets[t], t) -= item.weight;
    }
    r.backward(params, dlogits, grad);
  }
  return loss;
}

LossAndGradient weighted_nll_grad(std::span<const NllItem> items,
                                  const ModelParams& params, RolloutLimits limits) {
  LossAndGradient out{0.0, Gradient(params.dims())};
  out.loss = accumulate_weighted_nll(items, params, limits, out.gradient);
  return out;
}

namespace {

double step_entropies(const Rollout& r, int vocab, std::vector<double>* entropies,
                      MatrixXd* dlogits, double scale) {
  double sum = 0.0;
  const double per_step = scale / r.steps;
  for (int t = 0; t < r.steps; ++t) {
    double h = 0.0;
    for (TokenId k = 0; k < vocab; ++k) {
      if (Rollout::masked(k, t)) continue;
      const double lp = r.logp(k, t);
      h -= std::exp(lp) * lp;
    }
    if (entropies) entropies->push_back(h);
    sum += h;
    if (dlogits) {
      for (TokenId k = 0; k < vocab; ++k) {
        if (Rollout::masked(k, t)) continue;
        const double lp = r.logp(k, t);
        (*dlogits)(k, t) = -per_step * std::exp(lp) * (lp + h);
      }
    }
  }
  return sum / r.steps;
}

}  // namespace

double accumulate_mean_entropy(std::span<const double> features,
                               CaptionView caption, const ModelParams& params,
                               RolloutLimits limits, double scale, Gradient& grad) {
  const Rollout r(features, caption, params, limits);
  MatrixXd dlogits = MatrixXd::Zero(params.dims().vocab, r.steps);
  const double mean = step_entropies(r, params.dims().vocab, nullptr, &dlogits, scale);
  if (scale != 0.0) {
    r.backward(params, dlogits, grad);
  }
  return mean;
}

EntropyResult step_entropy(std::span<const double> features, CaptionView caption,
                           const ModelParams& params, RolloutLimits limits) {
  const Rollout r(features, caption, params, limits);
  EntropyResult out{{}, 0.0, Gradient(params.dims())};
  MatrixXd dlogits = MatrixXd::Zero(params.dims().vocab, r.steps);
  out.mean = step_entropies(r, params.dims().vocab, &out.entropies, &dlogits, 1.0);
  r.backward(params, dlogits, out.mean_gradient);
  return out;
}

}  // namespace seqx
