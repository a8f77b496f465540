// SPDX-License-Identifier: Apache-2.0
#include "seqx/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <thread>

#include "seqx/diversity_metrics.hpp"
#include "seqx/rng.hpp"
#include "seqx/text_metrics.hpp"

namespace seqx {

std::string strategy_name(DecodeStrategy s) {
  return s == DecodeStrategy::kRandomSampling ? "rs" : "bs";
}

DecodeStrategy parse_strategy(std::string_view name) {
  if (name == "rs") return DecodeStrategy::kRandomSampling;
  if (name == "bs") return DecodeStrategy::kBeamSearch;
  throw ValidationError("strategy must be rs or bs, got " + std::string(name));
}

nlohmann::json report_to_json(const EvalReport& r) {
  return {{"strategy", strategy_name(r.strategy)},
          {"mean_cider", r.mean_cider},
          {"div1", r.div1},
          {"div2", r.div2},
          {"mbleu4", r.mbleu4},
          {"num_inputs", r.num_inputs},
          {"padded_beams", r.padded_beams}};
}

DecodedSet decode_set(const ModelParams& params, const Instance& instance,
                      DecodeStrategy strategy, int k, std::uint64_t seed, int max_len) {
  if (k < 2) throw ValidationError("evaluation needs at least 2 captions per input");
  DecodedSet out;
  if (strategy == DecodeStrategy::kRandomSampling) {
    Rng rng(derive_seed(seed, stable_hash(instance.id)));
    for (int j = 0; j < k; ++j) {
      out.captions.push_back(sample_caption(instance.features, params, max_len, rng).caption);
    }
  } else {
    for (Hypothesis& h : beam_search(instance.features, params, k, max_len)) {
      out.captions.push_back(std::move(h.caption));
    }
    if (static_cast<int>(out.captions.size()) < k) {
      out.padded = true;
      const Caption best = out.captions.front();
      out.captions.resize(static_cast<std::size_t>(k), best);
    }
  }
  return out;
}

int evaluation_threads() {
  if (const char* env = std::getenv("SEQX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EvalReport evaluate_model(const ModelParams& params, const Corpus& corpus,
                          DecodeStrategy strategy, int k, std::uint64_t seed, int max_len,
                          int threads) {
  EvalReport report;
  report.strategy = strategy;
  report.num_inputs = static_cast<int>(corpus.size());
  if (corpus.empty()) return report;

  const auto sets = reference_sets(corpus);
  const DocFreqTable df = build_doc_freq(sets);

  struct PerInput {
    double cider = 0.0;
    DiversityReport diversity;
    bool padded = false;
  };
  std::vector<PerInput> results(corpus.size());
  const auto n_threads = static_cast<std::size_t>(
      std::clamp(threads, 1, static_cast<int>(corpus.size())));
  std::vector<std::exception_ptr> errors(n_threads);
  auto run_slice = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < corpus.size(); i += stride) {
      const DecodedSet set = decode_set(params, corpus[i], strategy, k, seed, max_len);
      const CiderReferences scorer(corpus[i].refs, df);
      double sum = 0.0;
      for (const Caption& c : set.captions) sum += scorer.score(c);
      results[i] = {sum / static_cast<double>(set.captions.size()),
                    diversity_report(set.captions), set.padded};
    }
  };

  auto work = [&](std::size_t begin, std::size_t stride) {
    try {
      run_slice(begin, stride);
    } catch (...) {
      errors[begin] = std::current_exception();
    }
  };

  if (n_threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const PerInput& r : results) {
    report.mean_cider += r.cider;
    report.div1 += r.diversity.div1;
    report.div2 += r.diversity.div2;
    report.mbleu4 += r.diversity.mbleu4;
    report.padded_beams += r.padded ? 1 : 0;
  }
  const double n = static_cast<double>(corpus.size());
  report.mean_cider /= n;
  report.div1 /= n;
  report.div2 /= n;
  report.mbleu4 /= n;
  return report;
}

}  // namespace seqx
