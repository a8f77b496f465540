// SPDX-License-Identifier: Apache-2.0
// Hand-rolled random generators for property tests.
#ifndef SEQX_TESTS_GENERATORS_HPP
#define SEQX_TESTS_GENERATORS_HPP

#include <vector>

#include "seqx/rng.hpp"
#include "seqx/seq_model.hpp"
#include "seqx/types.hpp"

namespace gen {

inline seqx::Caption caption(seqx::Rng& rng, int content_vocab, int min_len, int max_len) {
  const int len = min_len + static_cast<int>(rng.below(max_len - min_len + 1));
  seqx::Caption c(len);
  for (auto& t : c) t = seqx::kFirstContent + static_cast<int>(rng.below(content_vocab));
  return c;
}

inline std::vector<seqx::Caption> captions(seqx::Rng& rng, int count, int content_vocab,
                                           int min_len, int max_len) {
  std::vector<seqx::Caption> out;
  for (int i = 0; i < count; ++i) out.push_back(caption(rng, content_vocab, min_len, max_len));
  return out;
}

inline std::vector<double> features(seqx::Rng& rng, int dim) {
  std::vector<double> f(dim);
  for (double& v : f) v = rng.normal();
  return f;
}

inline std::vector<int> as_ints(const seqx::Caption& c) { return {c.begin(), c.end()}; }

inline std::vector<std::vector<int>> as_ints(const std::vector<seqx::Caption>& cs) {
  std::vector<std::vector<int>> out;
  for (const auto& c : cs) out.push_back(as_ints(c));
  return out;
}

inline seqx::ModelDims tiny_dims(int content_vocab, int hidden = 8) {
  return {4, 4, hidden, content_vocab + seqx::kFirstContent};
}

}  // namespace gen

#endif  // SEQX_TESTS_GENERATORS_HPP
