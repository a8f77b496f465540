// SPDX-License-Identifier: Apache-2.0
#ifndef SEQX_CORPUS_HPP
#define SEQX_CORPUS_HPP

#include <string>
#include <vector>

#include "seqx/types.hpp"

namespace seqx {

/// One encoded input with its reference captions.
struct Instance {
  std::string id;
  std::vector<double> features;
  std::vector<Caption> refs;
};

using Corpus = std::vector<Instance>;

/// Reference sets of a corpus, in order (document-frequency input).
inline std::vector<std::vector<Caption>> reference_sets(const Corpus& corpus) {
  std::vector<std::vector<Caption>> out;
  out.reserve(corpus.size());
  for (const Instance& inst : corpus) out.push_back(inst.refs);
  return out;
}

}  // namespace seqx

#endif  // SEQX_CORPUS_HPP
