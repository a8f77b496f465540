// SPDX-License-Identifier: Apache-2.0
#include "seqx/diversity_metrics.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "seqx/text_metrics.hpp"

namespace seqx {

void check_caption_set(std::span<const Caption> set) {
  if (set.size() < 2) {
    throw ValidationError("caption set needs at least 2 captions, got " +
                          std::to_string(set.size()));
  }
}

double div_n(std::span<const Caption> set, int n) {
  check_caption_set(set);
  if (n != 1 && n != 2) throw ValidationError("div_n supports n = 1 or 2");
  std::vector<NGramKey> distinct;
  std::size_t words = 0;
  for (const Caption& c : set) {
    words += c.size();
    for (const NGramCount& g : extract_ngrams(c, n)) distinct.push_back(g.key);
  }
  if (words == 0) return 0.0;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return static_cast<double>(distinct.size()) / static_cast<double>(words);
}

double mbleu(std::span<const Caption> set, int order) {
  check_caption_set(set);
  std::vector<NGramTable> tables;
  tables.reserve(set.size());
  for (const Caption& c : set) tables.push_back(NGramTable::of(c));

  double sum = 0.0;
  std::vector<NGramTable> rest;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    rest.clear();
    for (std::size_t j = 0; j < tables.size(); ++j) {
      if (j != i) rest.push_back(tables[j]);
    }
    sum += sentence_bleu(tables[i], rest, order);
  }
  return sum / static_cast<double>(set.size());
}

DiversityReport diversity_report(std::span<const Caption> set) {
  return {div_n(set, 1), div_n(set, 2), mbleu(set, 4)};
}

}  // namespace seqx
