// SPDX-License-Identifier: Apache-2.0
#include "seqx/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace seqx {

namespace {

constexpr int kBitsPerToken = 16;
constexpr NGramKey kTokenMask = (NGramKey{1} << kBitsPerToken) - 1;

void check_order(int n) {
  if (n < 1 || n > kMaxNGramOrder) {
    throw ValidationError("n-gram order must be in 1..4, got " +
                          std::to_string(n));
  }
}

int lookup(const NGramCounts& counts, NGramKey key) {
  auto it = std::lower_bound(
      counts.begin(), counts.end(), key,
      [](const NGramCount& c, NGramKey k) { return c.key < k; });
  return (it != counts.end() && it->key == key) ? it->count : 0;
}

}  // namespace

NGramKey pack_ngram(CaptionView window) {
  NGramKey key = 0;
  for (TokenId t : window) {
    if (t < 0 || static_cast<NGramKey>(t) > kTokenMask) {
      throw ValidationError("token id out of packable range: " +
                            std::to_string(t));
    }
    key = (key << kBitsPerToken) | static_cast<NGramKey>(t);
  }
  return key;
}

std::vector<TokenId> unpack_ngram(NGramKey key, int n) {
  std::vector<TokenId> out(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<TokenId>(key & kTokenMask);
    key >>= kBitsPerToken;
  }
  return out;
}

NGramCounts extract_ngrams(CaptionView caption, int n) {
  check_order(n);
  const int len = static_cast<int>(caption.size());
  if (len < n) return {};
  std::vector<NGramKey> keys;
  keys.reserve(static_cast<std::size_t>(len - n + 1));
  for (int i = 0; i + n <= len; ++i) {
    keys.push_back(pack_ngram(caption.subspan(static_cast<std::size_t>(i),
                                              static_cast<std::size_t>(n))));
  }
  std::sort(keys.begin(), keys.end());
  NGramCounts out;
  for (NGramKey k : keys) {
    if (!out.empty() && out.back().key == k) {
      ++out.back().count;
    } else {
      out.push_back({k, 1});
    }
  }
  return out;
}

NGramTable NGramTable::of(CaptionView caption) {
  NGramTable t;
  t.length = static_cast<int>(caption.size());
  for (int n = 1; n <= kMaxNGramOrder; ++n) t.orders[n - 1] = extract_ngrams(caption, n);
  return t;
}

double sentence_bleu(const NGramTable& candidate,
                     std::span<const NGramTable> references, int max_order) {
  check_order(max_order);
  if (references.empty()) {
    throw ValidationError("sentence_bleu needs at least one reference");
  }
  const int c = candidate.length;
  if (c == 0) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    int matched = 0;
    for (const NGramCount& g : candidate.at(n)) {
      int best = 0;
      for (const NGramTable& ref : references) {
        best = std::max(best, lookup(ref.at(n), g.key));
      }
      matched += std::min(g.count, best);
    }
    const int total = std::max(0, c - n + 1);
    if (n == 1) {
      if (matched == 0) return 0.0;
      log_sum += std::log(static_cast<double>(matched) / total);
    } else {
      log_sum += std::log((matched + 1.0) / (total + 1.0));
    }
  }

  int closest = references.front().length;
  for (const NGramTable& ref : references) {
    const int d = std::abs(ref.length - c);
    const int best_d = std::abs(closest - c);
    if (d < best_d || (d == best_d && ref.length < closest)) closest = ref.length;
  }
  const double bp = std::min(1.0, std::exp(1.0 - static_cast<double>(closest) / c));
  return bp * std::exp(log_sum / max_order);
}

double sentence_bleu(CaptionView candidate, std::span<const Caption> references,
                     int max_order) {
  std::vector<NGramTable> refs;
  refs.reserve(references.size());
  for (const Caption& r : references) refs.push_back(NGramTable::of(r));
  return sentence_bleu(NGramTable::of(candidate), refs, max_order);
}

int DocFreqTable::frequency(int n, NGramKey key) const {
  check_order(n);
  auto it = freq_[n - 1].find(key);
  return it == freq_[n - 1].end() ? 0 : it->second;
}

DocFreqTable build_doc_freq(std::span<const std::vector<Caption>> corpus) {
  DocFreqTable df;
  df.corpus_size_ = static_cast<int>(corpus.size());
  for (const std::vector<Caption>& ref_set : corpus) {
    for (int n = 1; n <= kMaxNGramOrder; ++n) {
      std::vector<NGramKey> present;
      for (const Caption& r : ref_set) {
        for (const NGramCount& g : extract_ngrams(r, n)) present.push_back(g.key);
      }
      std::sort(present.begin(), present.end());
      present.erase(std::unique(present.begin(), present.end()), present.end());
      for (NGramKey k : present) ++df.freq_[n - 1][k];
    }
  }
  return df;
}

CiderReferences::CiderReferences(std::span<const Caption> references,
                                 const DocFreqTable& df)
    : df_(&df),
      log_corpus_(std::log(static_cast<double>(std::max(1, df.corpus_size())))) {
  if (references.empty()) {
    throw ValidationError("CIDEr-D needs at least one reference");
  }
  refs_.reserve(references.size());
  for (const Caption& r : references) refs_.push_back(vectorize(r));
}

CiderReferences::Doc CiderReferences::vectorize(CaptionView caption) const {
  Doc doc;
  doc.length = static_cast<int>(caption.size());
  for (int n = 1; n <= kMaxNGramOrder; ++n) {
    Vec& v = doc.orders[n - 1];
    double sq = 0.0;
    for (const NGramCount& g : extract_ngrams(caption, n)) {
      const double idf =
          log_corpus_ - std::log(std::max(1.0, static_cast<double>(df_->frequency(n, g.key))));
      const double w = g.count * idf;
      v.entries.emplace_back(g.key, w);
      sq += w * w;
    }
    v.norm = std::sqrt(sq);
  }
  return doc;
}

double CiderReferences::score(CaptionView candidate) const {
  const Doc cand = vectorize(candidate);
  double total = 0.0;
  for (int n = 0; n < kMaxNGramOrder; ++n) {
    const Vec& cv = cand.orders[n];
    double order_sum = 0.0;
    for (const Doc& ref : refs_) {
      const Vec& rv = ref.orders[n];
      if (cv.norm == 0.0 || rv.norm == 0.0) continue;
      double dot = 0.0;
      auto a = cv.entries.begin();
      auto b = rv.entries.begin();
      while (a != cv.entries.end() && b != rv.entries.end()) {
        if (a->first < b->first) {
          ++a;
        } else if (b->first < a->first) {
          ++b;
        } else {
          dot += std::min(a->second, b->second) * b->second;
          ++a;
          ++b;
        }
      }
      const double delta = static_cast<double>(cand.length - ref.length);
      const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
      order_sum += penalty * dot / (cv.norm * rv.norm);
    }
    total += order_sum / static_cast<double>(refs_.size());
  }
  return total / kMaxNGramOrder;
}

double cider_d(CaptionView candidate, std::span<const Caption> references,
               const DocFreqTable& df) {
  return CiderReferences(references, df).score(candidate);
}

int edit_distance(CaptionView a, CaptionView b) {
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      const int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

double syntactic_distance(const NGramTable& a, const NGramTable& b) {
  const std::span<const NGramTable> ra(&a, 1);
  const std::span<const NGramTable> rb(&b, 1);
  const double sim = (sentence_bleu(a, rb, 3) + sentence_bleu(b, ra, 3)) +
                     (sentence_bleu(a, rb, 4) + sentence_bleu(b, ra, 4));
  return 1.0 - 0.25 * sim;
}

double syntactic_distance(CaptionView a, CaptionView b) {
  return syntactic_distance(NGramTable::of(a), NGramTable::of(b));
}

}  // namespace seqx
