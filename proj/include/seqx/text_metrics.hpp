// SPDX-License-Identifier: Apache-2.0
/**
 * @file text_metrics.hpp
 * @brief Pairwise caption scores: BLEU-n, CIDEr-D, token edit distance, and
 *        the semantic score / syntactic distance pair used by the trainer.
 *
 * All functions are pure. DocFreqTable is immutable once built.
 */
#ifndef SEQX_TEXT_METRICS_HPP
#define SEQX_TEXT_METRICS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "seqx/types.hpp"

namespace seqx {

inline constexpr int kMaxNGramOrder = 4;

/// Packs up to four token ids (16 bits each) into one key.
using NGramKey = std::uint64_t;

struct NGramCount {
  NGramKey key;
  int count;
  friend bool operator==(const NGramCount&, const NGramCount&) = default;
};

/// Sorted by key, keys unique, counts >= 1.
using NGramCounts = std::vector<NGramCount>;

NGramKey pack_ngram(CaptionView window);
std::vector<TokenId> unpack_ngram(NGramKey key, int n);

/// All contiguous n-token windows with multiplicity; empty when len < n.
NGramCounts extract_ngrams(CaptionView caption, int n);

/// N-gram counts of one caption for orders 1..4.
struct NGramTable {
  std::array<NGramCounts, kMaxNGramOrder> orders;
  int length = 0;

  static NGramTable of(CaptionView caption);
  const NGramCounts& at(int n) const { return orders[n - 1]; }
};

/**
 * Sentence-level BLEU with clipped counts and brevity penalty
 * min(1, exp(1 - r/c)), r the closest reference length (shorter on ties).
 * Orders n >= 2 use add-one smoothing on numerator and denominator.
 * Empty candidate scores 0.
 */
double sentence_bleu(CaptionView candidate, std::span<const Caption> references,
                     int max_order);

/// Same as above over precomputed tables.
double sentence_bleu(const NGramTable& candidate,
                     std::span<const NGramTable> references, int max_order);

/// Document frequencies of n-grams over a corpus of reference sets.
class DocFreqTable {
 public:
  DocFreqTable() = default;

  int corpus_size() const { return corpus_size_; }
  /// Number of reference sets containing the n-gram; 0 when absent.
  int frequency(int n, NGramKey key) const;
  std::size_t distinct(int n) const { return freq_[n - 1].size(); }

  const std::unordered_map<NGramKey, int>& order(int n) const {
    return freq_[n - 1];
  }

 private:
  friend DocFreqTable build_doc_freq(
      std::span<const std::vector<Caption>> corpus);

  std::array<std::unordered_map<NGramKey, int>, kMaxNGramOrder> freq_;
  int corpus_size_ = 0;
};

DocFreqTable build_doc_freq(std::span<const std::vector<Caption>> corpus);

inline constexpr double kCiderSigma = 6.0;

/**
 * TF-IDF vectors of a fixed reference set. Scoring many candidates against
 * the same references (the trainer's inner loop) reuses these.
 */
class CiderReferences {
 public:
  CiderReferences(std::span<const Caption> references, const DocFreqTable& df);

  /// CIDEr-D on unit scale.
  double score(CaptionView candidate) const;

 private:
  struct Vec {
    std::vector<std::pair<NGramKey, double>> entries;  // sorted by key
    double norm = 0.0;
  };
  struct Doc {
    std::array<Vec, kMaxNGramOrder> orders;
    int length = 0;
  };

  Doc vectorize(CaptionView caption) const;

  const DocFreqTable* df_;
  double log_corpus_;
  std::vector<Doc> refs_;
};

/// CIDEr-D (clipped TF-IDF cosine, Gaussian length penalty sigma = 6),
/// averaged over references and orders 1..4; no x10 factor.
double cider_d(CaptionView candidate, std::span<const Caption> references,
               const DocFreqTable& df);

/// Token-level Levenshtein distance.
int edit_distance(CaptionView a, CaptionView b);

/// 1 - mean of BLEU3/BLEU4 in both directions. Symmetric, zero on equal
/// captions.
double syntactic_distance(CaptionView a, CaptionView b);
double syntactic_distance(const NGramTable& a, const NGramTable& b);

/// The relaxed membership score of a caption in a reference set (CIDEr-D).
inline double semantic_delta(CaptionView caption,
                             std::span<const Caption> references,
                             const DocFreqTable& df) {
  return cider_d(caption, references, df);
}

}  // namespace seqx

#endif  // SEQX_TEXT_METRICS_HPP
