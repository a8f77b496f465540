// SPDX-License-Identifier: Apache-2.0
#ifndef SEQX_VOCAB_HPP
#define SEQX_VOCAB_HPP

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqx/types.hpp"

namespace seqx {

/// Lowercase, whitespace split.
std::vector<std::string> tokenize(std::string_view text);

/**
 * Token table with BOS at id 0 and EOS at id 1; content tokens follow in
 * sorted order so construction is deterministic.
 */
class Vocab {
 public:
  static constexpr std::string_view kBosToken = "<bos>";
  static constexpr std::string_view kEosToken = "<eos>";

  Vocab();
  /// Builds from raw sentences (tokenized internally).
  static Vocab from_sentences(std::span<const std::string> sentences);
  /// Builds from an explicit token list that starts with the two markers.
  static Vocab from_tokens(std::vector<std::string> tokens);
  /// Content tokens named "w0", "w1", ... (oracle and test fixtures).
  static Vocab synthetic(int content_size);

  int size() const { return static_cast<int>(tokens_.size()); }
  int content_size() const { return size() - kFirstContent; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const;

  bool contains(std::string_view token) const;
  TokenId id(std::string_view token) const;

  /// Throws ValidationError on out-of-vocabulary tokens or empty text.
  Caption encode(std::string_view sentence) const;
  std::string decode(CaptionView caption) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> lookup_;
};

}  // namespace seqx

#endif  // SEQX_VOCAB_HPP
