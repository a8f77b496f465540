// SPDX-License-Identifier: Apache-2.0
#include "seqx/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace seqx {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocab::Vocab() : tokens_{std::string(kBosToken), std::string(kEosToken)} { index(); }

Vocab Vocab::from_sentences(std::span<const std::string> sentences) {
  std::set<std::string> words;
  for (const std::string& s : sentences) {
    for (std::string& w : tokenize(s)) words.insert(std::move(w));
  }
  std::vector<std::string> tokens{std::string(kBosToken), std::string(kEosToken)};
  for (const std::string& w : words) {
    if (w == kBosToken || w == kEosToken) {
      throw ValidationError("reserved marker used as a word: " + w);
    }
    tokens.push_back(w);
  }
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kBos] != kBosToken || tokens[kEos] != kEosToken) {
    throw ValidationError("vocabulary must start with <bos>, <eos>");
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.index();
  if (v.lookup_.size() != v.tokens_.size()) {
    throw ValidationError("vocabulary contains duplicate tokens");
  }
  return v;
}

Vocab Vocab::synthetic(int content_size) {
  if (content_size < 1) throw ValidationError("content vocabulary must be non-empty");
  std::vector<std::string> tokens{std::string(kBosToken), std::string(kEosToken)};
  for (int i = 0; i < content_size; ++i) tokens.push_back("w" + std::to_string(i));
  return from_tokens(std::move(tokens));
}

void Vocab::index() {
  lookup_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    lookup_.emplace(tokens_[i], static_cast<TokenId>(i));
  }
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw ValidationError("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
  return lookup_.find(std::string(token)) != lookup_.end();
}

TokenId Vocab::id(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) {
    throw ValidationError("out-of-vocabulary token: " + std::string(token));
  }
  return it->second;
}

Caption Vocab::encode(std::string_view sentence) const {
  Caption out;
  for (const std::string& w : tokenize(sentence)) {
    const TokenId t = id(w);
    if (t < kFirstContent) throw ValidationError("marker token inside caption");
    out.push_back(t);
  }
  if (out.empty()) throw ValidationError("empty caption");
  return out;
}

std::string Vocab::decode(CaptionView caption) const {
  std::ostringstream os;
  for (std::size_t i = 0; i < caption.size(); ++i) {
    if (i) os << ' ';
    os << token(caption[i]);
  }
  return os.str();
}

}  // namespace seqx
