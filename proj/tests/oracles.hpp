// SPDX-License-Identifier: Apache-2.0
// Brute-force metric reimplementations used as test oracles. They share no
// code with the library: n-grams are std::vector keys in std::map.
#ifndef SEQX_TESTS_ORACLES_HPP
#define SEQX_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using Seq = std::vector<int>;
using Gram = std::vector<int>;
using Counts = std::map<Gram, int>;

inline Counts ngrams(const Seq& s, int n) {
  Counts out;
  for (int i = 0; i + n <= static_cast<int>(s.size()); ++i) {
    ++out[Gram(s.begin() + i, s.begin() + i + n)];
  }
  return out;
}

inline double bleu(const Seq& cand, const std::vector<Seq>& refs, int order) {
  if (cand.empty()) return 0.0;
  const int c = static_cast<int>(cand.size());
  double logp = 0.0;
  for (int n = 1; n <= order; ++n) {
    Counts cc = ngrams(cand, n);
    int clipped = 0;
    for (auto& [g, k] : cc) {
      int mx = 0;
      for (const Seq& r : refs) {
        Counts rc = ngrams(r, n);
        auto it = rc.find(g);
        if (it != rc.end()) mx = std::max(mx, it->second);
      }
      clipped += std::min(k, mx);
    }
    int total = c - n + 1;
    if (total < 0) total = 0;
    if (n == 1) {
      if (clipped == 0) return 0.0;
      logp += std::log(double(clipped) / total);
    } else {
      logp += std::log((clipped + 1.0) / (total + 1.0));
    }
  }
  int r = -1;
  for (const Seq& ref : refs) {
    int len = static_cast<int>(ref.size());
    if (r < 0 || std::abs(len - c) < std::abs(r - c) ||
        (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  double bp = c >= r ? 1.0 : std::exp(1.0 - double(r) / c);
  return bp * std::exp(logp / order);
}

struct DocFreq {
  std::map<Gram, int> df;
  int n_docs = 0;
};

inline DocFreq doc_freq(const std::vector<std::vector<Seq>>& corpus) {
  DocFreq out;
  out.n_docs = static_cast<int>(corpus.size());
  for (const auto& set : corpus) {
    std::set<Gram> seen;
    for (const Seq& s : set) {
      for (int n = 1; n <= 4; ++n) {
        for (auto& [g, k] : ngrams(s, n)) seen.insert(g);
      }
    }
    for (const Gram& g : seen) ++out.df[g];
  }
  return out;
}

inline std::map<Gram, double> tfidf(const Seq& s, int n, const DocFreq& df) {
  std::map<Gram, double> out;
  for (auto& [g, k] : ngrams(s, n)) {
    auto it = df.df.find(g);
    double f = it == df.df.end() ? 0.0 : it->second;
    out[g] = k * (std::log(double(std::max(1, df.n_docs))) - std::log(std::max(1.0, f)));
  }
  return out;
}

inline double cider_d(const Seq& cand, const std::vector<Seq>& refs, const DocFreq& df) {
  double score = 0.0;
  for (int n = 1; n <= 4; ++n) {
    auto vc = tfidf(cand, n, df);
    double nc = 0.0;
    for (auto& [g, w] : vc) nc += w * w;
    nc = std::sqrt(nc);
    double acc = 0.0;
    for (const Seq& r : refs) {
      auto vr = tfidf(r, n, df);
      double nr = 0.0;
      for (auto& [g, w] : vr) nr += w * w;
      nr = std::sqrt(nr);
      if (nc == 0.0 || nr == 0.0) continue;
      double num = 0.0;
      for (auto& [g, w] : vc) {
        auto it = vr.find(g);
        if (it != vr.end()) num += std::min(w, it->second) * it->second;
      }
      double dl = double(cand.size()) - double(r.size());
      acc += std::exp(-dl * dl / 72.0) * num / (nc * nr);
    }
    score += acc / refs.size();
  }
  return score / 4.0;
}

// Full O(n*m) table, recursive definition.
inline int edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::vector<int>> t(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) {
    for (std::size_t j = 0; j <= b.size(); ++j) {
      if (i == 0) {
        t[i][j] = int(j);
      } else if (j == 0) {
        t[i][j] = int(i);
      } else {
        int sub = t[i - 1][j - 1] + (a[i - 1] != b[j - 1]);
        t[i][j] = std::min({t[i - 1][j] + 1, t[i][j - 1] + 1, sub});
      }
    }
  }
  return t[a.size()][b.size()];
}

inline double distance(const Seq& a, const Seq& b) {
  return 1.0 - (bleu(a, {b}, 3) + bleu(b, {a}, 3) + bleu(a, {b}, 4) + bleu(b, {a}, 4)) / 4.0;
}

inline double div_n(const std::vector<Seq>& set, int n) {
  std::set<Gram> distinct;
  double words = 0;
  for (const Seq& s : set) {
    words += s.size();
    for (auto& [g, k] : ngrams(s, n)) distinct.insert(g);
  }
  return words == 0 ? 0.0 : distinct.size() / words;
}

inline double mbleu(const std::vector<Seq>& set, int order) {
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::vector<Seq> rest;
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (j != i) rest.push_back(set[j]);
    }
    sum += bleu(set[i], rest, order);
  }
  return sum / set.size();
}

}  // namespace oracle

#endif  // SEQX_TESTS_ORACLES_HPP
