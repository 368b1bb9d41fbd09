#pragma once

// Plain corpus BLEU-4 over pre-tokenized sentences: clipped n-gram counts,
// brevity penalty, add-one smoothing for orders 2..4.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::map<Tokens, int> grams(const Tokens& t, std::size_t n) {
  std::map<Tokens, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out[Tokens(t.begin() + i, t.begin() + i + n)]++;
  return out;
}

inline double corpus_bleu(const std::vector<std::pair<Tokens, Tokens>>& corpus) {
  double match[5] = {0, 0, 0, 0, 0};
  double cand[5] = {0, 0, 0, 0, 0};
  double c_len = 0;
  double r_len = 0;
  for (const auto& [hyp, ref] : corpus) {
    c_len += hyp.size();
    r_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      auto h = grams(hyp, n);
      auto r = grams(ref, n);
      for (const auto& [g, k] : h) {
        cand[n] += k;
        match[n] += std::min(k, r.count(g) ? r[g] : 0);
      }
    }
  }
  if (c_len == 0 || match[1] == 0) return 0.0;
  double log_p = std::log(match[1] / cand[1]);
  for (int n = 2; n <= 4; ++n) log_p += std::log((match[n] + 1) / (cand[n] + 1));
  const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return bp * std::exp(log_p / 4);
}

inline Tokens whitespace_tokens(const std::string& s) {
  Tokens out;
  std::string cur;
  for (char ch : s) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace oracle
