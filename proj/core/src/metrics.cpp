#include "arground/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <string_view>
#include <vector>

#include "arground/error.hpp"
#include "arground/output_parser.hpp"
#include "arground/text.hpp"

namespace arground {

namespace {

void require_non_empty(std::span<const PredGoldPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyCorpus, "no prediction/gold pairs");
}

std::size_t matched_slots(const ArgumentMap& pred, const ArgumentMap& gold) {
  std::size_t matched = 0;
  for (const auto& [key, value] : gold) {
    const std::string* p = pred.find(key);
    if (p != nullptr && values_match(*p, value)) ++matched;
  }
  return matched;
}

}  // namespace

double fuzzy_match_rate(std::span<const PredGoldPair> pairs) {
  require_non_empty(pairs);
  std::size_t matched = 0;
  std::size_t total = 0;
  for (const auto& [pred, gold] : pairs) {
    matched += matched_slots(pred, gold);
    total += gold.size();
  }
  if (total == 0) return 100.0;
  return 100.0 * static_cast<double>(matched) / static_cast<double>(total);
}

double strict_fuzzy_match_rate(std::span<const PredGoldPair> pairs) {
  require_non_empty(pairs);
  std::size_t all_correct = 0;
  for (const auto& [pred, gold] : pairs) {
    if (matched_slots(pred, gold) == gold.size()) ++all_correct;
  }
  return 100.0 * static_cast<double>(all_correct) / static_cast<double>(pairs.size());
}

CharOverlap& CharOverlap::operator+=(const CharOverlap& other) noexcept {
  overlap += other.overlap;
  pred_chars += other.pred_chars;
  gold_chars += other.gold_chars;
  return *this;
}

double CharOverlap::f1() const noexcept {
  if (pred_chars == 0 && gold_chars == 0) return 1.0;
  const double p = pred_chars == 0 ? 0.0 : static_cast<double>(overlap) / pred_chars;
  const double r = gold_chars == 0 ? 0.0 : static_cast<double>(overlap) / gold_chars;
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

CharOverlap char_overlap(const ArgumentMap& pred, const ArgumentMap& gold) {
  CharOverlap c;
  for (const auto& [key, value] : pred) c.pred_chars += decode_utf8(value).size();
  for (const auto& [key, value] : gold) {
    const auto gold_chars = decode_utf8(value);
    c.gold_chars += gold_chars.size();
    const std::string* p = pred.find(key);
    if (p == nullptr) continue;
    std::map<char32_t, std::size_t> bag;
    for (char32_t ch : gold_chars) ++bag[ch];
    for (char32_t ch : decode_utf8(*p)) {
      auto it = bag.find(ch);
      if (it != bag.end() && it->second > 0) {
        --it->second;
        ++c.overlap;
      }
    }
  }
  return c;
}

double char_f1(const ArgumentMap& pred, const ArgumentMap& gold) {
  return char_overlap(pred, gold).f1();
}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string_view>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string_view>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double corpus_bleu(std::span<const PredGoldPair> pairs) {
  require_non_empty(pairs);
  constexpr std::size_t kMaxOrder = 4;
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> candidates{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  for (const auto& [pred, gold] : pairs) {
    const std::string hyp_text = serialize_argument_map(pred, KeyOrder::Sorted);
    const std::string ref_text = serialize_argument_map(gold, KeyOrder::Sorted);
    const auto hyp = split_ws(hyp_text);
    const auto ref = split_ws(ref_text);
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const NgramCounts h = count_ngrams(hyp, n);
      const NgramCounts r = count_ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        candidates[n - 1] += count;
        auto it = r.find(gram);
        if (it != r.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  if (hyp_len == 0 || candidates[0] == 0 || matches[0] == 0) return 0.0;
  double log_sum = std::log(static_cast<double>(matches[0]) / candidates[0]);
  for (std::size_t n = 1; n < kMaxOrder; ++n) {
    log_sum += std::log((matches[n] + 1.0) / (candidates[n] + 1.0));
  }
  const double brevity =
      hyp_len > ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / hyp_len);
  return brevity * std::exp(log_sum / kMaxOrder);
}

std::array<double, 4> error_rates(std::span<const ErrorBreakdown> breakdowns) {
  std::array<std::size_t, 4> sums{};
  std::size_t total = 0;
  for (const auto& b : breakdowns) {
    sums[0] += b.n_nk;
    sums[1] += b.n_mk;
    sums[2] += b.n_sv;
    sums[3] += b.n_hv;
    total += b.n_total;
  }
  std::array<double, 4> rates{};
  if (total == 0) return rates;
  for (std::size_t i = 0; i < 4; ++i) {
    rates[i] = static_cast<double>(sums[i]) / static_cast<double>(total);
  }
  return rates;
}

MetricsReport evaluate_corpus(std::span<const PredGoldPair> pairs,
                              std::span<const ErrorBreakdown> breakdowns) {
  if (pairs.size() != breakdowns.size()) {
    throw Error(ErrorCode::AlignmentError,
                std::to_string(pairs.size()) + " pairs but " +
                    std::to_string(breakdowns.size()) + " breakdowns");
  }
  require_non_empty(pairs);
  MetricsReport report;
  report.n_samples = pairs.size();
  report.bleu = corpus_bleu(pairs);
  report.fm = fuzzy_match_rate(pairs);
  report.fm_strict = strict_fuzzy_match_rate(pairs);
  CharOverlap total;
  for (const auto& [pred, gold] : pairs) total += char_overlap(pred, gold);
  report.f1 = total.f1();
  report.error_rates = error_rates(breakdowns);
  return report;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::string metrics_csv_header() {
  return "dataset,split,backend,bleu,fm,f1,nk_rate,mk_rate,sv_rate,hv_rate,n_samples,fm_strict";
}

std::string metrics_csv_row(const MetricsReport& r, const ReportLabels& labels) {
  std::string row = labels.dataset + "," + labels.split + "," + labels.backend;
  for (double v : {r.bleu, r.fm, r.f1, r.error_rates[0], r.error_rates[1], r.error_rates[2],
                   r.error_rates[3]}) {
    row += "," + format_number(v);
  }
  row += "," + std::to_string(r.n_samples);
  row += "," + format_number(r.fm_strict);
  return row;
}

}  // namespace arground
