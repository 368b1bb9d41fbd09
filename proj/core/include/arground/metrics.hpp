#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "arground/schema.hpp"
#include "arground/scorer.hpp"

namespace arground {

using PredGoldPair = std::pair<ArgumentMap, ArgumentMap>;

struct MetricsReport {
  double bleu = 0.0;       // [0, 1]
  double fm = 0.0;         // [0, 100], slot level
  double fm_strict = 0.0;  // [0, 100], every gold slot of a dialogue matched
  double f1 = 0.0;         // [0, 1], micro-averaged character F1
  std::size_t n_samples = 0;
  // NK, MK, SV, HV: summed counts over summed n_total.
  std::array<double, 4> error_rates{};
};

/// Percentage of gold slots whose key is predicted with a fuzzily matching
/// value. Throws EmptyCorpus for an empty list.
double fuzzy_match_rate(std::span<const PredGoldPair> pairs);

/// Percentage of pairs in which every gold slot is fuzzily matched.
double strict_fuzzy_match_rate(std::span<const PredGoldPair> pairs);

/// Micro totals behind character F1.
struct CharOverlap {
  std::size_t overlap = 0;     // multiset intersection over aligned keys
  std::size_t pred_chars = 0;  // every predicted value
  std::size_t gold_chars = 0;  // every gold value

  CharOverlap& operator+=(const CharOverlap& other) noexcept;
  double f1() const noexcept;
};

CharOverlap char_overlap(const ArgumentMap& pred, const ArgumentMap& gold);

/// Character-level F1 of one prediction: keys aligned exactly, values
/// compared as character multisets. Two empty maps score 1.
double char_f1(const ArgumentMap& pred, const ArgumentMap& gold);

/// Corpus BLEU-4 (uniform weights, brevity penalty, add-one smoothing for
/// orders 2-4) over whitespace tokens of the sorted serializations.
double corpus_bleu(std::span<const PredGoldPair> pairs);

/// Throws AlignmentError when the spans differ in length and EmptyCorpus when
/// they are empty.
MetricsReport evaluate_corpus(std::span<const PredGoldPair> pairs,
                              std::span<const ErrorBreakdown> breakdowns);

/// NK, MK, SV, HV rates of a set of breakdowns (zeros when n_total sums to 0).
std::array<double, 4> error_rates(std::span<const ErrorBreakdown> breakdowns);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

struct ReportLabels {
  std::string dataset = "unknown";
  std::string split = "unknown";
  std::string backend = "unknown";
};

/// `dataset,split,backend,bleu,fm,f1,nk_rate,mk_rate,sv_rate,hv_rate,n_samples,fm_strict`
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report, const ReportLabels& labels);

}  // namespace arground
