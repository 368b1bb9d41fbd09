#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arground/schema.hpp"

namespace arground {

/// Minimum normalized Levenshtein similarity for two values to count as the
/// same answer.
inline constexpr double kFuzzyMatchThreshold = 0.85;

/// Fuzzy equality of two canonical values: similarity >= 0.85. Symmetric.
bool values_match(std::string_view pred, std::string_view gold);

enum class Verdict { Correct, NonExistentKey, MissingKey, SchemaGroundedValue, HallucinatedValue };

/// "correct", "NK", "MK", "SV" or "HV".
std::string_view to_string(Verdict verdict) noexcept;

struct ErrorBreakdown {
  std::size_t n_nk = 0;
  std::size_t n_mk = 0;
  std::size_t n_sv = 0;
  std::size_t n_hv = 0;
  std::size_t n_total = 0;  // keys + values in the gold arguments
  std::size_t n_error = 0;  // always n_nk + n_mk + n_sv + n_hv
  double reward = 1.0;
  std::vector<std::pair<std::string, Verdict>> per_slot_verdicts;

  bool operator==(const ErrorBreakdown&) const = default;
};

/// 1 - 2 * n_error / n_total clamped to [-1, 1]. With n_total == 0 the
/// reward is 1 for an error-free prediction and -1 otherwise.
double reward_of(std::size_t n_error, std::size_t n_total) noexcept;
double reward_of(const ErrorBreakdown& breakdown) noexcept;

/// Classifies every predicted and gold slot.
///
///  - predicted key outside the schema: NK (its value is ignored)
///  - predicted key in the schema and in gold: correct if the values fuzzily
///    match, otherwise SV when the value conforms to the slot and HV if not
///  - predicted key in the schema but not in gold: one SV/HV error by the
///    same conformance test
///  - gold key missing from the prediction: MK
///
/// Verdicts are listed in prediction order followed by missing gold keys in
/// gold order. Throws GoldSchemaMismatch if a gold key is not in the schema.
ErrorBreakdown classify_errors(const ArgumentMap& pred, const ArgumentMap& gold,
                               const ApiSchema& schema);

/// `{n_nk, n_mk, n_sv, n_hv, n_total, reward, verdicts: [{key, verdict}]}`
std::string breakdown_to_json(const ErrorBreakdown& breakdown);
ErrorBreakdown breakdown_from_json(std::string_view json);

}  // namespace arground
