#include "arground/scorer.hpp"

#include <algorithm>

#include "arground/error.hpp"
#include "arground/text.hpp"
#include "json.hpp"

namespace arground {

bool values_match(std::string_view pred, std::string_view gold) {
  const std::size_t longest = std::max(decode_utf8(pred).size(), decode_utf8(gold).size());
  if (longest == 0) return true;
  // similarity >= 0.85  <=>  20 * dist <= 3 * longest, kept in integers so
  // the threshold is exact.
  return 20 * levenshtein_distance(pred, gold) <= 3 * longest;
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::Correct: return "correct";
    case Verdict::NonExistentKey: return "NK";
    case Verdict::MissingKey: return "MK";
    case Verdict::SchemaGroundedValue: return "SV";
    case Verdict::HallucinatedValue: return "HV";
  }
  return "correct";
}

double reward_of(std::size_t n_error, std::size_t n_total) noexcept {
  if (n_total == 0) return n_error == 0 ? 1.0 : -1.0;
  const double raw =
      1.0 - 2.0 * static_cast<double>(n_error) / static_cast<double>(n_total);
  return std::clamp(raw, -1.0, 1.0);
}

double reward_of(const ErrorBreakdown& breakdown) noexcept {
  return reward_of(breakdown.n_error, breakdown.n_total);
}

ErrorBreakdown classify_errors(const ArgumentMap& pred, const ArgumentMap& gold,
                               const ApiSchema& schema) {
  for (const auto& [key, value] : gold) {
    if (schema.find_slot(key) == nullptr) {
      throw Error(ErrorCode::GoldSchemaMismatch,
                  "gold key '" + key + "' is not a slot of api '" + schema.api_name + "'", key);
    }
  }

  ErrorBreakdown b;
  b.n_total = 2 * gold.size();
  auto record = [&](const std::string& key, Verdict v) {
    b.per_slot_verdicts.emplace_back(key, v);
    switch (v) {
      case Verdict::NonExistentKey: ++b.n_nk; break;
      case Verdict::MissingKey: ++b.n_mk; break;
      case Verdict::SchemaGroundedValue: ++b.n_sv; break;
      case Verdict::HallucinatedValue: ++b.n_hv; break;
      case Verdict::Correct: break;
    }
  };

  for (const auto& [key, value] : pred) {
    const SlotSpec* slot = schema.find_slot(key);
    if (slot == nullptr) {
      record(key, Verdict::NonExistentKey);
      continue;
    }
    const std::string* expected = gold.find(key);
    if (expected != nullptr && values_match(value, *expected)) {
      record(key, Verdict::Correct);
    } else if (value_conforms_to_slot(*slot, value)) {
      record(key, Verdict::SchemaGroundedValue);
    } else {
      record(key, Verdict::HallucinatedValue);
    }
  }
  for (const auto& [key, value] : gold) {
    if (!pred.contains(key)) record(key, Verdict::MissingKey);
  }

  b.n_error = b.n_nk + b.n_mk + b.n_sv + b.n_hv;
  b.reward = reward_of(b);
  return b;
}

std::string breakdown_to_json(const ErrorBreakdown& b) {
  nlohmann::ordered_json j;
  j["n_nk"] = b.n_nk;
  j["n_mk"] = b.n_mk;
  j["n_sv"] = b.n_sv;
  j["n_hv"] = b.n_hv;
  j["n_total"] = b.n_total;
  j["reward"] = b.reward;
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& [key, v] : b.per_slot_verdicts) {
    verdicts.push_back({{"key", key}, {"verdict", std::string(to_string(v))}});
  }
  j["verdicts"] = std::move(verdicts);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ErrorBreakdown breakdown_from_json(std::string_view text) {
  ErrorBreakdown b;
  try {
    const auto j = nlohmann::json::parse(text);
    b.n_nk = j.at("n_nk").get<std::size_t>();
    b.n_mk = j.at("n_mk").get<std::size_t>();
    b.n_sv = j.at("n_sv").get<std::size_t>();
    b.n_hv = j.at("n_hv").get<std::size_t>();
    b.n_total = j.at("n_total").get<std::size_t>();
    b.reward = j.at("reward").get<double>();
    if (auto it = j.find("verdicts"); it != j.end()) {
      for (const auto& v : *it) {
        const std::string name = v.at("verdict").get<std::string>();
        Verdict verdict = Verdict::Correct;
        if (name == "NK") verdict = Verdict::NonExistentKey;
        else if (name == "MK") verdict = Verdict::MissingKey;
        else if (name == "SV") verdict = Verdict::SchemaGroundedValue;
        else if (name == "HV") verdict = Verdict::HallucinatedValue;
        else if (name != "correct") throw Error(ErrorCode::DatasetInvalid, "unknown verdict '" + name + "'");
        b.per_slot_verdicts.emplace_back(v.at("key").get<std::string>(), verdict);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::DatasetInvalid, std::string("malformed breakdown: ") + e.what());
  }
  b.n_error = b.n_nk + b.n_mk + b.n_sv + b.n_hv;
  return b;
}

}  // namespace arground
