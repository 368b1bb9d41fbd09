#include "arground/report.hpp"

#include <vector>

#include "arground/error.hpp"
#include "arground/metrics.hpp"
#include "json.hpp"

namespace arground {

std::string_view version() noexcept { return "0.1.0"; }

std::string emit_error_panel(std::span<const GroupedBreakdown> breakdowns) {
  if (breakdowns.empty()) throw Error(ErrorCode::EmptyCorpus, "no breakdowns to report");
  std::vector<std::string> order;
  std::map<std::string, std::vector<ErrorBreakdown>> groups;
  for (const auto& g : breakdowns) {
    auto [it, inserted] = groups.try_emplace(g.group);
    if (inserted) order.push_back(g.group);
    it->second.push_back(g.breakdown);
  }
  std::string csv = "group,nk_rate,mk_rate,sv_rate,hv_rate,n_samples\n";
  for (const auto& name : order) {
    const auto& members = groups[name];
    const auto rates = error_rates(members);
    csv += name;
    for (double r : rates) csv += "," + format_number(r);
    csv += "," + std::to_string(members.size()) + "\n";
  }
  return csv;
}

std::string run_metadata_json(const RunMetadata& meta) {
  nlohmann::ordered_json j;
  j["command"] = meta.command;
  j["config_hash"] = meta.config_hash;
  j["template_hash"] = meta.template_hash;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [role, hash] : meta.input_hashes) inputs[role] = hash;
  j["input_hashes"] = std::move(inputs);
  j["versions"] = {{"arground", std::string(version())},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return j.dump(2) + "\n";
}

}  // namespace arground
