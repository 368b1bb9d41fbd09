#pragma once

#include <map>
#include <span>
#include <string>

#include "arground/scorer.hpp"

namespace arground {

struct GroupedBreakdown {
  std::string group;  // model name or split label
  ErrorBreakdown breakdown;
};

/// CSV with header `group,nk_rate,mk_rate,sv_rate,hv_rate,n_samples` and one
/// row per group in order of first appearance. Throws EmptyCorpus.
std::string emit_error_panel(std::span<const GroupedBreakdown> breakdowns);

struct RunMetadata {
  std::string command;
  std::string config_hash;
  std::string template_hash;
  std::map<std::string, std::string> input_hashes;  // role -> sha256
};

/// `{command, config_hash, template_hash, input_hashes, versions}`
std::string run_metadata_json(const RunMetadata& meta);

/// Library version string.
std::string_view version() noexcept;

}  // namespace arground
