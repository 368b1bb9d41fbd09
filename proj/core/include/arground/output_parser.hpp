#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "arground/schema.hpp"

namespace arground {

struct ParseOutcome {
  ArgumentMap map;
  // Non-fatal repairs applied while parsing, each listed once.
  std::vector<std::string> warnings;
};

/// Pulls a flat argument dictionary out of raw model output.
///
/// Code fences are stripped, then the first balanced `{...}` region is parsed
/// with a relaxed grammar: single or double quotes, bare-word keys and values,
/// an optional trailing comma, numeric/boolean literals stringified, and
/// `null` treated as an absent value. Keys and values come back canonical.
///
/// Throws NoArgumentObject when no balanced region exists and
/// MalformedArguments (subject = the offending span) when the region cannot
/// be parsed, including nested objects or lists.
ParseOutcome extract_argument_map(std::string_view raw);

enum class KeyOrder { Given, Sorted };

/// Renders `{"k1": "v1", "k2": "v2"}` with JSON string escaping.
std::string serialize_argument_map(const ArgumentMap& map, KeyOrder order = KeyOrder::Given);

}  // namespace arground
