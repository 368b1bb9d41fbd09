#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace arground {

bool is_space(char c) noexcept;

std::string_view trim(std::string_view s) noexcept;

std::string to_lower_ascii(std::string_view s);

/// Lowercase snake_case key: trimmed, with every run of whitespace and
/// hyphens collapsed into one underscore. Throws InvalidKey when nothing is
/// left.
std::string canonicalize_key(std::string_view raw);

/// Lowercased, trimmed, internal whitespace runs collapsed to a single space.
/// May return an empty string.
std::string canonicalize_value(std::string_view raw);

/// Splits UTF-8 into code points. Bytes that do not start a valid sequence
/// are passed through as individual units, so this never fails.
std::vector<char32_t> decode_utf8(std::string_view s);

/// Edit distance over code points (unit-cost insert/delete/substitute).
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

/// 1 - dist(a, b) / max(|a|, |b|) in code points; 1.0 for two empty strings.
double normalized_similarity(std::string_view a, std::string_view b);

}  // namespace arground
