#include "arground/text.hpp"

#include <algorithm>

#include "arground/error.hpp"

namespace arground {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string canonicalize_key(std::string_view raw) {
  const std::string lowered = to_lower_ascii(trim(raw));
  std::string out;
  out.reserve(lowered.size());
  bool in_separator = false;
  for (char c : lowered) {
    if (is_space(c) || c == '-') {
      if (!in_separator) out.push_back('_');
      in_separator = true;
    } else {
      out.push_back(c);
      in_separator = false;
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::InvalidKey, "key is empty after canonicalization",
                std::string(raw));
  }
  return out;
}

std::string canonicalize_value(std::string_view raw) {
  const std::string lowered = to_lower_ascii(trim(raw));
  std::string out;
  out.reserve(lowered.size());
  bool in_space = false;
  for (char c : lowered) {
    if (is_space(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool valid = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (valid) {
      out.push_back(cp);
      i += len;
    } else {
      // Raw byte mapped into a private range so it cannot collide with a
      // decoded code point.
      out.push_back(0x110000u + b0);
      ++i;
    }
  }
  return out;
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  const auto s = decode_utf8(a);
  const auto t = decode_utf8(b);
  if (s.empty()) return t.size();
  if (t.empty()) return s.size();

  std::vector<std::size_t> prev(t.size() + 1);
  std::vector<std::size_t> cur(t.size() + 1);
  for (std::size_t j = 0; j <= t.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t cost = s[i - 1] == t[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
    }
    std::swap(prev, cur);
  }
  return prev[t.size()];
}

double normalized_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(decode_utf8(a).size(), decode_utf8(b).size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) /
                   static_cast<double>(longest);
}

}  // namespace arground
