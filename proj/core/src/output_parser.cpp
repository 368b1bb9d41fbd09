#include "arground/output_parser.hpp"

#include <algorithm>
#include <optional>
#include <vector>

#include "arground/error.hpp"
#include "arground/text.hpp"
#include "json.hpp"

namespace arground {

namespace {

constexpr std::string_view kFence = "```";
constexpr std::size_t kMaxSpan = 240;

class Warnings {
 public:
  void add(std::string w) {
    if (std::find(list_.begin(), list_.end(), w) == list_.end()) list_.push_back(std::move(w));
  }
  std::vector<std::string> take() { return std::move(list_); }

 private:
  std::vector<std::string> list_;
};

bool is_tag_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '-' || c == '+';
}

// Removes ``` markers together with a language tag that directly follows an
// opening fence ("```json\n").
std::string strip_code_fences(std::string_view raw, bool& stripped) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw.substr(i, kFence.size()) == kFence) {
      stripped = true;
      i += kFence.size();
      std::size_t j = i;
      while (j < raw.size() && is_tag_char(raw[j])) ++j;
      if (j > i && (j == raw.size() || raw[j] == '\n' || raw[j] == '\r')) i = j;
      out.push_back('\n');
      continue;
    }
    out.push_back(raw[i++]);
  }
  return out;
}

struct Region {
  std::size_t begin;  // index of '{'
  std::size_t end;    // one past the matching '}'
};

bool opens_token(std::string_view text, std::size_t pos) {
  std::size_t k = pos;
  while (k > 0) {
    const char c = text[k - 1];
    if (is_space(c)) {
      --k;
      continue;
    }
    return c == '{' || c == ',' || c == ':' || c == '[';
  }
  return false;
}

// Brace matching from the first '{' that treats quoted strings as opaque. A
// quote only opens a string where a token may start, so apostrophes inside
// bare words do not derail the scan.
std::optional<Region> quote_aware_region(std::string_view text) {
  const std::size_t start = text.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  char quote = 0;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if ((c == '"' || c == '\'') && opens_token(text, i)) {
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return Region{start, i + 1};
    }
  }
  return std::nullopt;
}

// Plain brace matching, ignoring quotes: the balanced pair with the
// earliest opening brace.
std::optional<Region> naive_region(std::string_view text) {
  std::vector<std::size_t> stack;
  std::optional<Region> best;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      stack.push_back(i);
    } else if (text[i] == '}' && !stack.empty()) {
      const std::size_t open = stack.back();
      stack.pop_back();
      if (!best || open < best->begin) best = Region{open, i + 1};
    }
  }
  return best;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Scalar {
  std::string text;
  bool is_null = false;
};

// Recursive-descent parser over one brace region.
class RegionParser {
 public:
  RegionParser(std::string_view region, Warnings& warnings)
      : text_(region), warnings_(warnings) {}

  ArgumentMap parse() {
    expect('{');
    skip_ws();
    ArgumentMap map;
    if (peek() == '}') {
      ++pos_;
      return finish(std::move(map));
    }
    while (true) {
      const std::string raw_key = parse_key();
      skip_ws();
      expect(':');
      skip_ws();
      const Scalar value = parse_value();
      insert(map, raw_key, value);
      skip_ws();
      const char c = peek();
      if (c == ',') {
        ++pos_;
        skip_ws();
        if (peek() == '}') {
          warnings_.add("removed trailing comma");
          ++pos_;
          return finish(std::move(map));
        }
        continue;
      }
      if (c == '}') {
        ++pos_;
        return finish(std::move(map));
      }
      fail("expected ',' or '}'");
    }
  }

 private:
  ArgumentMap finish(ArgumentMap map) {
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected text after closing brace");
    return map;
  }

  [[noreturn]] void fail(const std::string& why) const {
    std::string span(text_.substr(0, kMaxSpan));
    throw Error(ErrorCode::MalformedArguments,
                why + " at offset " + std::to_string(pos_) + " in " + span, span);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void insert(ArgumentMap& map, const std::string& raw_key, const Scalar& value) {
    std::string key;
    try {
      key = canonicalize_key(raw_key);
    } catch (const Error&) {
      fail("empty key");
    }
    if (map.contains(key)) {
      warnings_.add("dropped duplicate key '" + key + "'");
      return;
    }
    const std::string canonical = value.is_null ? std::string() : canonicalize_value(value.text);
    if (canonical.empty()) {
      warnings_.add("dropped empty value for key '" + key + "'");
      return;
    }
    map.add(key, canonical);
  }

  std::string parse_quoted() {
    const char quote = text_[pos_++];
    if (quote == '\'') warnings_.add("converted single quotes");
    std::string out;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == quote) return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) break;
      const char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'u': out += parse_unicode_escape(); break;
        default: out.push_back(e); break;
      }
    }
    fail("unterminated string");
  }

  std::uint32_t hex4() {
    if (pos_ + 4 > text_.size()) fail("truncated \\u escape");
    std::uint32_t cp = 0;
    for (int k = 0; k < 4; ++k) {
      const char h = text_[pos_++];
      cp <<= 4;
      if (h >= '0' && h <= '9') {
        cp |= static_cast<std::uint32_t>(h - '0');
      } else if (h >= 'a' && h <= 'f') {
        cp |= static_cast<std::uint32_t>(h - 'a' + 10);
      } else if (h >= 'A' && h <= 'F') {
        cp |= static_cast<std::uint32_t>(h - 'A' + 10);
      } else {
        fail("bad \\u escape");
      }
    }
    return cp;
  }

  std::string parse_unicode_escape() {
    std::uint32_t cp = hex4();
    if (cp >= 0xD800 && cp <= 0xDBFF && text_.substr(pos_, 2) == "\\u") {
      pos_ += 2;
      const std::uint32_t low = hex4();
      if (low >= 0xDC00 && low <= 0xDFFF) {
        cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
      } else {
        fail("unpaired surrogate");
      }
    }
    std::string out;
    append_utf8(out, cp);
    return out;
  }

  std::string parse_key() {
    const char c = peek();
    if (c == '"' || c == '\'') return parse_quoted();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char k = text_[pos_];
      if (k == ':') break;
      if (k == ',' || k == '{' || k == '}' || k == '[' || k == ']' || k == '"' || k == '\'') {
        fail("malformed key");
      }
      ++pos_;
    }
    const std::string_view key = trim(text_.substr(start, pos_ - start));
    if (key.empty()) fail("missing key");
    warnings_.add("unquoted key");
    return std::string(key);
  }

  Scalar parse_value() {
    const char c = peek();
    if (c == '"' || c == '\'') return {parse_quoted(), false};
    if (c == '{') fail("nested object");
    if (c == '[') fail("list value");
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char k = text_[pos_];
      if (k == ',' || k == '}') break;
      if (k == '{' || k == '[') fail("nested value");
      ++pos_;
    }
    const std::string_view word = trim(text_.substr(start, pos_ - start));
    if (word.empty()) fail("missing value");
    if (word == "null" || word == "None") return {{}, true};
    if (word == "true" || word == "false" || word == "True" || word == "False" ||
        is_number(word)) {
      return {std::string(word), false};
    }
    warnings_.add("unquoted value");
    return {std::string(word), false};
  }

  static bool is_number(std::string_view w) {
    std::size_t i = 0;
    if (i < w.size() && (w[i] == '-' || w[i] == '+')) ++i;
    bool digits = false;
    bool dot = false;
    for (; i < w.size(); ++i) {
      if (w[i] >= '0' && w[i] <= '9') {
        digits = true;
      } else if (w[i] == '.' && !dot) {
        dot = true;
      } else if ((w[i] == 'e' || w[i] == 'E') && digits) {
        ++i;
        if (i < w.size() && (w[i] == '-' || w[i] == '+')) ++i;
        if (i >= w.size()) return false;
        for (; i < w.size(); ++i) {
          if (w[i] < '0' || w[i] > '9') return false;
        }
        return true;
      } else {
        return false;
      }
    }
    return digits;
  }

  std::string_view text_;
  Warnings& warnings_;
  std::size_t pos_ = 0;
};

bool has_content(std::string_view s) { return !trim(s).empty(); }

}  // namespace

ParseOutcome extract_argument_map(std::string_view raw) {
  Warnings warnings;
  bool stripped = false;
  const std::string text = strip_code_fences(raw, stripped);
  if (stripped) warnings.add("stripped code fence");

  std::optional<Region> region = quote_aware_region(text);
  if (!region) region = naive_region(text);
  if (!region) {
    throw Error(ErrorCode::NoArgumentObject, "no balanced {...} region in model output");
  }

  const std::string_view view(text);
  if (has_content(view.substr(0, region->begin)) || has_content(view.substr(region->end))) {
    warnings.add("ignored surrounding text");
  }

  RegionParser parser(view.substr(region->begin, region->end - region->begin), warnings);
  ParseOutcome outcome;
  outcome.map = parser.parse();
  outcome.warnings = warnings.take();
  return outcome;
}

std::string serialize_argument_map(const ArgumentMap& map, KeyOrder order) {
  std::vector<const ArgumentMap::Entry*> entries;
  entries.reserve(map.size());
  for (const auto& e : map) entries.push_back(&e);
  if (order == KeyOrder::Sorted) {
    std::sort(entries.begin(), entries.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
  }
  auto quote = [](const std::string& s) {
    return nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  };
  std::string out = "{";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote(entries[i]->first);
    out += ": ";
    out += quote(entries[i]->second);
  }
  out += "}";
  return out;
}

}  // namespace arground
