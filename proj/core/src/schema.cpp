#include "arground/schema.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <regex>
#include <set>
#include <sstream>

#include "arground/error.hpp"
#include "arground/scorer.hpp"
#include "arground/text.hpp"
#include "json.hpp"

namespace arground {

using Json = nlohmann::ordered_json;

std::string_view to_string(SlotKind kind) noexcept {
  switch (kind) {
    case SlotKind::FreeText: return "free-text";
    case SlotKind::Integer: return "integer";
    case SlotKind::Boolean: return "boolean";
    case SlotKind::Categorical: return "categorical";
    case SlotKind::Date: return "date";
    case SlotKind::Time: return "time";
  }
  return "free-text";
}

std::optional<SlotKind> parse_slot_kind(std::string_view text) {
  const std::string t = to_lower_ascii(trim(text));
  if (t == "free-text" || t == "free_text") return SlotKind::FreeText;
  if (t == "integer") return SlotKind::Integer;
  if (t == "boolean") return SlotKind::Boolean;
  if (t == "categorical") return SlotKind::Categorical;
  if (t == "date") return SlotKind::Date;
  if (t == "time") return SlotKind::Time;
  return std::nullopt;
}

const SlotSpec* ApiSchema::find_slot(std::string_view name) const noexcept {
  for (const auto& slot : slots) {
    if (slot.name == name) return &slot;
  }
  return nullptr;
}

ApiSchema normalize_schema(ApiSchema schema) {
  schema.api_name = std::string(trim(schema.api_name));
  if (schema.api_name.empty()) {
    throw Error(ErrorCode::SchemaInvalid, "api_name is empty");
  }
  if (schema.slots.empty()) {
    throw Error(ErrorCode::SchemaInvalid, "api '" + schema.api_name + "' has no slots",
                schema.api_name);
  }
  std::set<std::string> seen;
  for (auto& slot : schema.slots) {
    const std::string raw_name = slot.name;
    try {
      slot.name = canonicalize_key(raw_name);
    } catch (const Error&) {
      throw Error(ErrorCode::SchemaInvalid,
                  "api '" + schema.api_name + "' has a slot with an empty name", raw_name);
    }
    if (!seen.insert(slot.name).second) {
      throw Error(ErrorCode::SchemaInvalid,
                  "duplicate slot '" + slot.name + "' in api '" + schema.api_name + "'",
                  slot.name);
    }
    if (slot.kind == SlotKind::Categorical) {
      std::set<std::string> values;
      for (auto& value : slot.allowed_values) {
        value = canonicalize_value(value);
        if (value.empty()) {
          throw Error(ErrorCode::SchemaInvalid,
                      "slot '" + slot.name + "' has an empty allowed value", slot.name);
        }
        if (!values.insert(value).second) {
          throw Error(ErrorCode::SchemaInvalid,
                      "slot '" + slot.name + "' repeats allowed value '" + value + "'",
                      slot.name);
        }
      }
      if (slot.allowed_values.empty()) {
        throw Error(ErrorCode::SchemaInvalid,
                    "categorical slot '" + slot.name + "' has no allowed values", slot.name);
      }
    } else if (!slot.allowed_values.empty()) {
      throw Error(ErrorCode::SchemaInvalid,
                  "slot '" + slot.name + "' lists allowed values but is not categorical",
                  slot.name);
    }
  }
  return schema;
}

namespace {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

const Json* member(const Json& object, const char* name) {
  auto it = object.find(name);
  return it == object.end() ? nullptr : &*it;
}

std::string string_member(const Json& object, const char* name, const std::string& context,
                          bool required) {
  const Json* value = member(object, name);
  if (value == nullptr || value->is_null()) {
    if (required) {
      throw Error(ErrorCode::SchemaInvalid, context + ": missing '" + name + "'", context);
    }
    return {};
  }
  if (!value->is_string()) {
    throw Error(ErrorCode::SchemaInvalid, context + ": '" + name + "' must be a string",
                context);
  }
  return value->get<std::string>();
}

SlotSpec slot_from_json(const Json& j, const std::string& api_name) {
  if (!j.is_object()) {
    throw Error(ErrorCode::SchemaInvalid, "api '" + api_name + "': slot must be an object",
                api_name);
  }
  SlotSpec slot;
  slot.name = string_member(j, "name", "api '" + api_name + "'", true);
  const std::string context = "slot '" + slot.name + "'";
  const std::string kind = string_member(j, "kind", context, true);
  auto parsed = parse_slot_kind(kind);
  if (!parsed) {
    throw Error(ErrorCode::SchemaInvalid, context + ": unknown kind '" + kind + "'", slot.name);
  }
  slot.kind = *parsed;
  slot.description = string_member(j, "description", context, false);
  if (const Json* allowed = member(j, "allowed_values"); allowed && !allowed->is_null()) {
    if (!allowed->is_array()) {
      throw Error(ErrorCode::SchemaInvalid, context + ": allowed_values must be a list",
                  slot.name);
    }
    for (const auto& v : *allowed) {
      if (!v.is_string()) {
        throw Error(ErrorCode::SchemaInvalid, context + ": allowed values must be strings",
                    slot.name);
      }
      slot.allowed_values.push_back(v.get<std::string>());
    }
  }
  if (const Json* required = member(j, "required"); required && !required->is_null()) {
    if (!required->is_boolean()) {
      throw Error(ErrorCode::SchemaInvalid, context + ": required must be a boolean",
                  slot.name);
    }
    slot.required = required->get<bool>();
  }
  return slot;
}

}  // namespace

SchemaCatalog load_schema_catalog_text(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, column] = line_and_column(text, e.byte);
    throw Error(ErrorCode::ParseError,
                "schema catalog: line " + std::to_string(line) + ", column " +
                    std::to_string(column) + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::ParseError, "schema catalog: top level must be a list of APIs");
  }
  SchemaCatalog catalog;
  for (const auto& entry : doc) {
    if (!entry.is_object()) {
      throw Error(ErrorCode::SchemaInvalid, "schema catalog: every API must be an object");
    }
    ApiSchema schema;
    schema.api_name = string_member(entry, "api_name", "api", true);
    schema.description = string_member(entry, "description", "api '" + schema.api_name + "'",
                                       false);
    const Json* slots = member(entry, "slots");
    if (slots == nullptr || !slots->is_array()) {
      throw Error(ErrorCode::SchemaInvalid,
                  "api '" + schema.api_name + "': slots must be a list", schema.api_name);
    }
    for (const auto& s : *slots) schema.slots.push_back(slot_from_json(s, schema.api_name));
    schema = normalize_schema(std::move(schema));
    const std::string name = schema.api_name;
    if (!catalog.emplace(name, std::move(schema)).second) {
      throw Error(ErrorCode::DuplicateApi, "api '" + name + "' is defined twice", name);
    }
  }
  return catalog;
}

SchemaCatalog load_schema_catalog(std::istream& source) {
  return load_schema_catalog_text(read_all(source));
}

std::string serialize_schema_catalog(const SchemaCatalog& catalog) {
  Json doc = Json::array();
  for (const auto& [name, schema] : catalog) {
    Json api;
    api["api_name"] = schema.api_name;
    api["description"] = schema.description;
    Json slots = Json::array();
    for (const auto& slot : schema.slots) {
      Json s;
      s["name"] = slot.name;
      s["kind"] = std::string(to_string(slot.kind));
      s["description"] = slot.description;
      if (slot.kind == SlotKind::Categorical) s["allowed_values"] = slot.allowed_values;
      s["required"] = slot.required;
      slots.push_back(std::move(s));
    }
    api["slots"] = std::move(slots);
    doc.push_back(std::move(api));
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// ArgumentMap

ArgumentMap::ArgumentMap(std::initializer_list<Entry> entries) {
  for (const auto& [key, value] : entries) add(key, value);
}

void ArgumentMap::add(std::string_view key, std::string_view value) {
  std::string k = canonicalize_key(key);
  std::string v = canonicalize_value(value);
  if (v.empty()) {
    throw Error(ErrorCode::ArgumentMapInvalid, "empty value for key '" + k + "'", k);
  }
  if (contains(k)) {
    throw Error(ErrorCode::ArgumentMapInvalid, "duplicate key '" + k + "'", k);
  }
  entries_.emplace_back(std::move(k), std::move(v));
}

const std::string* ArgumentMap::find(std::string_view key) const noexcept {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

ArgumentMap order_by_schema(const ArgumentMap& map, const ApiSchema& schema) {
  ArgumentMap out;
  for (const auto& slot : schema.slots) {
    if (const std::string* v = map.find(slot.name)) out.add(slot.name, *v);
  }
  for (const auto& [k, v] : map) {
    if (schema.find_slot(k) == nullptr) out.add(k, v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conformance

namespace {

constexpr const char* kMonth =
    "(january|february|march|april|may|june|july|august|september|october|november|"
    "december|jan|feb|mar|apr|jun|jul|aug|sep|sept|oct|nov|dec)\\.?";
constexpr const char* kWeekday =
    "((monday|tuesday|wednesday|thursday|friday|saturday|sunday|mon|tue|tues|wed|thu|"
    "thur|thurs|fri|sat|sun),? )?";
constexpr const char* kDay = "(0?[1-9]|[12][0-9]|3[01])(st|nd|rd|th)?";
constexpr const char* kYear = "(,? [0-9]{4})?";

const std::vector<std::regex>& date_patterns() {
  static const std::vector<std::regex> patterns = [] {
    const std::string month = kMonth;
    const std::string weekday = kWeekday;
    const std::string day = kDay;
    const std::string year = kYear;
    return std::vector<std::regex>{
        std::regex("[0-9]{4}-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])"),
        std::regex("(0?[1-9]|1[0-2])/(0?[1-9]|[12][0-9]|3[01])"),
        std::regex("(0?[1-9]|1[0-2])/(0?[1-9]|[12][0-9]|3[01])/[0-9]{4}"),
        std::regex(weekday + month + " " + day + year),
        std::regex(weekday + "(the )?" + day + " (of )?" + month + year),
    };
  }();
  return patterns;
}

const std::vector<std::regex>& time_patterns() {
  static const std::vector<std::regex> patterns{
      // 12-hour clock with a suffix: 3pm, 3 pm, 3:30pm, 11:05 am
      std::regex("(0?[1-9]|1[0-2])(:[0-5][0-9])? ?(am|pm)"),
      // bare hour or 24-hour clock: 3, 15, 15:30, 09:00
      std::regex("([01]?[0-9]|2[0-3])(:[0-5][0-9])?"),
  };
  return patterns;
}

bool matches_any(const std::vector<std::regex>& patterns, std::string_view value) {
  const std::string v(value);
  return std::any_of(patterns.begin(), patterns.end(),
                     [&](const std::regex& re) { return std::regex_match(v, re); });
}

bool is_integer_value(std::string_view v) {
  if (!v.empty() && (v.front() == '-' || v.front() == '+')) v.remove_prefix(1);
  return !v.empty() && std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

bool is_date_value(std::string_view value) { return matches_any(date_patterns(), value); }

bool is_time_value(std::string_view value) { return matches_any(time_patterns(), value); }

bool value_conforms_to_slot(const SlotSpec& slot, std::string_view value) {
  if (value.empty()) return false;
  switch (slot.kind) {
    case SlotKind::FreeText:
      return true;
    case SlotKind::Integer:
      return is_integer_value(value);
    case SlotKind::Boolean:
      return value == "true" || value == "false" || value == "yes" || value == "no";
    case SlotKind::Categorical:
      return std::any_of(slot.allowed_values.begin(), slot.allowed_values.end(),
                         [&](const std::string& allowed) { return values_match(value, allowed); });
    case SlotKind::Date:
      return is_date_value(value);
    case SlotKind::Time:
      return is_time_value(value);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Dialogues

std::string_view to_string(Speaker speaker) noexcept {
  return speaker == Speaker::User ? "user" : "agent";
}

namespace {

std::string scalar_to_string(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

Dialogue dialogue_from_json(const Json& j, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no);
  auto fail = [&](const std::string& msg, const std::string& subject) -> Error {
    return Error(ErrorCode::DatasetInvalid, where + ": " + msg, subject);
  };
  if (!j.is_object()) throw fail("dialogue must be an object", {});

  auto get_string = [&](const char* name, const std::string& subject) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_string()) {
      throw fail(std::string("missing string field '") + name + "'", subject);
    }
    return it->get<std::string>();
  };

  Dialogue d;
  d.id = get_string("id", {});
  d.domain = get_string("domain", d.id);
  d.target_api = get_string("target_api", d.id);

  auto turns = j.find("turns");
  if (turns == j.end() || !turns->is_array() || turns->empty()) {
    throw fail("dialogue '" + d.id + "' has no turns", d.id);
  }
  for (const auto& t : *turns) {
    if (!t.is_object() || !t.contains("speaker") || !t.contains("utterance") ||
        !t["speaker"].is_string() || !t["utterance"].is_string()) {
      throw fail("dialogue '" + d.id + "': malformed turn", d.id);
    }
    const std::string speaker = to_lower_ascii(trim(t["speaker"].get<std::string>()));
    DialogueTurn turn;
    if (speaker == "user") {
      turn.speaker = Speaker::User;
    } else if (speaker == "agent") {
      turn.speaker = Speaker::Agent;
    } else {
      throw fail("dialogue '" + d.id + "': unknown speaker '" + speaker + "'", d.id);
    }
    turn.utterance = t["utterance"].get<std::string>();
    if (trim(turn.utterance).empty()) {
      throw fail("dialogue '" + d.id + "': empty utterance", d.id);
    }
    d.turns.push_back(std::move(turn));
  }

  auto gold = j.find("gold_arguments");
  if (gold != j.end() && !gold->is_null()) {
    if (!gold->is_object()) throw fail("dialogue '" + d.id + "': gold_arguments must be an object", d.id);
    for (const auto& [key, value] : gold->items()) {
      if (value.is_null()) continue;
      if (value.is_object() || value.is_array()) {
        throw fail("dialogue '" + d.id + "': gold value for '" + key + "' is not a scalar", d.id);
      }
      try {
        d.gold_arguments.add(key, scalar_to_string(value));
      } catch (const Error& e) {
        throw fail("dialogue '" + d.id + "': " + e.what(), d.id);
      }
    }
  }
  return d;
}

}  // namespace

std::vector<Dialogue> load_dialogues(std::istream& source, const SchemaCatalog* catalog) {
  std::vector<Dialogue> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::DatasetInvalid,
                  "line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    Dialogue d = dialogue_from_json(j, line_no);
    if (!ids.insert(d.id).second) {
      throw Error(ErrorCode::DatasetInvalid,
                  "line " + std::to_string(line_no) + ": duplicate dialogue id '" + d.id + "'",
                  d.id);
    }
    if (catalog != nullptr && catalog->find(d.target_api) == catalog->end()) {
      throw Error(ErrorCode::DatasetInvalid,
                  "line " + std::to_string(line_no) + ": dialogue '" + d.id +
                      "' targets unknown api '" + d.target_api + "'",
                  d.id);
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string dialogue_to_json_line(const Dialogue& dialogue) {
  Json j;
  j["id"] = dialogue.id;
  j["domain"] = dialogue.domain;
  j["target_api"] = dialogue.target_api;
  Json turns = Json::array();
  for (const auto& t : dialogue.turns) {
    turns.push_back(Json{{"speaker", std::string(to_string(t.speaker))},
                         {"utterance", t.utterance}});
  }
  j["turns"] = std::move(turns);
  Json gold = Json::object();
  for (const auto& [k, v] : dialogue.gold_arguments) gold[k] = v;
  j["gold_arguments"] = std::move(gold);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace arground
