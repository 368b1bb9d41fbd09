#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arground {

enum class SlotKind { FreeText, Integer, Boolean, Categorical, Date, Time };

std::string_view to_string(SlotKind kind) noexcept;
std::optional<SlotKind> parse_slot_kind(std::string_view text);

struct SlotSpec {
  std::string name;
  SlotKind kind = SlotKind::FreeText;
  std::string description;
  // Non-empty iff kind == Categorical.
  std::vector<std::string> allowed_values;
  bool required = true;

  bool operator==(const SlotSpec&) const = default;
};

struct ApiSchema {
  std::string api_name;
  std::string description;
  std::vector<SlotSpec> slots;

  /// Looks up a slot by its canonical name.
  const SlotSpec* find_slot(std::string_view name) const noexcept;

  bool operator==(const ApiSchema&) const = default;
};

using SchemaCatalog = std::map<std::string, ApiSchema, std::less<>>;

/// Canonicalizes slot names and categorical values, applies defaults and
/// checks every ApiSchema/SlotSpec invariant. Throws SchemaInvalid naming
/// the offending slot.
ApiSchema normalize_schema(ApiSchema schema);

/// Reads the JSON catalog format: a list of
/// `{api_name, description, slots: [{name, kind, description, allowed_values?, required?}]}`.
SchemaCatalog load_schema_catalog(std::istream& source);
SchemaCatalog load_schema_catalog_text(std::string_view text);

std::string serialize_schema_catalog(const SchemaCatalog& catalog);

/// Ordered key/value pairs with canonical, unique keys and non-empty
/// canonical values. Absence of a value is modelled by absence of the key.
class ArgumentMap {
 public:
  using Entry = std::pair<std::string, std::string>;
  using const_iterator = std::vector<Entry>::const_iterator;

  ArgumentMap() = default;
  /// Canonicalizes every pair; throws like add().
  ArgumentMap(std::initializer_list<Entry> entries);

  /// Canonicalizes key and value and appends. Throws InvalidKey for an
  /// empty key, ArgumentMapInvalid for an empty value or a duplicate key.
  void add(std::string_view key, std::string_view value);

  /// Value for an already-canonical key.
  const std::string* find(std::string_view key) const noexcept;
  bool contains(std::string_view key) const noexcept { return find(key) != nullptr; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const_iterator begin() const noexcept { return entries_.begin(); }
  const_iterator end() const noexcept { return entries_.end(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  bool operator==(const ArgumentMap&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Reorders entries so slots appear in schema declaration order; keys the
/// schema does not know keep their relative order at the end.
ArgumentMap order_by_schema(const ArgumentMap& map, const ApiSchema& schema);

/// Whether a canonical value is legal for the slot's kind.
bool value_conforms_to_slot(const SlotSpec& slot, std::string_view value);

bool is_date_value(std::string_view value);
bool is_time_value(std::string_view value);

enum class Speaker { User, Agent };

std::string_view to_string(Speaker speaker) noexcept;

struct DialogueTurn {
  Speaker speaker = Speaker::User;
  std::string utterance;

  bool operator==(const DialogueTurn&) const = default;
};

struct Dialogue {
  std::string id;
  std::string domain;
  std::string target_api;
  std::vector<DialogueTurn> turns;
  ArgumentMap gold_arguments;

  bool operator==(const Dialogue&) const = default;
};

/// Reads the JSONL dialogue format. When `catalog` is given every
/// target_api must resolve in it. Errors are DatasetInvalid with the line
/// number in the message and the dialogue id (when known) as subject.
std::vector<Dialogue> load_dialogues(std::istream& source, const SchemaCatalog* catalog);

std::string dialogue_to_json_line(const Dialogue& dialogue);

}  // namespace arground
