#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "arground/error.hpp"
#include "arground/schema.hpp"
#include "support/test_support.hpp"

using namespace arground;
using testing_support::hair_schema;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no arground::Error thrown");
  return ErrorCode::IoError;
}

const char* kCatalog = R"([
  {"api_name": "hair_appointment", "description": "Book a haircut",
   "slots": [
     {"name": "Name", "kind": "free-text", "description": "customer name"},
     {"name": "Appointment Time", "kind": "time", "description": "when"},
     {"name": "stylist", "kind": "categorical", "description": "who",
      "allowed_values": ["Jess", "Jack"], "required": false}
   ]}
])";

}  // namespace

TEST_CASE("catalog loads and canonicalizes names and values", "[schema]") {
  const auto catalog = load_schema_catalog_text(kCatalog);
  REQUIRE(catalog.size() == 1);
  const ApiSchema& s = catalog.at("hair_appointment");
  REQUIRE(s.slots.size() == 3);
  CHECK(s.slots[0].name == "name");
  CHECK(s.slots[0].required);
  CHECK(s.slots[1].name == "appointment_time");
  CHECK(s.slots[1].kind == SlotKind::Time);
  CHECK(s.slots[2].allowed_values == std::vector<std::string>{"jess", "jack"});
  CHECK_FALSE(s.slots[2].required);
}

TEST_CASE("catalog round-trips through serialization", "[schema]") {
  const auto catalog = load_schema_catalog_text(kCatalog);
  const auto again = load_schema_catalog_text(serialize_schema_catalog(catalog));
  CHECK(again == catalog);
  CHECK(load_schema_catalog_text(serialize_schema_catalog(testing_support::hair_catalog())) ==
        testing_support::hair_catalog());
}

TEST_CASE("catalog errors", "[schema]") {
  CHECK(code_of([] {
          load_schema_catalog_text(R"([{"api_name": "a", "description": "", "slots": [{"name": "x", "kind": "free-text", "description": ""}]},
                                        {"api_name": "a", "description": "", "slots": [{"name": "y", "kind": "free-text", "description": ""}]}])");
        }) == ErrorCode::DuplicateApi);
  CHECK(code_of([] {
          load_schema_catalog_text(R"([{"api_name": "a", "description": "", "slots": [{"name": "x", "kind": "categorical", "description": "", "allowed_values": []}]}])");
        }) == ErrorCode::SchemaInvalid);
  CHECK(code_of([] {
          load_schema_catalog_text(R"([{"api_name": "a", "description": "", "slots": [{"name": "x", "kind": "integer", "description": "", "allowed_values": ["1"]}]}])");
        }) == ErrorCode::SchemaInvalid);
  CHECK(code_of([] {
          load_schema_catalog_text(R"([{"api_name": "a", "description": "", "slots": [{"name": "X", "kind": "date", "description": ""}, {"name": "x", "kind": "date", "description": ""}]}])");
        }) == ErrorCode::SchemaInvalid);
  CHECK(code_of([] { load_schema_catalog_text(R"([{"api_name": "a", "description": "", "slots": []}])"); }) ==
        ErrorCode::SchemaInvalid);
  CHECK(code_of([] {
          load_schema_catalog_text(R"([{"api_name": "a", "description": "", "slots": [{"name": "x", "kind": "colour", "description": ""}]}])");
        }) == ErrorCode::SchemaInvalid);
}

TEST_CASE("malformed catalog reports line and column", "[schema]") {
  try {
    load_schema_catalog_text("[\n  {\"api_name\": \"a\",\n   oops}\n]");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("argument maps canonicalize and reject bad entries", "[schema]") {
  ArgumentMap m;
  m.add(" Appointment Time ", "  3PM ");
  CHECK(m.find("appointment_time") != nullptr);
  CHECK(*m.find("appointment_time") == "3pm");
  CHECK(code_of([&] { m.add("appointment-time", "4pm"); }) == ErrorCode::ArgumentMapInvalid);
  CHECK(code_of([&] { m.add("other", "   "); }) == ErrorCode::ArgumentMapInvalid);
  CHECK(code_of([&] { m.add("  ", "x"); }) == ErrorCode::InvalidKey);
  CHECK(m.size() == 1);
}

TEST_CASE("order_by_schema follows slot declaration order", "[schema]") {
  const ArgumentMap m{{"stylist", "jess"}, {"name", "john"}, {"time", "3pm"}};
  const auto ordered = order_by_schema(m, hair_schema());
  REQUIRE(ordered.size() == 3);
  CHECK(ordered.entries()[0].first == "name");
  CHECK(ordered.entries()[1].first == "time");
  CHECK(ordered.entries()[2].first == "stylist");
}

TEST_CASE("value conformance by slot kind", "[schema]") {
  const auto s = hair_schema();
  const SlotSpec& stylist = s.slots[2];
  CHECK(value_conforms_to_slot(stylist, "jess"));
  CHECK(value_conforms_to_slot(stylist, "jack"));
  CHECK_FALSE(value_conforms_to_slot(stylist, "maria"));

  const SlotSpec integer{.name = "n", .kind = SlotKind::Integer};
  CHECK_FALSE(value_conforms_to_slot(integer, "3pm"));
  CHECK(value_conforms_to_slot(integer, "-12"));
  CHECK(value_conforms_to_slot(integer, "+4"));
  CHECK_FALSE(value_conforms_to_slot(integer, "1.5"));

  const SlotSpec boolean{.name = "b", .kind = SlotKind::Boolean};
  for (const char* v : {"true", "false", "yes", "no"}) CHECK(value_conforms_to_slot(boolean, v));
  CHECK_FALSE(value_conforms_to_slot(boolean, "maybe"));

  const SlotSpec time{.name = "t", .kind = SlotKind::Time};
  for (const char* v : {"3pm", "3 pm", "11:30am", "12:05 pm", "15:00", "9", "23:59"}) {
    INFO(v);
    CHECK(value_conforms_to_slot(time, v));
  }
  for (const char* v : {"purple", "13pm", "25:00", "3:60pm", "noon"}) {
    INFO(v);
    CHECK_FALSE(value_conforms_to_slot(time, v));
  }

  const SlotSpec date{.name = "d", .kind = SlotKind::Date};
  for (const char* v : {"2023-03-01", "3/1", "03/01/2023", "march 1st", "march 1", "the 1st of march",
                        "friday march 3rd", "march 3, 2024"}) {
    INFO(v);
    CHECK(value_conforms_to_slot(date, v));
  }
  for (const char* v : {"2023-13-01", "tomorrowish", "13/1", "purple"}) {
    INFO(v);
    CHECK_FALSE(value_conforms_to_slot(date, v));
  }
}

TEST_CASE("free-text accepts every non-empty canonical value", "[schema]") {
  const SlotSpec free{.name = "f", .kind = SlotKind::FreeText};
  std::mt19937 rng(3);
  for (int i = 0; i < 500; ++i) {
    std::string v;
    for (int k = 1 + static_cast<int>(rng() % 10); k > 0; --k) v += static_cast<char>('!' + rng() % 90);
    CHECK(value_conforms_to_slot(free, v));
  }
}

TEST_CASE("dialogue loader validates records", "[schema]") {
  const auto catalog = testing_support::hair_catalog();
  std::istringstream good(
      R"({"id": "d1", "domain": "salon", "target_api": "hair_appointment", "turns": [{"speaker": "user", "utterance": "Book me at 3"}], "gold_arguments": {"Name": "John", "time": 3, "stylist": null}})"
      "\n\n");
  const auto dialogues = load_dialogues(good, &catalog);
  REQUIRE(dialogues.size() == 1);
  CHECK(dialogues[0].gold_arguments == ArgumentMap{{"name", "john"}, {"time", "3"}});

  std::istringstream unknown_api(
      R"({"id": "d1", "domain": "x", "target_api": "nope", "turns": [{"speaker": "user", "utterance": "hi"}]})");
  CHECK(code_of([&] { load_dialogues(unknown_api, &catalog); }) == ErrorCode::DatasetInvalid);

  const std::string line =
      R"({"id": "d1", "domain": "x", "target_api": "hair_appointment", "turns": [{"speaker": "user", "utterance": "hi"}]})";
  std::istringstream dup(line + "\n" + line + "\n");
  try {
    load_dialogues(dup, &catalog);
    FAIL("expected duplicate id");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DatasetInvalid);
    CHECK(e.subject() == "d1");
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream no_turns(R"({"id": "d2", "domain": "x", "target_api": "hair_appointment", "turns": []})");
  CHECK(code_of([&] { load_dialogues(no_turns, nullptr); }) == ErrorCode::DatasetInvalid);
}

TEST_CASE("dialogue lines round-trip", "[schema]") {
  const auto d = testing_support::make_dialogue("x1", "salon", "hair_appointment",
                                                ArgumentMap{{"name", "john"}, {"time", "3pm"}},
                                                {"Hi", "Hello, who is it for?", "John at 3pm"});
  std::istringstream in(dialogue_to_json_line(d));
  const auto back = load_dialogues(in, nullptr);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == d);
}
