#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "arground/error.hpp"
#include "arground/output_parser.hpp"
#include "support/test_support.hpp"

using namespace arground;

TEST_CASE("clean dictionary output", "[parser]") {
  const auto outcome = extract_argument_map(R"({"name": "John", "time": "3pm"})");
  CHECK(outcome.map == ArgumentMap{{"name", "john"}, {"time", "3pm"}});
  CHECK(outcome.warnings.empty());
}

TEST_CASE("prose, single quotes and a trailing comma", "[parser]") {
  const auto outcome = extract_argument_map("Sure! Here you go: {'name': 'John',}");
  CHECK(outcome.map == ArgumentMap{{"name", "john"}});
  CHECK(std::count(outcome.warnings.begin(), outcome.warnings.end(), "converted single quotes") == 1);
  CHECK(std::count(outcome.warnings.begin(), outcome.warnings.end(), "removed trailing comma") == 1);
}

TEST_CASE("refusals have no argument object", "[parser]") {
  try {
    extract_argument_map("I cannot help with that.");
    FAIL("expected NoArgumentObject");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoArgumentObject);
  }
}

TEST_CASE("malformed regions carry the offending span", "[parser]") {
  try {
    extract_argument_map(R"(answer: {"name": {"first": "john"}})");
    FAIL("expected MalformedArguments");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedArguments);
    CHECK(e.subject() == R"({"name": {"first": "john"}})");
  }
}

TEST_CASE("each repair is reported once", "[parser]") {
  const auto outcome = extract_argument_map("{'a': 'x', 'b': 'y', 'c': 'z'}");
  CHECK(outcome.warnings == std::vector<std::string>{"converted single quotes"});
}

TEST_CASE("malformed-output fixtures", "[parser]") {
  const auto fixtures = testing_support::load_parser_fixtures();
  REQUIRE(fixtures.size() >= 20);
  for (const auto& f : fixtures) {
    INFO(f.name);
    CHECK(testing_support::check_parser_fixture(f).empty());
  }
}

TEST_CASE("random bytes never escape the error contract", "[parser]") {
  CHECK(testing_support::parser_fuzz_failures(10000, 1234) == 0);
}

TEST_CASE("extraction is deterministic", "[parser]") {
  const std::string raw = "```json\n{name: x, 'b': None, c: 3,}\n``` trailing";
  const auto a = extract_argument_map(raw);
  const auto b = extract_argument_map(raw);
  CHECK(a.map == b.map);
  CHECK(a.warnings == b.warnings);
}

TEST_CASE("serialization in given and sorted order", "[parser]") {
  CHECK(serialize_argument_map(ArgumentMap{{"name", "john"}}) == R"({"name": "john"})");
  CHECK(serialize_argument_map(ArgumentMap{}) == "{}");
  const ArgumentMap m{{"time", "3pm"}, {"name", "john"}};
  CHECK(serialize_argument_map(m, KeyOrder::Sorted) == R"({"name": "john", "time": "3pm"})");
  CHECK(serialize_argument_map(m, KeyOrder::Given) == R"({"time": "3pm", "name": "john"})");
}

TEST_CASE("serialize then extract is the identity on valid maps", "[parser]") {
  std::mt19937 rng(99);
  const std::vector<std::string> key_parts = {"name", "time", "x", "stylist", "2", "a_b", "caf\xc3\xa9"};
  const std::vector<std::string> value_parts = {"john", "3pm", "{", "}", "'", "\"", "\\", ",", ":", "new york",
                                                "none", "null", "caf\xc3\xa9", "\xe2\x82\xac", "a b", "\t"};
  for (int i = 0; i < 3000; ++i) {
    ArgumentMap m;
    const int n = static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) {
      std::string key = key_parts[rng() % key_parts.size()] + std::to_string(k);
      std::string value;
      for (int p = 1 + static_cast<int>(rng() % 3); p > 0; --p) value += value_parts[rng() % value_parts.size()];
      try {
        m.add(key, value);
      } catch (const Error&) {
        // blank after canonicalization; leave it out
      }
    }
    const std::string text = serialize_argument_map(m);
    INFO(text);
    REQUIRE(extract_argument_map(text).map == m);
  }
}
