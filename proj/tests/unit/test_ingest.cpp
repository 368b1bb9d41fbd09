#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "arground/error.hpp"
#include "arground/splitter.hpp"
#include "support/test_support.hpp"

using namespace arground;

namespace {

IngestResult ingest_fixture(const std::string& name, DumpFormat format) {
  std::ifstream in(testing_support::fixture_dir() / "ingest" / name, std::ios::binary);
  REQUIRE(in);
  return ingest_external(in, format);
}

}  // namespace

TEST_CASE("SGD service and service call", "[ingest]") {
  const auto r = ingest_fixture("sgd_minimal.json", DumpFormat::Sgd);
  REQUIRE(r.catalog.size() == 1);
  const ApiSchema& s = r.catalog.at("Restaurants_1");
  REQUIRE(s.slots.size() == 4);
  CHECK(s.slots[0].name == "restaurant_name");
  CHECK(s.slots[0].kind == SlotKind::FreeText);
  CHECK(s.slots[0].required);
  CHECK(s.slots[1].required);
  CHECK(s.slots[2].kind == SlotKind::Categorical);
  CHECK(s.slots[2].allowed_values ==
        std::vector<std::string>{"inexpensive", "moderate", "expensive", "very expensive"});
  CHECK_FALSE(s.slots[2].required);

  REQUIRE(r.dialogues.size() == 1);
  const Dialogue& d = r.dialogues[0];
  CHECK(d.id == "1_00000:1");
  CHECK(d.domain == "restaurants");
  CHECK(d.target_api == "Restaurants_1");
  REQUIRE(d.turns.size() == 1);
  CHECK(d.turns[0].speaker == Speaker::User);
  CHECK(d.gold_arguments == ArgumentMap{{"city", "san jose"}, {"price_range", "moderate"}});
  CHECK(r.warnings.empty());
}

TEST_CASE("SGD frames without slot annotations are skipped", "[ingest]") {
  const auto r = ingest_fixture("sgd_missing_slots.json", DumpFormat::Sgd);
  REQUIRE(r.dialogues.size() == 1);
  CHECK(r.dialogues[0].id == "2_00001:3");
  CHECK(r.dialogues[0].turns.size() == 3);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("2_00001:1") != std::string::npos);
}

TEST_CASE("STAR api definition and query", "[ingest]") {
  const auto r = ingest_fixture("star_minimal.json", DumpFormat::Star);
  REQUIRE(r.catalog.size() == 1);
  const ApiSchema& s = r.catalog.at("hotel_search");
  REQUIRE(s.slots.size() == 3);
  CHECK(s.slots[0].name == "name");
  CHECK(s.slots[0].required);
  CHECK(s.slots[2].name == "stars");
  CHECK(s.slots[2].kind == SlotKind::Categorical);
  CHECK_FALSE(s.slots[2].required);

  REQUIRE(r.dialogues.size() == 1);
  CHECK(r.dialogues[0].id == "star-4021-2");
  CHECK(r.dialogues[0].domain == "hotel");
  CHECK(r.dialogues[0].turns.size() == 2);
  CHECK(r.dialogues[0].gold_arguments ==
        ArgumentMap{{"name", "the grand"}, {"location", "paris"}, {"stars", "4"}});
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("dumps that do not fit are rejected", "[ingest]") {
  for (auto format : {DumpFormat::Sgd, DumpFormat::Star}) {
    try {
      ingest_fixture("not_a_dump.json", format);
      FAIL("expected IngestError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IngestError);
    }
  }
  std::istringstream text("plain text");
  CHECK_THROWS_AS(ingest_external(text, DumpFormat::Sgd), Error);
  std::istringstream bad_dialogue(R"({"schema": [], "dialogues": [{"turns": []}]})");
  try {
    ingest_external(bad_dialogue, DumpFormat::Sgd);
    FAIL("expected IngestError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IngestError);
    CHECK(e.subject() == "dialogues[0]");
  }
}

TEST_CASE("ingested data passes the regular loaders", "[ingest]") {
  const auto r = ingest_fixture("sgd_minimal.json", DumpFormat::Sgd);
  const auto catalog = load_schema_catalog_text(serialize_schema_catalog(r.catalog));
  CHECK(catalog == r.catalog);
  std::istringstream lines(testing_support::dialogues_jsonl(r.dialogues));
  CHECK(load_dialogues(lines, &catalog) == r.dialogues);
}
