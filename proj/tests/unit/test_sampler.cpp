#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "arground/error.hpp"
#include "arground/output_parser.hpp"
#include "arground/sampler.hpp"
#include "support/test_support.hpp"

using namespace arground;
using testing_support::hair_catalog;
using testing_support::make_dialogue;

namespace {

Dialogue booking(const std::string& id) {
  return make_dialogue(id, "salon", "hair_appointment", ArgumentMap{{"time", "3pm"}, {"name", "john"}},
                       {"Book John at 3pm", "Done?"});
}

}  // namespace

TEST_CASE("export writes one gold example per dialogue in schema order", "[sampler]") {
  std::vector<Dialogue> ds;
  for (int i = 0; i < 10; ++i) ds.push_back(booking("d" + std::to_string(i)));
  const auto examples = export_sft_dataset(ds, hair_catalog());
  REQUIRE(examples.size() == 10);
  CHECK(examples[0].completion == R"({"name": "john", "time": "3pm"})");
  CHECK(examples[0].source == ExampleSource::Gold);
  CHECK(examples[0].reward == 1.0);
  CHECK(examples[3].dialogue_id == "d3");
  CHECK(examples[0].prompt.ends_with("Arguments:"));
  CHECK(export_sft_dataset(std::vector<Dialogue>{}, hair_catalog()).empty());
}

TEST_CASE("export reports the dialogue with a bad gold key", "[sampler]") {
  auto d = booking("broken");
  d.gold_arguments.add("price", "20");
  try {
    export_sft_dataset(std::vector<Dialogue>{d}, hair_catalog());
    FAIL("expected GoldSchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GoldSchemaMismatch);
    CHECK(e.subject() == "broken");
  }
}

TEST_CASE("training examples round-trip through JSON lines", "[sampler]") {
  TrainingExample e{"prompt\nline", R"({"name": "john"})", ExampleSource::Sampled, 0.5, "d9"};
  CHECK(example_from_json_line(example_to_json_line(e)) == e);
}

TEST_CASE("only strictly positive candidates survive", "[sampler]") {
  ScriptedBackend backend;
  backend.push(R"({"name": "john", "time": "3pm"})");   // 1.0
  backend.push(R"({"name": "john"})");                  // 0.5
  backend.push(R"({"name": "john", "time": "3pm", "a": "1", "b": "2", "c": "3"})");  // -0.5
  backend.push(R"({"name": "john", "color": "red"})");  // 0.0
  const auto ds = std::vector<Dialogue>{booking("d1")};
  const auto result = rejection_sample(backend, ds, hair_catalog(), SamplerConfig{});
  REQUIRE(result.examples.size() == 3);
  CHECK(result.examples[0].source == ExampleSource::Gold);
  CHECK(result.examples[1].reward == 1.0);
  CHECK(result.examples[2].reward == 0.5);
  CHECK(result.stats.generated == 4);
  CHECK(result.stats.rejected == 2);
  CHECK(result.stats.kept == 2);
  CHECK(result.stats.mean_kept_reward == 0.75);
}

TEST_CASE("identical candidates are kept once", "[sampler]") {
  ScriptedBackend backend;
  backend.push(R"({"name": "john", "time": "3pm"})");
  backend.push(R"({"time": "3pm", "name": "John"})");
  backend.push(R"({'name': 'john', 'time': '3pm'})");
  backend.push(R"({"name": "john", "time": "3pm"})");
  const auto result = rejection_sample(backend, std::vector<Dialogue>{booking("d1")}, hair_catalog(), {});
  CHECK(result.stats.kept == 1);
  CHECK(result.stats.duplicates == 3);
  CHECK(result.examples.size() == 2);
}

TEST_CASE("unparseable candidates are counted", "[sampler]") {
  ScriptedBackend backend;
  for (int i = 0; i < 4; ++i) backend.push("no idea");
  const auto result = rejection_sample(backend, std::vector<Dialogue>{booking("d1")}, hair_catalog(), {});
  CHECK(result.stats.kept == 0);
  CHECK(result.stats.parse_failed == 4);
  CHECK(result.examples.size() == 1);
}

TEST_CASE("backend failures skip the dialogue unless strict", "[sampler]") {
  const std::vector<Dialogue> ds = {booking("d1"), booking("d2")};
  {
    ScriptedBackend backend;
    backend.push_failure("boom", "d1");
    for (int i = 0; i < 4; ++i) backend.push(R"({"name": "john", "time": "3pm"})", "d2");
    const auto result = rejection_sample(backend, ds, hair_catalog(), {});
    CHECK(result.stats.skipped == 1);
    CHECK(result.warnings.size() == 1);
    REQUIRE(result.examples.size() == 3);
    CHECK(result.examples[0].dialogue_id == "d1");
    CHECK(result.examples[1].dialogue_id == "d2");
  }
  {
    ScriptedBackend backend;
    backend.push_failure("boom", "d1");
    SamplerConfig strict;
    strict.strict = true;
    CHECK_THROWS_AS(rejection_sample(backend, ds, hair_catalog(), strict), Error);
  }
}

TEST_CASE("planted replay run keeps exactly the positive candidates", "[sampler]") {
  const auto run = testing_support::planted_run(60);
  std::istringstream log(run.replay_log);
  auto replay = ReplayBackend::open(log);
  for (std::size_t workers : {1u, 4u}) {
    SamplerConfig config;
    config.workers = workers;
    const auto result = rejection_sample(*replay, run.dialogues, run.catalog, config);
    CHECK(result.stats.kept == run.expected_kept);
    CHECK(result.stats.parse_failed == run.expected_parse_failed);
    CHECK(result.examples.size() == run.dialogues.size() + run.expected_kept);
    const auto gold = export_sft_dataset(run.dialogues, run.catalog);
    std::size_t g = 0;
    for (const auto& e : result.examples) {
      if (e.source == ExampleSource::Gold) {
        REQUIRE(g < gold.size());
        CHECK(e == gold[g++]);
      } else {
        CHECK(e.reward > 0.0);
        CHECK(serialize_argument_map(extract_argument_map(e.completion).map) == e.completion);
      }
    }
    CHECK(g == gold.size());
  }
}

TEST_CASE("K must be positive", "[sampler]") {
  ScriptedBackend backend;
  SamplerConfig config;
  config.k = 0;
  CHECK_THROWS_AS(rejection_sample(backend, std::vector<Dialogue>{booking("d1")}, hair_catalog(), config), Error);
}
