#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "arground/metrics.hpp"
#include "arground/output_parser.hpp"
#include "arground/schema.hpp"
#include "arground/scorer.hpp"
#include "arground/text.hpp"

using namespace arground;

namespace {

ApiSchema bench_schema() {
  ApiSchema s;
  s.api_name = "book_table";
  s.description = "Reserve a table";
  s.slots = {{"restaurant", SlotKind::FreeText, "restaurant name", {}, true},
             {"party_size", SlotKind::Integer, "number of guests", {}, true},
             {"date", SlotKind::Date, "reservation date", {}, true},
             {"time", SlotKind::Time, "reservation time", {}, true},
             {"seating", SlotKind::Categorical, "indoor or outdoor", {"indoor", "outdoor"}, false}};
  return s;
}

std::string random_word(std::mt19937_64& rng, std::size_t len) {
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng() % 26));
  return w;
}

}  // namespace

static void BM_ClassifyErrors(benchmark::State& state) {
  const ApiSchema schema = bench_schema();
  const ArgumentMap gold{{"restaurant", "the golden dragon"}, {"party_size", "4"}, {"date", "2024-03-15"},
                         {"time", "7pm"}};
  const ArgumentMap pred{{"restaurant", "golden dragon"}, {"party_size", "four"}, {"time", "19:00"},
                         {"seating", "outdoor"}, {"cuisine", "chinese"}};
  for (auto _ : state) benchmark::DoNotOptimize(classify_errors(pred, gold, schema));
}
BENCHMARK(BM_ClassifyErrors);

static void BM_ExtractArgumentMap(benchmark::State& state) {
  const std::string clean = R"({"restaurant": "the golden dragon", "party_size": 4, "time": "7pm"})";
  const std::string messy =
      "Sure! Here are the arguments:\n```json\n{'restaurant': 'the golden dragon', party_size: 4, "
      "'time': '7pm',}\n```\nLet me know if you need anything else.";
  const std::string& raw = state.range(0) == 0 ? clean : messy;
  for (auto _ : state) benchmark::DoNotOptimize(extract_argument_map(raw));
}
BENCHMARK(BM_ExtractArgumentMap)->Arg(0)->Arg(1);

static void BM_Levenshtein(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::string a = random_word(rng, static_cast<std::size_t>(state.range(0)));
  const std::string b = random_word(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein_distance(a, b));
}
BENCHMARK(BM_Levenshtein)->Arg(8)->Arg(32)->Arg(128);

static void BM_CorpusBleu(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<PredGoldPair> pairs;
  for (int64_t i = 0; i < state.range(0); ++i) {
    ArgumentMap gold{{"restaurant", random_word(rng, 10)}, {"time", "7pm"}};
    ArgumentMap pred{{"restaurant", random_word(rng, 10)}, {"time", "7pm"}};
    pairs.emplace_back(std::move(pred), std::move(gold));
  }
  for (auto _ : state) benchmark::DoNotOptimize(corpus_bleu(pairs));
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
