#include "support/test_support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "arground/error.hpp"
#include "arground/io.hpp"
#include "arground/generation.hpp"
#include "arground/output_parser.hpp"
#include "arground/prompting.hpp"
#include "arground/text.hpp"
#include "cli.hpp"

namespace testing_support {

namespace {
std::atomic<unsigned> counter{0};
}

TempDir::TempDir() {
  std::random_device rd;
  const auto name = "arground-test-" + std::to_string(rd()) + "-" + std::to_string(counter++);
  path_ = fs::temp_directory_path() / name;
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixture_dir() { return ARGROUND_FIXTURE_DIR; }

std::string slurp(const fs::path& path) { return arground::read_file(path); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

arground::ApiSchema hair_schema() {
  arground::ApiSchema s;
  s.api_name = "hair_appointment";
  s.description = "Book a haircut";
  s.slots = {
      {.name = "name", .kind = arground::SlotKind::FreeText, .description = "customer name"},
      {.name = "time", .kind = arground::SlotKind::Time, .description = "appointment time"},
      {.name = "stylist",
       .kind = arground::SlotKind::Categorical,
       .description = "preferred stylist",
       .allowed_values = {"jess", "jack"}},
  };
  return s;
}

arground::SchemaCatalog hair_catalog() {
  arground::SchemaCatalog c;
  auto s = hair_schema();
  c.emplace(s.api_name, s);
  return c;
}

arground::Dialogue make_dialogue(std::string id, std::string domain, std::string api,
                                 arground::ArgumentMap gold, std::vector<std::string> utterances) {
  arground::Dialogue d;
  d.id = std::move(id);
  d.domain = std::move(domain);
  d.target_api = std::move(api);
  d.gold_arguments = std::move(gold);
  bool user = true;
  for (auto& u : utterances) {
    d.turns.push_back({user ? arground::Speaker::User : arground::Speaker::Agent, std::move(u)});
    user = !user;
  }
  return d;
}

std::string catalog_json(const arground::SchemaCatalog& catalog) {
  return arground::serialize_schema_catalog(catalog);
}

std::string dialogues_jsonl(const std::vector<arground::Dialogue>& dialogues) {
  std::string out;
  for (const auto& d : dialogues) out += arground::dialogue_to_json_line(d) + "\n";
  return out;
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = arground::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<ParserFixture> load_parser_fixtures() {
  std::vector<ParserFixture> out;
  for (const auto& entry : fs::directory_iterator(fixture_dir() / "malformed")) {
    if (entry.path().extension() != ".txt") continue;
    ParserFixture f;
    f.name = entry.path().stem().string();
    f.raw = slurp(entry.path());
    fs::path expected = entry.path();
    expected.replace_extension(".expected");
    std::istringstream lines(slurp(expected));
    std::getline(lines, f.expected);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("warning: ", 0) == 0) f.warnings.push_back(line.substr(9));
    }
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::string check_parser_fixture(const ParserFixture& f) {
  std::string got;
  std::vector<std::string> warnings;
  try {
    auto outcome = arground::extract_argument_map(f.raw);
    got = arground::serialize_argument_map(outcome.map);
    warnings = std::move(outcome.warnings);
  } catch (const arground::Error& e) {
    got = std::string(arground::error_name(e.code()));
  }
  if (got != f.expected) return f.name + ": expected " + f.expected + ", got " + got;
  auto want = f.warnings;
  std::sort(want.begin(), want.end());
  std::sort(warnings.begin(), warnings.end());
  if (want != warnings) {
    std::string msg = f.name + ": warnings differ, got [";
    for (const auto& w : warnings) msg += w + ";";
    return msg + "]";
  }
  return {};
}

std::size_t parser_fuzz_failures(std::size_t cases, unsigned seed) {
  std::mt19937 rng(seed);
  const std::string structural = "{}[]:,'\"\\ \nabc123`";
  std::size_t failures = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    std::string raw;
    const std::size_t len = rng() % 96;
    const bool structured = i % 2 == 1;
    for (std::size_t k = 0; k < len; ++k) {
      raw.push_back(structured ? structural[rng() % structural.size()]
                               : static_cast<char>(rng() & 0xFF));
    }
    try {
      const auto outcome = arground::extract_argument_map(raw);
      for (const auto& [key, value] : outcome.map) {
        if (key.empty() || value.empty() || arground::canonicalize_key(key) != key ||
            arground::canonicalize_value(value) != value) {
          ++failures;
          break;
        }
      }
    } catch (const arground::Error& e) {
      if (e.code() != arground::ErrorCode::NoArgumentObject &&
          e.code() != arground::ErrorCode::MalformedArguments) {
        ++failures;
      }
    } catch (...) {
      ++failures;
    }
  }
  return failures;
}

PlantedRun planted_run(std::size_t n_dialogues, std::size_t k, double temperature,
                       std::size_t max_tokens) {
  static const std::vector<std::string> names = {"john", "maria", "li wei", "fatima", "ola", "sam", "jessica"};
  static const std::vector<std::string> times = {"3pm", "10am", "4:30 pm", "15:00", "11am"};
  PlantedRun run;
  run.catalog = hair_catalog();
  const auto& schema = run.catalog.at("hair_appointment");

  enum Kind { Perfect, Half, Zero, Negative, Garbage };
  for (std::size_t i = 0; i < n_dialogues; ++i) {
    const std::string name = names[i % names.size()];
    const std::string time = times[i % times.size()];
    auto d = make_dialogue("dlg-" + std::to_string(1000 + i), i % 2 ? "salon" : "barber", "hair_appointment",
                           arground::ArgumentMap{{"name", name}, {"time", time}},
                           {"I'd like a haircut (request " + std::to_string(i) + ")", "Sure, what name?",
                            "It's " + name + ", around " + time});

    std::vector<std::string> outputs;
    std::set<int> positive;
    for (std::size_t j = 0; j < k; ++j) {
      int kind = static_cast<int>((i + j) % 5);
      if (i % 7 == 0 && j + 1 == k) kind = Perfect;
      switch (kind) {
        case Perfect:
          outputs.push_back("{\"name\": \"" + name + "\", \"time\": \"" + time + "\"}");
          positive.insert(Perfect);
          break;
        case Half:
          outputs.push_back("Here you go: {'name': '" + name + "'}");
          positive.insert(Half);
          break;
        case Zero:
          outputs.push_back("{}");
          break;
        case Negative:
          outputs.push_back("{\"color\": \"red\", \"size\": \"xl\", \"name\": \"zed\"}");
          break;
        default:
          outputs.push_back("I am not sure what you mean.");
          ++run.expected_parse_failed;
          break;
      }
    }
    run.expected_kept += positive.size();

    arground::GenerationRecord record;
    record.request.prompt = arground::build_default_prompt(schema, d).text;
    record.request.temperature = temperature;
    record.request.max_tokens = max_tokens;
    record.request.n_samples = k;
    record.request.tag = d.id;
    record.outputs = std::move(outputs);
    record.backend_id = "http:planted";
    record.timestamp = std::chrono::system_clock::time_point(std::chrono::milliseconds(1700000000000 + i));
    record.latency = std::chrono::duration<double, std::milli>(12.5);
    run.replay_log += arground::record_to_json_line(record) + "\n";
    run.dialogues.push_back(std::move(d));
  }
  return run;
}

}  // namespace testing_support
