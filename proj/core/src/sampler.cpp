#include "arground/sampler.hpp"

#include <optional>
#include <set>

#include "arground/error.hpp"
#include "arground/output_parser.hpp"
#include "arground/parallel.hpp"
#include "arground/scorer.hpp"
#include "json.hpp"

namespace arground {

std::string_view to_string(ExampleSource source) noexcept {
  return source == ExampleSource::Gold ? "gold" : "sampled";
}

std::string example_to_json_line(const TrainingExample& e) {
  nlohmann::ordered_json j;
  j["prompt"] = e.prompt;
  j["completion"] = e.completion;
  j["source"] = std::string(to_string(e.source));
  j["reward"] = e.reward;
  j["dialogue_id"] = e.dialogue_id;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

TrainingExample example_from_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TrainingExample e;
    e.prompt = j.at("prompt").get<std::string>();
    e.completion = j.at("completion").get<std::string>();
    const std::string source = j.at("source").get<std::string>();
    if (source == "gold") {
      e.source = ExampleSource::Gold;
    } else if (source == "sampled") {
      e.source = ExampleSource::Sampled;
    } else {
      throw Error(ErrorCode::DatasetInvalid, "unknown source '" + source + "'");
    }
    e.reward = j.at("reward").get<double>();
    e.dialogue_id = j.at("dialogue_id").get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::DatasetInvalid, std::string("malformed training example: ") + ex.what());
  }
}

namespace {

const ApiSchema& schema_for(const Dialogue& d, const SchemaCatalog& catalog) {
  auto it = catalog.find(d.target_api);
  if (it == catalog.end()) {
    throw Error(ErrorCode::DatasetInvalid,
                "dialogue '" + d.id + "' targets unknown api '" + d.target_api + "'", d.id);
  }
  return it->second;
}

TrainingExample gold_example(const Dialogue& d, const ApiSchema& schema,
                             const PromptTemplates& templates) {
  for (const auto& [key, value] : d.gold_arguments) {
    if (schema.find_slot(key) == nullptr) {
      throw Error(ErrorCode::GoldSchemaMismatch,
                  "dialogue '" + d.id + "': gold key '" + key + "' is not a slot of '" +
                      schema.api_name + "'",
                  d.id);
    }
  }
  TrainingExample e;
  e.prompt = build_default_prompt(schema, d, templates).text;
  e.completion = serialize_argument_map(order_by_schema(d.gold_arguments, schema), KeyOrder::Given);
  e.source = ExampleSource::Gold;
  e.reward = 1.0;
  e.dialogue_id = d.id;
  return e;
}

struct DialogueOutcome {
  std::vector<TrainingExample> kept;
  SamplerStats stats;  // per-dialogue counters, summed afterwards
  std::optional<std::string> skip_reason;
};

}  // namespace

std::vector<TrainingExample> export_sft_dataset(std::span<const Dialogue> dialogues,
                                                const SchemaCatalog& catalog,
                                                const PromptTemplates& templates) {
  std::vector<TrainingExample> out;
  out.reserve(dialogues.size());
  for (const auto& d : dialogues) out.push_back(gold_example(d, schema_for(d, catalog), templates));
  return out;
}

std::string stats_to_json(const SamplerStats& s) {
  nlohmann::ordered_json j;
  j["dialogues"] = s.dialogues;
  j["skipped"] = s.skipped;
  j["generated"] = s.generated;
  j["parse_failed"] = s.parse_failed;
  j["rejected"] = s.rejected;
  j["duplicates"] = s.duplicates;
  j["kept"] = s.kept;
  j["mean_kept_reward"] = s.mean_kept_reward;
  return j.dump(2) + "\n";
}

SamplerResult rejection_sample(Backend& backend, std::span<const Dialogue> dialogues,
                               const SchemaCatalog& catalog, const SamplerConfig& config,
                               const PromptTemplates& templates) {
  if (config.k == 0) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");

  // Data problems are fatal and surface before any backend traffic.
  std::vector<TrainingExample> gold = export_sft_dataset(dialogues, catalog, templates);

  std::vector<DialogueOutcome> outcomes(dialogues.size());
  parallel_for_index(dialogues.size(), config.workers, [&](std::size_t i) {
    const Dialogue& d = dialogues[i];
    const ApiSchema& schema = schema_for(d, catalog);
    DialogueOutcome& out = outcomes[i];

    GenerationRequest request;
    request.prompt = gold[i].prompt;
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.n_samples = config.k;
    request.tag = d.id;

    GenerationRecord record;
    try {
      record = backend.generate(request);
    } catch (const Error& e) {
      if (config.strict || error_category(e.code()) != ErrorCategory::Backend) throw;
      out.skip_reason = e.what();
      return;
    }

    std::set<std::string> seen;
    double reward_sum = 0.0;
    for (const std::string& output : record.outputs) {
      ++out.stats.generated;
      ArgumentMap map;
      try {
        map = extract_argument_map(output).map;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoArgumentObject && e.code() != ErrorCode::MalformedArguments) {
          throw;
        }
        ++out.stats.parse_failed;
        continue;
      }
      const ErrorBreakdown breakdown = classify_errors(map, d.gold_arguments, schema);
      if (!(breakdown.reward > 0.0)) {
        ++out.stats.rejected;
        continue;
      }
      if (!seen.insert(serialize_argument_map(map, KeyOrder::Sorted)).second) {
        ++out.stats.duplicates;
        continue;
      }
      TrainingExample e;
      e.prompt = gold[i].prompt;
      e.completion = serialize_argument_map(map, KeyOrder::Given);
      e.source = ExampleSource::Sampled;
      e.reward = breakdown.reward;
      e.dialogue_id = d.id;
      out.kept.push_back(std::move(e));
      reward_sum += breakdown.reward;
    }
    out.stats.kept = out.kept.size();
    out.stats.mean_kept_reward = reward_sum;  // summed here, averaged below
  });

  SamplerResult result;
  result.stats.dialogues = dialogues.size();
  double reward_sum = 0.0;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    DialogueOutcome& out = outcomes[i];
    result.examples.push_back(std::move(gold[i]));
    if (out.skip_reason) {
      ++result.stats.skipped;
      result.warnings.push_back("skipped dialogue '" + dialogues[i].id + "': " + *out.skip_reason);
      continue;
    }
    for (auto& e : out.kept) result.examples.push_back(std::move(e));
    result.stats.generated += out.stats.generated;
    result.stats.parse_failed += out.stats.parse_failed;
    result.stats.rejected += out.stats.rejected;
    result.stats.duplicates += out.stats.duplicates;
    result.stats.kept += out.stats.kept;
    reward_sum += out.stats.mean_kept_reward;
  }
  if (result.stats.kept > 0) {
    result.stats.mean_kept_reward = reward_sum / static_cast<double>(result.stats.kept);
  }
  return result;
}

}  // namespace arground
