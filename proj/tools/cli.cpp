#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "arground/error.hpp"
#include "arground/generation.hpp"
#include "arground/io.hpp"
#include "arground/metrics.hpp"
#include "arground/output_parser.hpp"
#include "arground/parallel.hpp"
#include "arground/prompting.hpp"
#include "arground/report.hpp"
#include "arground/sampler.hpp"
#include "arground/schema.hpp"
#include "arground/scorer.hpp"
#include "arground/splitter.hpp"
#include "arground/text.hpp"
#include "json.hpp"

namespace arground::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string dump(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

SchemaCatalog load_catalog(const std::string& path) {
  return load_schema_catalog_text(read_file(path));
}

std::vector<Dialogue> load_dialogue_file(const std::string& path, const SchemaCatalog* catalog) {
  std::istringstream in(read_file(path));
  return load_dialogues(in, catalog);
}

PromptTemplates load_templates(const std::string& default_path, const std::string& slot_path) {
  PromptTemplates t = PromptTemplates::builtin();
  if (!default_path.empty()) {
    t.default_template = read_file(default_path);
    t.version = "custom";
  }
  if (!slot_path.empty()) {
    t.slot_template = read_file(slot_path);
    t.version = "custom";
  }
  return t;
}

std::string backend_kind(const std::string& spec) {
  return spec.substr(0, spec.find(':'));
}

// Hash of the file behind a mock/replay spec; live backends have none.
std::optional<std::string> backend_input_hash(const std::string& spec) {
  const auto kind = backend_kind(spec);
  if (kind == "mock" || kind == "replay") return sha256_hex(read_file(spec.substr(spec.find(':') + 1)));
  return std::nullopt;
}

std::shared_ptr<Backend> open_backend(const std::string& spec, std::size_t max_in_flight) {
  return std::make_shared<BoundedBackend>(make_backend(spec), max_in_flight);
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

struct Artifact {
  std::string command;
  Json config = Json::object();
  std::map<std::string, std::string> input_hashes;
  std::string template_hash;

  std::string metadata() const {
    RunMetadata meta;
    meta.command = command;
    meta.config_hash = sha256_hex(dump(config));
    meta.template_hash = template_hash;
    meta.input_hashes = input_hashes;
    return run_metadata_json(meta);
  }
};

void write_with_metadata(const fs::path& path, const std::string& contents, const Artifact& art) {
  atomic_write_file(path, contents);
  fs::path meta = path;
  meta += ".meta.json";
  atomic_write_file(meta, art.metadata());
}

Json map_to_json(const ArgumentMap& map) {
  Json j = Json::object();
  for (const auto& [k, v] : map) j[k] = v;
  return j;
}

ArgumentMap map_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_object()) throw Error(ErrorCode::DatasetInvalid, context + ": arguments must be an object");
  ArgumentMap map;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) continue;
    if (value.is_object() || value.is_array()) {
      throw Error(ErrorCode::DatasetInvalid, context + ": value of '" + key + "' is not a scalar");
    }
    const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    if (canonicalize_value(text).empty()) continue;
    try {
      map.add(key, text);
    } catch (const Error& e) {
      throw Error(ErrorCode::DatasetInvalid, context + ": " + e.what());
    }
  }
  return map;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::DatasetInvalid,
                  path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

const ApiSchema& schema_of(const Dialogue& d, const SchemaCatalog& catalog) {
  auto it = catalog.find(d.target_api);
  if (it == catalog.end()) {
    throw Error(ErrorCode::DatasetInvalid, "dialogue '" + d.id + "' targets unknown api", d.id);
  }
  return it->second;
}

// ---------------------------------------------------------------------------

struct ExportSftOptions {
  std::string dialogues, schemas, out, template_path;
};

int cmd_export_sft(const ExportSftOptions& o, std::ostream& out) {
  const auto catalog = load_catalog(o.schemas);
  const auto dialogues = load_dialogue_file(o.dialogues, &catalog);
  const auto templates = load_templates(o.template_path, "");
  const auto examples = export_sft_dataset(dialogues, catalog, templates);

  std::vector<std::string> lines;
  for (const auto& e : examples) lines.push_back(example_to_json_line(e));

  Artifact art;
  art.command = "export-sft";
  art.template_hash = templates.hash();
  art.input_hashes = {{"dialogues", sha256_hex(read_file(o.dialogues))},
                      {"schemas", sha256_hex(read_file(o.schemas))}};
  write_with_metadata(o.out, join_lines(lines), art);
  out << "wrote " << examples.size() << " gold examples to " << o.out << "\n";
  return kExitOk;
}

struct RejectSampleOptions {
  std::string dialogues, schemas, backend, out, template_path;
  std::size_t k = 4;
  double temperature = 0.8;
  std::size_t max_tokens = 256;
  std::size_t max_in_flight = kDefaultMaxInFlight;
  bool strict = false;
};

int cmd_reject_sample(const RejectSampleOptions& o, std::ostream& out, std::ostream& err) {
  const auto catalog = load_catalog(o.schemas);
  const auto dialogues = load_dialogue_file(o.dialogues, &catalog);
  const auto templates = load_templates(o.template_path, "");
  auto backend = open_backend(o.backend, o.max_in_flight);

  SamplerConfig config;
  config.k = o.k;
  config.temperature = o.temperature;
  config.max_tokens = o.max_tokens;
  config.strict = o.strict;
  config.workers = o.max_in_flight;
  const SamplerResult result = rejection_sample(*backend, dialogues, catalog, config, templates);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  std::vector<std::string> lines;
  for (const auto& e : result.examples) lines.push_back(example_to_json_line(e));

  Artifact art;
  art.command = "reject-sample";
  art.config = {{"k", o.k},
                {"temperature", o.temperature},
                {"max_tokens", o.max_tokens},
                {"strict", o.strict},
                {"backend", backend_kind(o.backend)}};
  art.template_hash = templates.hash();
  art.input_hashes = {{"dialogues", sha256_hex(read_file(o.dialogues))},
                      {"schemas", sha256_hex(read_file(o.schemas))}};
  if (auto h = backend_input_hash(o.backend)) art.input_hashes["backend_log"] = *h;

  fs::path stats_path = o.out;
  stats_path.replace_extension(".stats.json");
  // Stats first: the dataset only appears once everything else is in place.
  atomic_write_file(stats_path, stats_to_json(result.stats));
  write_with_metadata(o.out, join_lines(lines), art);
  out << "kept " << result.stats.kept << " of " << result.stats.generated
      << " sampled outputs; wrote " << result.examples.size() << " examples to " << o.out << "\n";
  return kExitOk;
}

struct FillOptions {
  std::string mode = "default";
  std::string backend, dialogues, schemas, out, template_path, slot_template_path;
  std::string model, split = "test";
  std::size_t max_in_flight = kDefaultMaxInFlight;
  std::size_t max_tokens = 256;
};

int cmd_fill(const FillOptions& o, std::ostream& out, std::ostream& err) {
  const auto catalog = load_catalog(o.schemas);
  const auto dialogues = load_dialogue_file(o.dialogues, &catalog);
  const auto templates = load_templates(o.template_path, o.slot_template_path);
  auto backend = open_backend(o.backend, o.max_in_flight);
  const std::string model = o.model.empty() ? backend->id() : o.model;
  const bool multistep = o.mode == "multistep";

  std::vector<std::string> lines(dialogues.size());
  std::vector<std::vector<std::string>> warnings(dialogues.size());
  parallel_for_index(dialogues.size(), o.max_in_flight, [&](std::size_t i) {
    const Dialogue& d = dialogues[i];
    const ApiSchema& schema = schema_of(d, catalog);
    ArgumentMap prediction;
    Json outputs = Json::array();
    std::vector<std::string> notes;
    if (multistep) {
      auto result = run_multistep(*backend, schema, d, templates,
                                  {.temperature = 0.0, .max_tokens = std::min<std::size_t>(o.max_tokens, 64)});
      prediction = std::move(result.arguments);
      for (const auto& r : result.transcript) outputs.push_back(r.outputs.empty() ? "" : r.outputs.front());
      notes = std::move(result.warnings);
    } else {
      auto result = run_single_shot(*backend, schema, d, templates,
                                    {.temperature = 0.0, .max_tokens = o.max_tokens});
      prediction = std::move(result.arguments);
      for (const auto& text : result.record.outputs) outputs.push_back(text);
      notes = std::move(result.warnings);
    }
    const ErrorBreakdown breakdown = classify_errors(prediction, d.gold_arguments, schema);

    Json row;
    row["id"] = d.id;
    row["model"] = model;
    row["split"] = o.split;
    row["mode"] = multistep ? "multistep" : "default";
    row["arguments"] = map_to_json(prediction);
    row["outputs"] = std::move(outputs);
    row["warnings"] = notes;
    row["breakdown"] = Json::parse(breakdown_to_json(breakdown));
    lines[i] = dump(row);
    for (auto& n : notes) warnings[i].push_back(d.id + ": " + n);
  });
  for (const auto& per : warnings) {
    for (const auto& w : per) err << "warning: " << w << "\n";
  }

  Artifact art;
  art.command = "fill";
  art.config = {{"mode", multistep ? "multistep" : "default"},
                {"backend", backend_kind(o.backend)},
                {"model", model},
                {"split", o.split},
                {"max_tokens", o.max_tokens}};
  art.template_hash = templates.hash();
  art.input_hashes = {{"dialogues", sha256_hex(read_file(o.dialogues))},
                      {"schemas", sha256_hex(read_file(o.schemas))}};
  if (auto h = backend_input_hash(o.backend)) art.input_hashes["backend_log"] = *h;
  write_with_metadata(o.out, join_lines(lines), art);
  out << "wrote " << lines.size() << " predictions to " << o.out << "\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string pred, gold, schemas, out, breakdowns_out;
  ReportLabels labels;
};

ArgumentMap prediction_from_row(const nlohmann::json& row, const std::string& id) {
  if (auto it = row.find("arguments"); it != row.end()) {
    return map_from_json(*it, "prediction '" + id + "'");
  }
  for (const char* field : {"raw", "output"}) {
    if (auto it = row.find(field); it != row.end() && it->is_string()) {
      try {
        return extract_argument_map(it->get<std::string>()).map;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoArgumentObject && e.code() != ErrorCode::MalformedArguments) throw;
        return {};
      }
    }
  }
  throw Error(ErrorCode::DatasetInvalid, "prediction '" + id + "' has neither arguments nor raw output", id);
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const auto catalog = load_catalog(o.schemas);
  const auto gold = load_dialogue_file(o.gold, &catalog);

  std::map<std::string, ArgumentMap> predictions;
  for (const auto& row : read_jsonl(o.pred)) {
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string()) {
      throw Error(ErrorCode::DatasetInvalid, "prediction rows need a string 'id'");
    }
    const std::string id = row["id"].get<std::string>();
    if (predictions.count(id)) {
      throw Error(ErrorCode::AlignmentError, "prediction '" + id + "' appears twice", id);
    }
    predictions.emplace(id, prediction_from_row(row, id));
  }

  std::vector<PredGoldPair> pairs;
  std::vector<ErrorBreakdown> breakdowns;
  std::vector<std::string> breakdown_lines;
  for (const auto& d : gold) {
    auto it = predictions.find(d.id);
    if (it == predictions.end()) {
      throw Error(ErrorCode::AlignmentError, "no prediction for dialogue '" + d.id + "'", d.id);
    }
    breakdowns.push_back(classify_errors(it->second, d.gold_arguments, schema_of(d, catalog)));
    pairs.emplace_back(std::move(it->second), d.gold_arguments);
    predictions.erase(it);

    Json row;
    row["id"] = d.id;
    row["model"] = o.labels.backend;
    row["split"] = o.labels.split;
    row["breakdown"] = Json::parse(breakdown_to_json(breakdowns.back()));
    breakdown_lines.push_back(dump(row));
  }
  if (!predictions.empty()) {
    throw Error(ErrorCode::AlignmentError,
                "prediction '" + predictions.begin()->first + "' has no gold dialogue",
                predictions.begin()->first);
  }

  const MetricsReport report = evaluate_corpus(pairs, breakdowns);
  const std::string csv = metrics_csv_header() + "\n" + metrics_csv_row(report, o.labels) + "\n";

  Artifact art;
  art.command = "evaluate";
  art.config = {{"dataset", o.labels.dataset}, {"split", o.labels.split}, {"backend", o.labels.backend}};
  art.template_hash = PromptTemplates::builtin().hash();
  art.input_hashes = {{"pred", sha256_hex(read_file(o.pred))},
                      {"gold", sha256_hex(read_file(o.gold))},
                      {"schemas", sha256_hex(read_file(o.schemas))}};
  if (!o.breakdowns_out.empty()) write_with_metadata(o.breakdowns_out, join_lines(breakdown_lines), art);
  write_with_metadata(o.out, csv, art);
  out << csv;
  return kExitOk;
}

struct SplitOptions {
  std::string dialogues, schemas, out_dir;
  double fraction = 0.2;
  std::uint64_t seed = 0;
  std::vector<std::string> holdout;
  std::string synonyms;
};

int write_split(const SplitResult& split, const std::string& manifest, const SplitOptions& o,
                Artifact art, std::ostream& out, std::ostream& err) {
  for (const auto& w : split.warnings) err << "warning: " << w << "\n";
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  std::vector<std::string> train;
  std::vector<std::string> test;
  for (const auto& d : split.train) train.push_back(dialogue_to_json_line(d));
  for (const auto& d : split.test) test.push_back(dialogue_to_json_line(d));
  art.input_hashes["dialogues"] = sha256_hex(read_file(o.dialogues));
  atomic_write_file(dir / "train.jsonl", join_lines(train));
  atomic_write_file(dir / "test.jsonl", join_lines(test));
  write_with_metadata(dir / "manifest.json", manifest, art);
  out << "train " << split.train.size() << ", test " << split.test.size() << " -> " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_split_in_domain(const SplitOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<SchemaCatalog> catalog;
  if (!o.schemas.empty()) catalog = load_catalog(o.schemas);
  const auto dialogues = load_dialogue_file(o.dialogues, catalog ? &*catalog : nullptr);
  const SplitResult split = split_in_domain(dialogues, o.fraction, o.seed);
  Artifact art;
  art.command = "split in-domain";
  art.config = {{"fraction", o.fraction}, {"seed", o.seed}};
  return write_split(split, in_domain_manifest(split, o.fraction, o.seed), o, art, out, err);
}

int cmd_split_out_of_domain(const SplitOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<SchemaCatalog> catalog;
  if (!o.schemas.empty()) catalog = load_catalog(o.schemas);
  const auto dialogues = load_dialogue_file(o.dialogues, catalog ? &*catalog : nullptr);
  SynonymMap synonyms;
  Artifact art;
  if (!o.synonyms.empty()) {
    std::istringstream in(read_file(o.synonyms));
    synonyms = load_synonym_map(in);
    art.input_hashes["synonyms"] = sha256_hex(read_file(o.synonyms));
  }
  std::set<std::string> holdout;
  for (const auto& h : o.holdout) {
    std::stringstream parts(h);
    std::string item;
    while (std::getline(parts, item, ',')) {
      if (!trim(item).empty()) holdout.insert(std::string(trim(item)));
    }
  }
  const SplitResult split = split_out_of_domain(dialogues, holdout, synonyms);
  art.command = "split out-of-domain";
  art.config = {{"holdout", std::vector<std::string>(holdout.begin(), holdout.end())}};
  return write_split(split, out_of_domain_manifest(split, holdout, synonyms), o, art, out, err);
}

struct ReportOptions {
  std::string breakdowns, group_by = "model", out;
};

int cmd_report(const ReportOptions& o, std::ostream& out) {
  std::vector<GroupedBreakdown> grouped;
  for (const auto& row : read_jsonl(o.breakdowns)) {
    if (!row.is_object() || !row.contains("breakdown")) {
      throw Error(ErrorCode::DatasetInvalid, "breakdown rows need a 'breakdown' object");
    }
    std::string group = "unknown";
    if (auto it = row.find(o.group_by); it != row.end() && it->is_string()) group = it->get<std::string>();
    grouped.push_back({group, breakdown_from_json(row["breakdown"].dump())});
  }
  const std::string csv = emit_error_panel(grouped);
  Artifact art;
  art.command = "report";
  art.config = {{"group_by", o.group_by}};
  art.input_hashes = {{"breakdowns", sha256_hex(read_file(o.breakdowns))}};
  write_with_metadata(o.out, csv, art);
  out << csv;
  return kExitOk;
}

struct IngestOptions {
  std::string format = "sgd";
  std::string bundle, schema;
  std::vector<std::string> inputs;
  std::string out_dialogues, out_schemas;
};

int cmd_ingest(const IngestOptions& o, std::ostream& out, std::ostream& err) {
  std::string bundle_text;
  Artifact art;
  art.command = "ingest";
  art.config = {{"format", o.format}};
  if (!o.bundle.empty()) {
    bundle_text = read_file(o.bundle);
    art.input_hashes["bundle"] = sha256_hex(bundle_text);
  } else {
    if (o.schema.empty()) {
      throw Error(ErrorCode::InvalidArgument, "ingest needs --bundle or --schema with --input files");
    }
    nlohmann::json bundle;
    const char* schema_key = o.format == "sgd" ? "schema" : "apis";
    try {
      bundle[schema_key] = nlohmann::json::parse(read_file(o.schema));
      bundle["dialogues"] = nlohmann::json::array();
      for (const auto& path : o.inputs) {
        auto part = nlohmann::json::parse(read_file(path));
        if (part.is_array()) {
          for (auto& d : part) bundle["dialogues"].push_back(std::move(d));
        } else {
          bundle["dialogues"].push_back(std::move(part));
        }
        art.input_hashes["input:" + fs::path(path).filename().string()] = sha256_hex(read_file(path));
      }
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::IngestError, std::string("input is not JSON: ") + e.what());
    }
    art.input_hashes["schema"] = sha256_hex(read_file(o.schema));
    bundle_text = bundle.dump();
  }
  std::istringstream in(bundle_text);
  const IngestResult result =
      ingest_external(in, o.format == "sgd" ? DumpFormat::Sgd : DumpFormat::Star);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  std::vector<std::string> lines;
  for (const auto& d : result.dialogues) lines.push_back(dialogue_to_json_line(d));
  write_with_metadata(o.out_schemas, serialize_schema_catalog(result.catalog), art);
  write_with_metadata(o.out_dialogues, join_lines(lines), art);
  out << "ingested " << result.dialogues.size() << " dialogues and " << result.catalog.size()
      << " apis (" << result.warnings.size() << " skipped)\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (error_category(e.code())) {
    case ErrorCategory::Usage: return kExitUsage;
    case ErrorCategory::Backend: return kExitBackend;
    case ErrorCategory::Data: return kExitData;
  }
  return kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grounded API argument filling: prompts, scoring, rejection sampling, metrics",
               "arground"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  ExportSftOptions export_opts;
  auto* export_cmd = app.add_subcommand("export-sft", "Write gold prompt/completion pairs for SFT");
  export_cmd->add_option("--dialogues", export_opts.dialogues, "Dialogue JSONL")->required();
  export_cmd->add_option("--schemas", export_opts.schemas, "Schema catalog JSON")->required();
  export_cmd->add_option("--out", export_opts.out, "Output JSONL")->required();
  export_cmd->add_option("--template", export_opts.template_path, "Default prompt template file");

  RejectSampleOptions rs;
  auto* rs_cmd = app.add_subcommand("reject-sample", "Sample K outputs per dialogue and keep positive-reward ones");
  rs_cmd->add_option("--dialogues", rs.dialogues, "Dialogue JSONL")->required();
  rs_cmd->add_option("--schemas", rs.schemas, "Schema catalog JSON")->required();
  rs_cmd->add_option("--backend", rs.backend, "http:<profile> | mock:<file> | replay:<file> | record:<file>")->required();
  rs_cmd->add_option("--k", rs.k, "Samples per dialogue")->check(CLI::PositiveNumber);
  rs_cmd->add_option("--temperature", rs.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);
  rs_cmd->add_option("--max-tokens", rs.max_tokens, "Completion length limit")->check(CLI::PositiveNumber);
  rs_cmd->add_option("--max-in-flight", rs.max_in_flight, "Concurrent backend requests")->check(CLI::PositiveNumber);
  rs_cmd->add_option("--template", rs.template_path, "Default prompt template file");
  rs_cmd->add_option("--out", rs.out, "Augmented dataset JSONL")->required();
  rs_cmd->add_flag("--strict", rs.strict, "Abort on backend failures instead of skipping");

  FillOptions fill;
  auto* fill_cmd = app.add_subcommand("fill", "Predict arguments with the default or multi-step prompt");
  fill_cmd->add_option("--mode", fill.mode, "default | multistep")->check(CLI::IsMember({"default", "multistep"}));
  fill_cmd->add_option("--backend", fill.backend, "Backend spec")->required();
  fill_cmd->add_option("--dialogues", fill.dialogues, "Dialogue JSONL")->required();
  fill_cmd->add_option("--schemas", fill.schemas, "Schema catalog JSON")->required();
  fill_cmd->add_option("--out", fill.out, "Predictions JSONL")->required();
  fill_cmd->add_option("--model", fill.model, "Model label recorded with each prediction");
  fill_cmd->add_option("--split", fill.split, "Split label recorded with each prediction");
  fill_cmd->add_option("--max-in-flight", fill.max_in_flight, "Concurrent backend requests")->check(CLI::PositiveNumber);
  fill_cmd->add_option("--max-tokens", fill.max_tokens, "Completion length limit")->check(CLI::PositiveNumber);
  fill_cmd->add_option("--template", fill.template_path, "Default prompt template file");
  fill_cmd->add_option("--slot-template", fill.slot_template_path, "Slot prompt template file");

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "BLEU, fuzzy match, char F1 and error rates");
  eval_cmd->add_option("--pred", eval.pred, "Predictions JSONL")->required();
  eval_cmd->add_option("--gold", eval.gold, "Gold dialogue JSONL")->required();
  eval_cmd->add_option("--schemas", eval.schemas, "Schema catalog JSON")->required();
  eval_cmd->add_option("--out", eval.out, "Report CSV")->required();
  eval_cmd->add_option("--dataset", eval.labels.dataset, "Dataset label");
  eval_cmd->add_option("--split", eval.labels.split, "Split label");
  eval_cmd->add_option("--backend-label", eval.labels.backend, "Backend/model label");
  eval_cmd->add_option("--breakdowns-out", eval.breakdowns_out, "Per-sample breakdown JSONL");

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "Build in-domain or out-of-domain splits");
  split_cmd->require_subcommand(1);
  auto* in_cmd = split_cmd->add_subcommand("in-domain", "Domain-stratified random split");
  in_cmd->add_option("--dialogues", split.dialogues, "Dialogue JSONL")->required();
  in_cmd->add_option("--schemas", split.schemas, "Schema catalog JSON (validates target APIs)");
  in_cmd->add_option("--fraction", split.fraction, "Test fraction")->required()->check(CLI::Range(0.0, 1.0));
  in_cmd->add_option("--seed", split.seed, "Shuffle seed")->required();
  in_cmd->add_option("--out-dir", split.out_dir, "Output directory")->required();
  auto* ood_cmd = split_cmd->add_subcommand("out-of-domain", "Hold out whole domains");
  ood_cmd->add_option("--dialogues", split.dialogues, "Dialogue JSONL")->required();
  ood_cmd->add_option("--schemas", split.schemas, "Schema catalog JSON (validates target APIs)");
  ood_cmd->add_option("--holdout", split.holdout, "Comma-separated held-out domains")->required();
  ood_cmd->add_option("--synonyms", split.synonyms, "Synonym map JSON");
  ood_cmd->add_option("--out-dir", split.out_dir, "Output directory")->required();

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Error-rate panel per model or split");
  report_cmd->add_option("--breakdowns", report.breakdowns, "JSONL rows with a 'breakdown' object")->required();
  report_cmd->add_option("--group-by", report.group_by, "model | split")->check(CLI::IsMember({"model", "split"}));
  report_cmd->add_option("--out", report.out, "Panel CSV")->required();

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert SGD or STAR dumps");
  ingest_cmd->add_option("--format", ingest.format, "sgd | star")->check(CLI::IsMember({"sgd", "star"}));
  ingest_cmd->add_option("--bundle", ingest.bundle, "Combined dump JSON");
  ingest_cmd->add_option("--schema", ingest.schema, "schema.json (SGD) or API spec list (STAR)");
  ingest_cmd->add_option("--input", ingest.inputs, "Dialogue files");
  ingest_cmd->add_option("--out-dialogues", ingest.out_dialogues, "Dialogue JSONL")->required();
  ingest_cmd->add_option("--out-schemas", ingest.out_schemas, "Schema catalog JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*export_cmd) return cmd_export_sft(export_opts, out);
    if (*rs_cmd) return cmd_reject_sample(rs, out, err);
    if (*fill_cmd) return cmd_fill(fill, out, err);
    if (*eval_cmd) return cmd_evaluate(eval, out);
    if (*in_cmd) return cmd_split_in_domain(split, out, err);
    if (*ood_cmd) return cmd_split_out_of_domain(split, out, err);
    if (*report_cmd) return cmd_report(report, out);
    if (*ingest_cmd) return cmd_ingest(ingest, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace arground::cli
