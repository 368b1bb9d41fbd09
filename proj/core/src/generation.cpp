#include "arground/generation.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "arground/error.hpp"
#include "arground/io.hpp"
#include "json.hpp"

namespace arground {

using Json = nlohmann::ordered_json;

std::string request_key(const GenerationRequest& request) {
  // nlohmann::json (unordered) sorts object keys, giving a canonical dump.
  nlohmann::json identity;
  identity["prompt"] = request.prompt;
  identity["temperature"] = request.temperature;
  identity["n_samples"] = request.n_samples;
  identity["max_tokens"] = request.max_tokens;
  return sha256_hex(identity.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(std::vector<std::string> outputs) {
  for (auto& o : outputs) untagged_.push_back({std::move(o), false});
}

ScriptedBackend::ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

void ScriptedBackend::push(std::string output, std::optional<std::string> tag) {
  std::lock_guard lock(mutex_);
  if (tag) {
    tagged_[*tag].push_back({std::move(output), false});
  } else {
    untagged_.push_back({std::move(output), false});
  }
}

void ScriptedBackend::push_failure(std::string message, std::optional<std::string> tag) {
  std::lock_guard lock(mutex_);
  if (tag) {
    tagged_[*tag].push_back({std::move(message), true});
  } else {
    untagged_.push_back({std::move(message), true});
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_script(std::istream& script) {
  auto backend = std::make_unique<ScriptedBackend>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(script, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "mock script line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::DatasetInvalid, where + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::DatasetInvalid, where + ": expected an object");
    std::optional<std::string> tag;
    if (auto it = j.find("tag"); it != j.end() && it->is_string()) tag = it->get<std::string>();
    if (auto it = j.find("output"); it != j.end() && it->is_string()) {
      backend->push(it->get<std::string>(), tag);
    } else if (auto its = j.find("outputs"); its != j.end() && its->is_array()) {
      for (const auto& o : *its) {
        if (!o.is_string()) throw Error(ErrorCode::DatasetInvalid, where + ": outputs must be strings");
        backend->push(o.get<std::string>(), tag);
      }
    } else if (auto ite = j.find("error"); ite != j.end() && ite->is_string()) {
      backend->push_failure(ite->get<std::string>(), tag);
    } else {
      throw Error(ErrorCode::DatasetInvalid, where + ": needs 'output', 'outputs' or 'error'");
    }
  }
  return backend;
}

ScriptedBackend::Entry ScriptedBackend::pop(const std::string& tag) {
  auto it = tagged_.find(tag);
  std::deque<Entry>* queue = (it != tagged_.end() && !it->second.empty()) ? &it->second : &untagged_;
  if (queue->empty()) {
    throw Error(ErrorCode::BackendError, "mock script exhausted (tag '" + tag + "')", tag);
  }
  Entry e = std::move(queue->front());
  queue->pop_front();
  return e;
}

GenerationRecord ScriptedBackend::generate(const GenerationRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  GenerationRecord record;
  record.request = request;
  record.backend_id = id();
  record.timestamp = std::chrono::system_clock::now();
  if (responder_) {
    record.outputs = responder_(request);
  } else {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < request.n_samples; ++i) {
      Entry e = pop(request.tag);
      if (e.failure) throw Error(ErrorCode::BackendError, e.text, request.tag);
      record.outputs.push_back(std::move(e.text));
    }
  }
  if (record.outputs.size() != request.n_samples) {
    throw Error(ErrorCode::BackendError,
                "mock returned " + std::to_string(record.outputs.size()) + " outputs, expected " +
                    std::to_string(request.n_samples),
                request.tag);
  }
  record.latency = std::chrono::steady_clock::now() - start;
  return record;
}

// ---------------------------------------------------------------------------
// Record log

std::string record_to_json_line(const GenerationRecord& record) {
  Json j;
  j["key"] = request_key(record.request);
  Json req;
  req["prompt"] = record.request.prompt;
  req["temperature"] = record.request.temperature;
  req["max_tokens"] = record.request.max_tokens;
  req["n_samples"] = record.request.n_samples;
  req["stop_sequences"] = record.request.stop_sequences;
  req["tag"] = record.request.tag;
  j["request"] = std::move(req);
  j["outputs"] = record.outputs;
  j["backend_id"] = record.backend_id;
  j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                          record.timestamp.time_since_epoch())
                          .count();
  j["latency_ms"] = record.latency.count();
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

GenerationRecord record_from_json_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  GenerationRecord r;
  const auto& req = j.at("request");
  r.request.prompt = req.at("prompt").get<std::string>();
  r.request.temperature = req.at("temperature").get<double>();
  r.request.max_tokens = req.at("max_tokens").get<std::size_t>();
  r.request.n_samples = req.at("n_samples").get<std::size_t>();
  if (auto it = req.find("stop_sequences"); it != req.end()) {
    r.request.stop_sequences = it->get<std::vector<std::string>>();
  }
  if (auto it = req.find("tag"); it != req.end()) r.request.tag = it->get<std::string>();
  r.outputs = j.at("outputs").get<std::vector<std::string>>();
  r.backend_id = j.value("backend_id", std::string("unknown"));
  r.timestamp = std::chrono::system_clock::time_point(
      std::chrono::milliseconds(j.value("timestamp_ms", std::int64_t{0})));
  r.latency = std::chrono::duration<double, std::milli>(j.value("latency_ms", 0.0));
  if (r.outputs.size() != r.request.n_samples) {
    throw std::invalid_argument("outputs length does not match n_samples");
  }
  return r;
}

// ---------------------------------------------------------------------------
// RecordingBackend

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, std::ostream& log)
    : inner_(std::move(inner)), log_(&log) {}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, const std::string& log_path)
    : inner_(std::move(inner)),
      owned_(std::make_unique<std::ofstream>(log_path, std::ios::app | std::ios::binary)),
      log_(owned_.get()) {
  if (!*owned_) throw Error(ErrorCode::IoError, "cannot open record log " + log_path, log_path);
}

RecordingBackend::~RecordingBackend() = default;

GenerationRecord RecordingBackend::generate(const GenerationRequest& request) {
  GenerationRecord record = inner_->generate(request);
  const std::string line = record_to_json_line(record);
  std::lock_guard lock(mutex_);
  *log_ << line << '\n';
  log_->flush();
  return record;
}

// ---------------------------------------------------------------------------
// ReplayBackend

std::unique_ptr<ReplayBackend> ReplayBackend::open(std::istream& log) {
  auto backend = std::unique_ptr<ReplayBackend>(new ReplayBackend());
  std::string line;
  std::size_t offset = 0;
  while (std::getline(log, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    GenerationRecord record;
    try {
      record = record_from_json_line(line);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::LogCorrupt,
                  "record log entry at byte " + std::to_string(line_offset) + ": " + e.what(),
                  std::to_string(line_offset));
    }
    backend->by_key_[request_key(record.request)].records.push_back(std::move(record));
    ++backend->count_;
  }
  return backend;
}

std::unique_ptr<ReplayBackend> ReplayBackend::open_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open replay log " + path, path);
  return open(in);
}

GenerationRecord ReplayBackend::generate(const GenerationRequest& request) {
  const std::string key = request_key(request);
  std::lock_guard lock(mutex_);
  auto it = by_key_.find(key);
  if (it == by_key_.end()) {
    throw Error(ErrorCode::ReplayMiss, "no recorded response for request '" + request.tag + "'",
                key);
  }
  Slot& slot = it->second;
  GenerationRecord record = slot.records[slot.cursor];
  if (slot.cursor + 1 < slot.records.size()) ++slot.cursor;
  record.request.tag = request.tag;
  record.request.stop_sequences = request.stop_sequences;
  return record;
}

// ---------------------------------------------------------------------------
// BoundedBackend

BoundedBackend::BoundedBackend(std::shared_ptr<Backend> inner, std::size_t max_in_flight)
    : inner_(std::move(inner)),
      limit_(max_in_flight == 0 ? 1 : max_in_flight),
      slots_(static_cast<std::ptrdiff_t>(limit_)) {}

GenerationRecord BoundedBackend::generate(const GenerationRequest& request) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->generate(request);
}

// ---------------------------------------------------------------------------

std::shared_ptr<Backend> make_backend(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "backend spec needs a kind prefix: " + std::string(spec),
                std::string(spec));
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::string arg(spec.substr(colon + 1));
  if (kind == "http") {
    return std::make_shared<HttpBackend>(http_config_from_env(arg));
  }
  if (kind == "mock") {
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open mock script " + arg, arg);
    return ScriptedBackend::from_script(in);
  }
  if (kind == "replay") {
    return ReplayBackend::open_file(arg);
  }
  if (kind == "record") {
    if (arg.empty()) throw Error(ErrorCode::InvalidArgument, "record: needs a log path");
    auto live = std::make_shared<HttpBackend>(http_config_from_env(""));
    return std::make_shared<RecordingBackend>(std::move(live), arg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown backend kind '" + std::string(kind) + "'",
              std::string(spec));
}

}  // namespace arground
