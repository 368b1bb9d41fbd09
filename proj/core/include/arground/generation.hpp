#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace arground {

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  std::size_t max_tokens = 256;
  std::size_t n_samples = 1;  // K
  std::vector<std::string> stop_sequences;
  std::string tag;  // correlation id, not part of the request identity
};

struct GenerationRecord {
  GenerationRequest request;
  std::vector<std::string> outputs;
  std::string backend_id;
  std::chrono::system_clock::time_point timestamp;
  std::chrono::duration<double, std::milli> latency{0};
};

/// Content hash identifying a request for replay: SHA-256 over
/// (prompt, temperature, n_samples, max_tokens).
std::string request_key(const GenerationRequest& request);

/// A text-generation backend. Implementations are safe to call from several
/// threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  /// Returns request.n_samples completions or throws BackendError,
  /// ReplayMiss or AuthError.
  virtual GenerationRecord generate(const GenerationRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Deterministic mock. Outputs are taken from a per-tag queue when the
/// request tag has scripted entries, otherwise from the untagged queue.
class ScriptedBackend final : public Backend {
 public:
  using Responder = std::function<std::vector<std::string>(const GenerationRequest&)>;

  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> outputs);
  explicit ScriptedBackend(Responder responder);

  void push(std::string output, std::optional<std::string> tag = std::nullopt);
  /// Queues an entry that fails with BackendError when consumed.
  void push_failure(std::string message, std::optional<std::string> tag = std::nullopt);

  /// JSONL script: `{"output": s}`, `{"outputs": [s, ...]}` or
  /// `{"error": msg}`, each with an optional `"tag"`.
  static std::unique_ptr<ScriptedBackend> from_script(std::istream& script);

  GenerationRecord generate(const GenerationRequest& request) override;
  std::string id() const override { return "mock"; }

 private:
  struct Entry {
    std::string text;
    bool failure = false;
  };

  Entry pop(const std::string& tag);

  std::mutex mutex_;
  std::deque<Entry> untagged_;
  std::map<std::string, std::deque<Entry>, std::less<>> tagged_;
  Responder responder_;
};

struct HttpConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

/// Reads ARGROUND_BASE_URL, ARGROUND_API_KEY and ARGROUND_MODEL. A named
/// profile first looks for ARGROUND_<PROFILE>_BASE_URL and so on.
HttpConfig http_config_from_env(std::string_view profile);

/// Chat-completion client (`POST {base_url}/chat/completions`). Transient
/// failures (transport errors, 408, 429, 5xx) are retried with exponential
/// backoff; 401/403 raise AuthError immediately.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);

  GenerationRecord generate(const GenerationRequest& request) override;
  std::string id() const override;

 private:
  std::vector<std::string> request_choices(const GenerationRequest& request, std::size_t n);

  HttpConfig config_;
  std::string host_;  // scheme://host[:port]
  std::string path_;  // path prefix + /chat/completions
};

/// Wraps a backend and appends every record to a JSONL log. Writes are
/// serialized; each line is flushed before generate() returns.
class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner, std::ostream& log);
  RecordingBackend(std::shared_ptr<Backend> inner, const std::string& log_path);
  ~RecordingBackend() override;

  GenerationRecord generate(const GenerationRequest& request) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::unique_ptr<std::ostream> owned_;
  std::ostream* log_;
  std::mutex mutex_;
};

/// Serves responses purely from a record log, keyed by request_key().
/// Repeated identical requests walk through the matching records in log
/// order and then keep returning the last one.
class ReplayBackend final : public Backend {
 public:
  /// Throws LogCorrupt (subject = byte offset of the bad line).
  static std::unique_ptr<ReplayBackend> open(std::istream& log);
  static std::unique_ptr<ReplayBackend> open_file(const std::string& path);

  GenerationRecord generate(const GenerationRequest& request) override;
  std::string id() const override { return "replay"; }
  std::size_t size() const noexcept { return count_; }

 private:
  struct Slot {
    std::vector<GenerationRecord> records;
    std::size_t cursor = 0;
  };
  std::mutex mutex_;
  std::map<std::string, Slot, std::less<>> by_key_;
  std::size_t count_ = 0;
};

/// Caps the number of concurrent generate() calls on the wrapped backend.
class BoundedBackend final : public Backend {
 public:
  BoundedBackend(std::shared_ptr<Backend> inner, std::size_t max_in_flight);

  GenerationRecord generate(const GenerationRequest& request) override;
  std::string id() const override { return inner_->id(); }
  std::size_t max_in_flight() const noexcept { return limit_; }

 private:
  std::shared_ptr<Backend> inner_;
  std::size_t limit_;
  std::counting_semaphore<> slots_;
};

inline constexpr std::size_t kDefaultMaxInFlight = 4;

/// Builds a backend from `http:<profile>`, `mock:<script>`, `replay:<log>`
/// or `record:<log>` (records the default http profile). Throws
/// InvalidArgument for anything else.
std::shared_ptr<Backend> make_backend(std::string_view spec);

/// One JSONL line of the record log.
std::string record_to_json_line(const GenerationRecord& record);
GenerationRecord record_from_json_line(std::string_view line);

}  // namespace arground
