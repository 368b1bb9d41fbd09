#include <cstdlib>
#include <thread>

#include "arground/error.hpp"
#include "arground/generation.hpp"
#include "arground/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace arground {

namespace {

std::string env_or(const std::string& name, const std::string& fallback) {
  const char* v = std::getenv(name.c_str());
  return v != nullptr ? std::string(v) : fallback;
}

std::string profile_prefix(std::string_view profile) {
  std::string p(trim(profile));
  if (p.empty() || p == "default") return {};
  for (char& c : p) {
    if (c >= 'a' && c <= 'z') {
      c = static_cast<char>(c - 'a' + 'A');
    } else if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) {
      c = '_';
    }
  }
  return p + "_";
}

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpConfig http_config_from_env(std::string_view profile) {
  const std::string prefix = profile_prefix(profile);
  auto lookup = [&](const char* field) {
    const std::string plain = std::string("ARGROUND_") + field;
    if (prefix.empty()) return env_or(plain, "");
    return env_or("ARGROUND_" + prefix + field, env_or(plain, ""));
  };
  HttpConfig config;
  config.base_url = lookup("BASE_URL");
  config.api_key = lookup("API_KEY");
  config.model = lookup("MODEL");
  return config;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  std::string url = config_.base_url;
  if (url.empty()) {
    throw Error(ErrorCode::BackendError, "no base URL configured (ARGROUND_BASE_URL)");
  }
  if (url.find("://") == std::string::npos) url = "https://" + url;
  const auto host_start = url.find("://") + 3;
  const auto slash = url.find('/', host_start);
  host_ = url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? std::string() : url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

std::string HttpBackend::id() const {
  return config_.model.empty() ? std::string("http") : "http:" + config_.model;
}

std::vector<std::string> HttpBackend::request_choices(const GenerationRequest& request,
                                                      std::size_t n) {
  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::ordered_json::array(
      {nlohmann::ordered_json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["n"] = n;
  body["max_tokens"] = request.max_tokens;
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;
  const std::string payload =
      body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - seconds);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.initial_backoff * (1 << (attempt - 1)));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::AuthError,
                  "backend rejected credentials (HTTP " + std::to_string(res->status) + ")",
                  request.tag);
    }
    if (is_transient(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::BackendError,
                  "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                  request.tag);
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      std::vector<std::string> outputs;
      for (const auto& choice : reply.at("choices")) {
        const auto& content = choice.at("message").at("content");
        outputs.push_back(content.is_string() ? content.get<std::string>() : std::string());
      }
      return outputs;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BackendError, std::string("malformed completion response: ") + e.what(),
                  request.tag);
    }
  }
  throw Error(ErrorCode::BackendError,
              "giving up after " + std::to_string(config_.max_retries + 1) + " attempts: " +
                  last_error,
              request.tag);
}

GenerationRecord HttpBackend::generate(const GenerationRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  GenerationRecord record;
  record.request = request;
  record.backend_id = id();
  record.timestamp = std::chrono::system_clock::now();
  // Some servers ignore `n`; keep asking until K completions are collected.
  while (record.outputs.size() < request.n_samples) {
    auto batch = request_choices(request, request.n_samples - record.outputs.size());
    if (batch.empty()) {
      throw Error(ErrorCode::BackendError, "completion response had no choices", request.tag);
    }
    for (auto& o : batch) {
      if (record.outputs.size() < request.n_samples) record.outputs.push_back(std::move(o));
    }
  }
  record.latency = std::chrono::steady_clock::now() - start;
  return record;
}

}  // namespace arground
