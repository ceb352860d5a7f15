#include "dsc/http_backend.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace dsc {

namespace {

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("http backend: invalid endpoint URL: " + url);
  out.scheme = url.substr(0, scheme_end);
  if (out.scheme != "http" && out.scheme != "https") {
    throw ConfigError("http backend: unsupported scheme: " + out.scheme);
  }
  const auto rest = url.substr(scheme_end + 3);
  const auto path_start = rest.find('/');
  std::string authority = path_start == std::string::npos ? rest : rest.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : rest.substr(path_start);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    out.host = authority.substr(0, colon);
    out.port = std::atoi(authority.c_str() + colon + 1);
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty() || out.port <= 0) {
    throw ConfigError("http backend: invalid endpoint URL: " + url);
  }
  return out;
}

// Bounded concurrency across calls.
class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_;
};

struct SingleCall {
  std::vector<std::string> texts;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  ParsedUrl url;
  std::string api_key;
  Semaphore semaphore;

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)), url(parse_url(config.endpoint)), semaphore(config.max_parallel) {
    if (!config.api_key_env.empty()) {
      if (const char* key = std::getenv(config.api_key_env.c_str())) api_key = key;
    }
    if (config.max_parallel < 1) throw ConfigError("http backend: max_parallel must be >= 1");
    if (config.max_retries < 1) throw ConfigError("http backend: max_retries must be >= 1");
  }

  std::unique_ptr<httplib::Client> make_client() const {
    std::unique_ptr<httplib::Client> client;
    if (url.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
      client = std::make_unique<httplib::Client>(("https://" + url.host + ":" +
                                                  std::to_string(url.port)).c_str());
#else
      throw ConfigError("http backend: built without TLS support; use an http:// endpoint");
#endif
    } else {
      client = std::make_unique<httplib::Client>(url.host, url.port);
    }
    client->set_connection_timeout(config.timeout_seconds, 0);
    client->set_read_timeout(config.timeout_seconds, 0);
    client->set_write_timeout(config.timeout_seconds, 0);
    return client;
  }

  SingleCall parse_body(const std::string& body, int expected_n) const {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("http backend: malformed response JSON: ") + e.what(),
                         /*retriable=*/false);
    }
    SingleCall call;
    try {
      for (const auto& choice : j.at("choices")) {
        call.texts.push_back(choice.at("message").at("content").get<std::string>());
      }
      const auto& usage = j.at("usage");
      call.input_tokens = usage.at("prompt_tokens").get<std::int64_t>();
      call.output_tokens = usage.at("completion_tokens").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("http backend: unexpected response shape: ") + e.what(),
                         /*retriable=*/false);
    }
    if (static_cast<int>(call.texts.size()) != expected_n) {
      throw BackendError("http backend: expected " + std::to_string(expected_n) +
                             " choices, got " + std::to_string(call.texts.size()),
                         /*retriable=*/false);
    }
    return call;
  }

  SingleCall call_once(const CompletionRequest& request, int n) {
    nlohmann::json body{
        {"model", config.model},
        {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"},
                                                           {"content", request.prompt_text}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens > 0 ? request.max_output_tokens
                                                     : config.default_max_output_tokens},
    };
    if (n > 1) body["n"] = n;

    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    std::string last_error;
    for (int attempt = 1; attempt <= config.max_retries; ++attempt) {
      if (attempt > 1) {
        const auto delay = config.retry_backoff_ms * (1 << (attempt - 2));
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      semaphore.acquire();
      auto client = make_client();
      auto result = client->Post(url.path.c_str(), headers, body.dump(), "application/json");
      semaphore.release();
      if (!result) {
        last_error = "transport failure: " + httplib::to_string(result.error());
        continue;  // retriable
      }
      if (result->status >= 500 || result->status == 429) {
        last_error = "server status " + std::to_string(result->status);
        continue;  // retriable
      }
      if (result->status != 200) {
        throw BackendError("http backend: status " + std::to_string(result->status) + ": " +
                               result->body.substr(0, 256),
                           /*retriable=*/false);
      }
      return parse_body(result->body, n);
    }
    throw BackendError("http backend: giving up after " + std::to_string(config.max_retries) +
                           " attempts: " + last_error,
                       /*retriable=*/true);
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpBackend::~HttpBackend() = default;

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
  if (request.n < 1) throw BackendError("http backend: n must be >= 1", /*retriable=*/false);

  CompletionResponse response;
  if (impl_->config.multi_sample_requests) {
    SingleCall call = impl_->call_once(request, request.n);
    response.texts = std::move(call.texts);
    response.input_tokens = call.input_tokens;
    response.output_tokens = call.output_tokens;
    // The API reports one completion total; split it evenly across samples,
    // remainder on the front, so that the per-sample sum stays exact.
    const std::int64_t base = call.output_tokens / request.n;
    const std::int64_t extra = call.output_tokens % request.n;
    for (int i = 0; i < request.n; ++i) {
      response.per_sample_output_tokens.push_back(base + (i < extra ? 1 : 0));
    }
    record_call(response.input_tokens, response.output_tokens);
  } else {
    // Single-completion API: n calls, each re-charging input tokens.
    for (int i = 0; i < request.n; ++i) {
      SingleCall call = impl_->call_once(request, 1);
      response.texts.push_back(std::move(call.texts.front()));
      response.input_tokens += call.input_tokens;
      response.output_tokens += call.output_tokens;
      response.per_sample_output_tokens.push_back(call.output_tokens);
      record_call(call.input_tokens, call.output_tokens);
    }
  }
  return response;
}

}  // namespace dsc
