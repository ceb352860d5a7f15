#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dsc/backend.hpp"

namespace dsc {

struct HttpBackendConfig {
  // Full endpoint URL, e.g. "https://api.openai.com/v1/chat/completions"
  // or "http://127.0.0.1:8089/v1/chat/completions" for a local server.
  std::string endpoint;
  std::string model;
  // Credentials come from the environment only, never from config files.
  std::string api_key_env = "DSC_API_KEY";
  // When true, one request carries n and yields n choices (input billed once
  // per request by the provider). When false the API is assumed to support
  // only single completions: a logical n-sample request becomes n calls, each
  // re-charging input tokens.
  bool multi_sample_requests = true;
  int max_parallel = 4;
  int max_retries = 3;  // attempts per call, exponential backoff
  int retry_backoff_ms = 250;
  int timeout_seconds = 120;
  int default_max_output_tokens = 1024;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dsc
