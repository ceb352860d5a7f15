#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dsc/core.hpp"

namespace dsc {

class BackendError : public Error {
 public:
  BackendError(const std::string& msg, bool retriable) : Error(msg), retriable_(retriable) {}
  [[nodiscard]] bool retriable() const { return retriable_; }

 private:
  bool retriable_;
};

struct CompletionRequest {
  std::string prompt_text;
  int n = 1;
  double temperature = 0.7;
  int max_output_tokens = 0;  // 0 = backend default

  // Routing metadata for the simulated backend (profiles are keyed by
  // question id); the HTTP backend ignores all three fields.
  std::string question_id;               // reasoning draw for this question
  std::vector<std::string> ranking_ids;  // difficulty-ranking request over these questions
  std::string stream_tag;                // extra stream salt, e.g. the split round
};

struct CompletionResponse {
  std::vector<std::string> texts;  // exactly n completions
  std::int64_t input_tokens = 0;   // counted once per physical request (summed in sequential mode)
  std::int64_t output_tokens = 0;  // summed over samples
  std::vector<std::int64_t> per_sample_output_tokens;
};

// Request/token counters kept by every backend; tests reconcile ledgers
// against these.
struct CallStats {
  std::atomic<std::int64_t> requests{0};
  std::atomic<std::int64_t> input_tokens{0};
  std::atomic<std::int64_t> output_tokens{0};
};

// Deterministic fallback tokenizer: one token per alphanumeric run plus one
// per non-space punctuation character. Used when no exact count is available.
std::int64_t approx_token_count(std::string_view text);

class Backend {
 public:
  virtual ~Backend() = default;

  // Returns exactly request.n completions or throws BackendError.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;

  // Deterministic prompt-side token count. The HTTP backend reports exact
  // counts through CompletionResponse when the API echoes usage; this
  // standalone count is the documented approximation. The simulated backend
  // reports the profile's fixed count through its responses.
  [[nodiscard]] virtual std::int64_t count_input_tokens(std::string_view prompt_text) const {
    return approx_token_count(prompt_text);
  }

  [[nodiscard]] const CallStats& stats() const { return stats_; }

 protected:
  void record_call(std::int64_t input_tokens, std::int64_t output_tokens) {
    stats_.requests.fetch_add(1, std::memory_order_relaxed);
    stats_.input_tokens.fetch_add(input_tokens, std::memory_order_relaxed);
    stats_.output_tokens.fetch_add(output_tokens, std::memory_order_relaxed);
  }

 private:
  CallStats stats_;
};

}  // namespace dsc
