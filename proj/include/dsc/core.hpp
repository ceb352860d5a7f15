#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dsc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Question {
  std::string id;
  std::string text;
  std::string gold_answer;
  std::optional<double> gold_difficulty;  // only used for correlation evaluation
};

// Ordered multiset of normalized answers drawn for one question, with the
// per-sample token bill. Input tokens of a multi-sample request are attributed
// to the request's first sample so that column sums stay exact.
struct SampleTally {
  std::vector<std::string> samples;
  std::vector<std::pair<std::int64_t, std::int64_t>> token_cost;  // (input, output)

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }

  void add(std::string answer, std::int64_t input_tokens, std::int64_t output_tokens) {
    samples.push_back(std::move(answer));
    token_cost.emplace_back(input_tokens, output_tokens);
  }
};

// Accumulated normalized rank positions per question across split rounds.
struct DifficultyTable {
  std::map<std::string, std::vector<double>> per_question_ranks;
  int rounds_completed = 0;
};

// Monetary amounts are integer micro-dollars end to end; floats only appear
// when rendering.
using Micro = std::int64_t;

Micro micro_from_dollars(double dollars);
std::string format_currency(Micro amount);  // 4 decimal places, half-up

struct PricingTable {
  std::string model_name;
  Micro input_price_per_1k = 0;   // micro-dollars per 1000 input tokens
  Micro output_price_per_1k = 0;  // micro-dollars per 1000 output tokens

  static PricingTable from_dollars(std::string model, double input_per_1k, double output_per_1k);
};

enum class Step { ranking, presample, reasoning };
enum class Direction { input, output };

std::string_view to_string(Step s);
std::string_view to_string(Direction d);
Step step_from_string(std::string_view s);            // throws ConfigError on unknown
Direction direction_from_string(std::string_view s);  // throws ConfigError on unknown

// Token/cost journal, itemized by pipeline step and direction. Appends are
// serialized; totals are order-independent.
class CostLedger {
 public:
  struct Entry {
    Step step;
    Direction direction;
    double tokens;  // real-valued: averaged token counts pass through reports
    Micro cost;
  };

  CostLedger() = default;
  CostLedger(const CostLedger& other);
  CostLedger& operator=(const CostLedger& other);
  CostLedger(CostLedger&& other) noexcept;
  CostLedger& operator=(CostLedger&& other) noexcept;

  void add(Step step, Direction direction, double tokens, const PricingTable& pricing);

  [[nodiscard]] std::vector<Entry> entries() const;
  [[nodiscard]] Micro total_cost() const;
  [[nodiscard]] double total_tokens(Direction d) const;
  [[nodiscard]] double tokens(Step s, Direction d) const;
  [[nodiscard]] Micro cost(Step s) const;

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

// cost = tokens * price_per_1k / 1000, rounded half away from zero.
Micro token_cost_micro(double tokens, Micro price_per_1k);

struct HyperParams {
  int B = 8;               // ranking batch size
  int R = 5;               // random split rounds
  int p = 4;               // pre-sample size
  int k = 32;              // judge window
  int e = 4;               // extend window
  int m = 16;              // prediction window
  int L = 40;              // max sample size
  double c_thresh = 0.95;  // Dirichlet posterior threshold
  int esc_window = 5;
  double temperature = 0.7;
  int mc_draws = 10000;  // Dirichlet criterion Monte Carlo draws

  void validate() const;  // throws ConfigError
};

// Canonical answer form: trimmed, lowercased, trailing punctuation removed,
// numerics canonicalized (thousands separators, leading zeros, trailing ".0").
// Idempotent; gold answers go through the same function before comparison.
std::string normalize_answer(std::string_view raw);

// Plurality winner; ties broken by earliest first occurrence in draw order.
std::pair<std::string, int> majority_vote(const SampleTally& tally);  // throws Error on empty

// Shannon entropy (nats) of the empirical answer distribution. Exactly 0.0
// iff all samples are identical; the partition scan relies on that zero test.
double entropy(const SampleTally& tally);  // throws Error on empty

inline void ledger_add(CostLedger& ledger, Step step, Direction direction, double tokens,
                       const PricingTable& pricing) {
  ledger.add(step, direction, tokens, pricing);
}

}  // namespace dsc
