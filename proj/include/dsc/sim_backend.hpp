#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dsc/backend.hpp"
#include "dsc/core.hpp"

namespace dsc {

// Synthetic model of one question: how likely each answer is, and what a
// call against it costs in tokens.
struct SimQuestionProfile {
  std::string id;
  double latent_difficulty = 0.0;  // in [0, 1]; drives the ranking oracle
  std::string gold_answer;
  // Categorical over answer strings, in a fixed order (gold first for
  // generated pools). Must sum to 1 and contain the gold answer.
  std::vector<std::pair<std::string, double>> answer_distribution;
  double output_token_mean = 120.0;
  std::int64_t input_token_count = 800;   // full reasoning prompt (few-shot context)
  std::int64_t ranking_token_count = 60;  // contribution of this question to a ranking prompt

  void validate() const;  // throws ConfigError

  // gold probability 1 - d * (1 - 1/support); wrong mass split over distractors
  static SimQuestionProfile from_difficulty(std::string id, double difficulty,
                                            std::string gold_answer, int support);
};

struct SimBackendConfig {
  std::uint64_t seed = 1;
  // Gaussian noise applied to latent difficulty when the ranking oracle
  // orders a batch; 0 = noiseless oracle.
  double ranking_noise = 0.0;
  // Instruction overhead of a ranking prompt, added on top of the members'
  // ranking_token_count sum.
  std::int64_t ranking_prompt_overhead_tokens = 40;
  // Half-width of the uniform jitter applied to output_token_mean per sample.
  double output_token_jitter = 0.25;
};

// Seeded simulated model. Every draw is keyed by (seed, question id, draw
// index), so replays are bit-identical and results do not depend on request
// batching or scheduling. A per-question cursor advances the draw index
// across requests.
class SimBackend : public Backend {
 public:
  SimBackend(std::vector<SimQuestionProfile> profiles, SimBackendConfig config);

  CompletionResponse complete(const CompletionRequest& request) override;

  [[nodiscard]] const SimQuestionProfile& profile(const std::string& question_id) const;
  [[nodiscard]] const SimBackendConfig& config() const { return config_; }

 private:
  CompletionResponse complete_ranking(const CompletionRequest& request);
  CompletionResponse complete_reasoning(const CompletionRequest& request);

  std::map<std::string, SimQuestionProfile> profiles_;
  SimBackendConfig config_;
  std::mutex cursor_mu_;
  std::map<std::string, std::int64_t> draw_cursor_;
};

std::vector<SimQuestionProfile> load_sim_profiles(const std::string& path);
void write_sim_profiles(const std::string& path, const std::vector<SimQuestionProfile>& profiles);

// Synthetic pool with a latent difficulty gradient: the first easy_frac of
// questions (in latent order) are deterministic (difficulty 0), the rest ramp
// linearly from ramp_from to ramp_to. The emitted dataset order is shuffled.
struct SimPoolOptions {
  int n = 200;
  std::uint64_t seed = 1;
  double easy_frac = 0.4;
  double ramp_from = 0.05;
  double ramp_to = 1.0;
  int support = 8;  // answers per question (gold + distractors)
  double output_token_mean = 142.0;
  std::int64_t input_token_count = 846;
};

struct SimPool {
  std::vector<Question> questions;  // shuffled dataset order, gold_difficulty set
  std::vector<SimQuestionProfile> profiles;
};

SimPool generate_sim_pool(const SimPoolOptions& options);

}  // namespace dsc
