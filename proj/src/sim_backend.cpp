#include "dsc/sim_backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dsc/rng.hpp"

namespace dsc {

std::int64_t approx_token_count(std::string_view text) {
  std::int64_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (!in_word) {
        ++count;
        in_word = true;
      }
    } else {
      in_word = false;
      if (!std::isspace(c)) ++count;
    }
  }
  return count;
}

void SimQuestionProfile::validate() const {
  if (id.empty()) throw ConfigError("sim profile: empty id");
  if (latent_difficulty < 0.0 || latent_difficulty > 1.0) {
    throw ConfigError("sim profile " + id + ": latent_difficulty must be in [0,1]");
  }
  if (answer_distribution.empty()) {
    throw ConfigError("sim profile " + id + ": empty answer distribution");
  }
  double sum = 0.0;
  bool gold_present = false;
  for (const auto& [answer, prob] : answer_distribution) {
    if (prob < 0.0) throw ConfigError("sim profile " + id + ": negative probability");
    sum += prob;
    if (answer == gold_answer) gold_present = true;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ConfigError("sim profile " + id + ": answer distribution must sum to 1");
  }
  if (!gold_present) {
    throw ConfigError("sim profile " + id + ": gold answer not in distribution support");
  }
  if (output_token_mean < 0 || input_token_count < 0 || ranking_token_count < 0) {
    throw ConfigError("sim profile " + id + ": token counts must be >= 0");
  }
}

SimQuestionProfile SimQuestionProfile::from_difficulty(std::string id, double difficulty,
                                                       std::string gold_answer, int support) {
  if (support < 1) throw ConfigError("sim profile: support must be >= 1");
  SimQuestionProfile profile;
  profile.id = std::move(id);
  profile.latent_difficulty = difficulty;
  profile.gold_answer = std::move(gold_answer);
  const double gold_prob = 1.0 - difficulty * (1.0 - 1.0 / support);
  profile.answer_distribution.emplace_back(profile.gold_answer, gold_prob);
  const int distractors = support - 1;
  for (int i = 1; i <= distractors; ++i) {
    profile.answer_distribution.emplace_back("w" + std::to_string(i),
                                             (1.0 - gold_prob) / distractors);
  }
  profile.validate();
  return profile;
}

SimBackend::SimBackend(std::vector<SimQuestionProfile> profiles, SimBackendConfig config)
    : config_(config) {
  for (auto& p : profiles) {
    p.validate();
    const std::string id = p.id;
    if (!profiles_.emplace(id, std::move(p)).second) {
      throw ConfigError("sim backend: duplicate profile id " + id);
    }
  }
}

const SimQuestionProfile& SimBackend::profile(const std::string& question_id) const {
  const auto it = profiles_.find(question_id);
  if (it == profiles_.end()) {
    throw BackendError("sim backend: no profile for question id " + question_id,
                       /*retriable=*/false);
  }
  return it->second;
}

CompletionResponse SimBackend::complete(const CompletionRequest& request) {
  if (request.n < 1) throw BackendError("sim backend: n must be >= 1", /*retriable=*/false);
  CompletionResponse response = request.ranking_ids.empty() ? complete_reasoning(request)
                                                            : complete_ranking(request);
  record_call(response.input_tokens, response.output_tokens);
  return response;
}

CompletionResponse SimBackend::complete_ranking(const CompletionRequest& request) {
  // Ranking oracle: order the batch by (possibly noise-perturbed) latent
  // difficulty and answer in the same "Q<i>, Q<j>, ..." format a model would.
  const auto& ids = request.ranking_ids;
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(ids.size());
  std::int64_t input_tokens = config_.ranking_prompt_overhead_tokens;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const SimQuestionProfile& p = profile(ids[i]);
    double difficulty = p.latent_difficulty;
    if (config_.ranking_noise > 0.0) {
      Rng rng(StreamKey(config_.seed)
                  .absorb("rank-noise")
                  .absorb(ids[i])
                  .absorb(request.stream_tag)
                  .value());
      difficulty += config_.ranking_noise * rng.next_normal();
    }
    keyed.emplace_back(difficulty, i);
    input_tokens += p.ranking_token_count;
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::string text;
  for (std::size_t j = 0; j < keyed.size(); ++j) {
    if (j > 0) text += ", ";
    text += "Q" + std::to_string(keyed[j].second + 1);
  }

  CompletionResponse response;
  response.texts.assign(static_cast<std::size_t>(request.n), text);
  response.input_tokens = input_tokens;
  const std::int64_t out = approx_token_count(text);
  response.per_sample_output_tokens.assign(static_cast<std::size_t>(request.n), out);
  response.output_tokens = out * request.n;
  return response;
}

CompletionResponse SimBackend::complete_reasoning(const CompletionRequest& request) {
  const SimQuestionProfile& p = profile(request.question_id);

  std::int64_t first_index = 0;
  {
    std::lock_guard lock(cursor_mu_);
    auto& cursor = draw_cursor_[p.id];
    first_index = cursor;
    cursor += request.n;
  }

  CompletionResponse response;
  response.input_tokens = p.input_token_count;  // once per request
  response.texts.reserve(static_cast<std::size_t>(request.n));
  response.per_sample_output_tokens.reserve(static_cast<std::size_t>(request.n));
  for (int i = 0; i < request.n; ++i) {
    Rng rng(StreamKey(config_.seed).absorb("draw").absorb(p.id).absorb(
        static_cast<std::uint64_t>(first_index + i)).value());
    const double u = rng.next_double();
    double cumulative = 0.0;
    const std::string* answer = &p.answer_distribution.back().first;
    for (const auto& [candidate, prob] : p.answer_distribution) {
      cumulative += prob;
      if (u < cumulative) {
        answer = &candidate;
        break;
      }
    }
    const double jitter = config_.output_token_jitter;
    const double scale = 1.0 - jitter + 2.0 * jitter * rng.next_double();
    const auto tokens = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(p.output_token_mean * scale)));
    response.texts.push_back(*answer);
    response.per_sample_output_tokens.push_back(tokens);
    response.output_tokens += tokens;
  }
  return response;
}

namespace {

SimQuestionProfile profile_from_json(const nlohmann::json& j, const std::string& where) {
  SimQuestionProfile p;
  try {
    p.id = j.at("id").get<std::string>();
    p.gold_answer = j.at("gold").get<std::string>();
    p.latent_difficulty = j.value("difficulty", 0.0);
    p.output_token_mean = j.value("output_token_mean", p.output_token_mean);
    p.input_token_count = j.value("input_token_count", p.input_token_count);
    p.ranking_token_count = j.value("ranking_token_count", p.ranking_token_count);
    if (j.contains("answers")) {
      for (const auto& [answer, prob] : j.at("answers").items()) {
        p.answer_distribution.emplace_back(answer, prob.get<double>());
      }
    } else {
      const int support = j.value("support", 8);
      p = SimQuestionProfile::from_difficulty(p.id, p.latent_difficulty, p.gold_answer, support);
      p.output_token_mean = j.value("output_token_mean", 120.0);
      p.input_token_count = j.value("input_token_count", std::int64_t{800});
      p.ranking_token_count = j.value("ranking_token_count", std::int64_t{60});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  p.validate();
  return p;
}

}  // namespace

std::vector<SimQuestionProfile> load_sim_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sim profiles file: " + path);
  std::vector<SimQuestionProfile> profiles;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    profiles.push_back(profile_from_json(j, path + ":" + std::to_string(line_no)));
  }
  return profiles;
}

void write_sim_profiles(const std::string& path, const std::vector<SimQuestionProfile>& profiles) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write sim profiles file: " + path);
  for (const auto& p : profiles) {
    nlohmann::json answers = nlohmann::json::object();
    for (const auto& [answer, prob] : p.answer_distribution) answers[answer] = prob;
    const nlohmann::json j{{"id", p.id},
                           {"difficulty", p.latent_difficulty},
                           {"gold", p.gold_answer},
                           {"answers", answers},
                           {"output_token_mean", p.output_token_mean},
                           {"input_token_count", p.input_token_count},
                           {"ranking_token_count", p.ranking_token_count}};
    out << j.dump() << "\n";
  }
}

SimPool generate_sim_pool(const SimPoolOptions& options) {
  if (options.n < 1) throw ConfigError("sim pool: n must be >= 1");
  if (options.easy_frac < 0.0 || options.easy_frac > 1.0) {
    throw ConfigError("sim pool: easy_frac must be in [0,1]");
  }
  if (options.support < 2) throw ConfigError("sim pool: support must be >= 2");

  const int n_easy = static_cast<int>(std::lround(options.easy_frac * options.n));
  const int n_ramp = options.n - n_easy;

  // latent order first, then shuffle the dataset order
  std::vector<int> latent_index(static_cast<std::size_t>(options.n));
  std::iota(latent_index.begin(), latent_index.end(), 0);
  Rng shuffle_rng(StreamKey(options.seed).absorb("pool-shuffle").value());
  shuffle(latent_index, shuffle_rng);

  SimPool pool;
  pool.questions.reserve(static_cast<std::size_t>(options.n));
  pool.profiles.reserve(static_cast<std::size_t>(options.n));
  for (int pos = 0; pos < options.n; ++pos) {
    const int latent = latent_index[static_cast<std::size_t>(pos)];
    double difficulty = 0.0;
    if (latent >= n_easy && n_ramp > 0) {
      const double t = n_ramp == 1 ? 1.0 : static_cast<double>(latent - n_easy) / (n_ramp - 1);
      difficulty = options.ramp_from + t * (options.ramp_to - options.ramp_from);
    }

    char id[16];
    std::snprintf(id, sizeof(id), "q%04d", pos + 1);
    Rng qrng(StreamKey(options.seed).absorb("pool-question").absorb(
        static_cast<std::uint64_t>(latent)).value());
    const auto speed = 20 + qrng.next_below(80);
    const auto hours = 2 + qrng.next_below(9);
    const auto gold = speed * hours;

    Question q;
    q.id = id;
    q.text = "A train travels at " + std::to_string(speed) + " km/h for " +
             std::to_string(hours) + " hours. How many kilometers does it cover?";
    q.gold_answer = std::to_string(gold);
    q.gold_difficulty = difficulty;
    pool.questions.push_back(q);

    SimQuestionProfile profile =
        SimQuestionProfile::from_difficulty(q.id, difficulty, q.gold_answer, options.support);
    profile.output_token_mean = options.output_token_mean;
    profile.input_token_count = options.input_token_count;
    profile.ranking_token_count = approx_token_count(q.text);
    pool.profiles.push_back(std::move(profile));
  }
  return pool;
}

}  // namespace dsc
