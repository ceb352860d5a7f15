#include "dsc/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace dsc {

Micro micro_from_dollars(double dollars) {
  return static_cast<Micro>(std::llround(dollars * 1e6));
}

std::string format_currency(Micro amount) {
  const bool neg = amount < 0;
  std::uint64_t a = neg ? static_cast<std::uint64_t>(-amount) : static_cast<std::uint64_t>(amount);
  // micro-dollars -> 4 decimal places = units of 100 micro, half-up
  const std::uint64_t hundredths = (a + 50) / 100;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%llu.%04llu", neg ? "-" : "",
                static_cast<unsigned long long>(hundredths / 10000),
                static_cast<unsigned long long>(hundredths % 10000));
  return buf;
}

PricingTable PricingTable::from_dollars(std::string model, double input_per_1k,
                                        double output_per_1k) {
  if (input_per_1k < 0 || output_per_1k < 0) {
    throw ConfigError("pricing: prices must be >= 0");
  }
  return PricingTable{std::move(model), micro_from_dollars(input_per_1k),
                      micro_from_dollars(output_per_1k)};
}

std::string_view to_string(Step s) {
  switch (s) {
    case Step::ranking: return "ranking";
    case Step::presample: return "presample";
    case Step::reasoning: return "reasoning";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  return d == Direction::input ? "input" : "output";
}

Step step_from_string(std::string_view s) {
  if (s == "ranking") return Step::ranking;
  if (s == "presample") return Step::presample;
  if (s == "reasoning") return Step::reasoning;
  throw ConfigError("unknown ledger step: " + std::string(s));
}

Direction direction_from_string(std::string_view s) {
  if (s == "input") return Direction::input;
  if (s == "output") return Direction::output;
  throw ConfigError("unknown ledger direction: " + std::string(s));
}

Micro token_cost_micro(double tokens, Micro price_per_1k) {
  return static_cast<Micro>(std::llround(tokens * static_cast<double>(price_per_1k) / 1000.0));
}

CostLedger::CostLedger(const CostLedger& other) : entries_(other.entries()) {}

CostLedger& CostLedger::operator=(const CostLedger& other) {
  if (this != &other) {
    auto copy = other.entries();
    std::lock_guard lock(mu_);
    entries_ = std::move(copy);
  }
  return *this;
}

CostLedger::CostLedger(CostLedger&& other) noexcept : entries_(other.entries()) {}

CostLedger& CostLedger::operator=(CostLedger&& other) noexcept {
  if (this != &other) {
    auto moved = other.entries();
    std::lock_guard lock(mu_);
    entries_ = std::move(moved);
  }
  return *this;
}

void CostLedger::add(Step step, Direction direction, double tokens, const PricingTable& pricing) {
  if (!(tokens >= 0)) throw Error("ledger: token count must be >= 0");
  const Micro price =
      direction == Direction::input ? pricing.input_price_per_1k : pricing.output_price_per_1k;
  const Entry entry{step, direction, tokens, token_cost_micro(tokens, price)};
  std::lock_guard lock(mu_);
  entries_.push_back(entry);
}

std::vector<CostLedger::Entry> CostLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

Micro CostLedger::total_cost() const {
  std::lock_guard lock(mu_);
  Micro total = 0;
  for (const auto& e : entries_) total += e.cost;
  return total;
}

double CostLedger::total_tokens(Direction d) const {
  std::lock_guard lock(mu_);
  double total = 0;
  for (const auto& e : entries_) {
    if (e.direction == d) total += e.tokens;
  }
  return total;
}

double CostLedger::tokens(Step s, Direction d) const {
  std::lock_guard lock(mu_);
  double total = 0;
  for (const auto& e : entries_) {
    if (e.step == s && e.direction == d) total += e.tokens;
  }
  return total;
}

Micro CostLedger::cost(Step s) const {
  std::lock_guard lock(mu_);
  Micro total = 0;
  for (const auto& e : entries_) {
    if (e.step == s) total += e.cost;
  }
  return total;
}

void HyperParams::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("params: ") + msg);
  };
  require(B >= 1, "B must be >= 1");
  require(R >= 1, "R must be >= 1");
  require(p >= 1, "p must be >= 1");
  require(k >= 1, "k must be >= 1");
  require(e >= 1, "e must be >= 1");
  require(m >= 1, "m must be >= 1");
  require(L >= 1, "L must be >= 1");
  require(esc_window >= 1, "esc_window must be >= 1");
  require(p <= L, "p must be <= L");
  require(e <= L, "e must be <= L");
  require(esc_window <= L, "esc_window must be <= L");
  require(c_thresh > 0.0 && c_thresh < 1.0, "c_thresh must be in (0, 1)");
  require(temperature >= 0.0, "temperature must be >= 0");
  require(mc_draws >= 1, "mc_draws must be >= 1");
}

namespace {

bool is_numeric_form(std::string_view s) {
  // optional sign, digits possibly grouped by commas, optional fraction
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) continue;
    if (c == ',' && !seen_dot) {
      // separator must sit between digits
      if (i + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i + 1]))) return false;
      continue;
    }
    if (c == '.' && !seen_dot) {
      seen_dot = true;
      continue;
    }
    return false;
  }
  return true;
}

std::string canonicalize_number(std::string_view s) {
  std::string sign;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    if (s.front() == '-') sign = "-";
    s.remove_prefix(1);
  }
  std::string digits;
  digits.reserve(s.size());
  for (char c : s) {
    if (c != ',') digits.push_back(c);
  }
  std::string int_part = digits;
  std::string frac_part;
  if (const auto dot = digits.find('.'); dot != std::string::npos) {
    int_part = digits.substr(0, dot);
    frac_part = digits.substr(dot + 1);
  }
  std::size_t first = int_part.find_first_not_of('0');
  int_part = first == std::string::npos ? "0" : int_part.substr(first);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  std::string out = sign + int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  if (out == "-0") out = "0";
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string s(raw.substr(begin, end - begin));
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  constexpr std::string_view trailing_punct = ".,;:!?";
  while (!s.empty() && trailing_punct.find(s.back()) != std::string_view::npos) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (is_numeric_form(s)) return canonicalize_number(s);
  return s;
}

std::pair<std::string, int> majority_vote(const SampleTally& tally) {
  if (tally.empty()) throw Error("majority_vote: no samples");
  struct Count {
    int count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Count> counts;
  counts.reserve(tally.size());
  for (std::size_t i = 0; i < tally.samples.size(); ++i) {
    auto [it, inserted] = counts.try_emplace(tally.samples[i]);
    if (inserted) it->second.first_seen = i;
    ++it->second.count;
  }
  // max multiplicity, ties broken by earliest first occurrence in draw order
  const std::string* best = nullptr;
  Count best_count;
  for (const auto& [answer, c] : counts) {
    if (best == nullptr || c.count > best_count.count ||
        (c.count == best_count.count && c.first_seen < best_count.first_seen)) {
      best = &answer;
      best_count = c;
    }
  }
  return {*best, best_count.count};
}

double entropy(const SampleTally& tally) {
  if (tally.empty()) throw Error("entropy: no samples");
  std::unordered_map<std::string, int> counts;
  for (const auto& answer : tally.samples) ++counts[answer];
  if (counts.size() == 1) return 0.0;
  const double n = static_cast<double>(tally.size());
  double h = 0.0;
  for (const auto& [answer, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace dsc
