#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "dsc/core.hpp"

namespace dsc {

struct CriterionVerdict {
  bool stop = false;
  std::optional<double> confidence;  // Dirichlet only: posterior estimate
};

// Dirichlet posterior stopping rule over the distinct observed answers.
//
// Posterior = Dirichlet(counts + 1) (symmetric prior alpha = 1, observed
// categories only). Stops when the estimated probability that the leading
// answer's category probability exceeds every other category's passes
// c_thresh. The estimate is Monte Carlo: per draw, one Gamma(count+1)
// variate per category, leader wins iff its variate is the strict max.
//
// Fewer than 3 samples never stop. Exactly one distinct answer with >= 3
// samples stops with confidence 1 (no Monte Carlo needed: the posterior is
// a point mass on the single observed category).
//
// mc_draws below 1000 is a configuration error: the estimator would be too
// noisy to compare against a 0.95 threshold.
CriterionVerdict dirichlet_should_stop(const SampleTally& tally, double c_thresh, int mc_draws,
                                       std::uint64_t seed);

// Unanimity test over one sampling window. The window must have exactly the
// configured length; answers are normalized before comparison.
bool esc_window_should_stop(std::span<const std::string> window, int configured_window);

}  // namespace dsc
