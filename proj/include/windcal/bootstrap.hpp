#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "windcal/rng.hpp"

namespace windcal {

struct BootstrapSettings {
  int replicates = 2000;
  double confidence = 0.95;
  // Geometric mean block length; defaults to n^(1/3) of the series length.
  std::optional<double> mean_block_length;
  std::uint64_t seed = 0;

  double block_length_for(std::size_t n) const;
};

// Stationary bootstrap index sequence of length n: blocks start at uniform
// positions, lengths are geometric with the given mean, indices wrap
// circularly.
std::vector<std::size_t> stationary_resample(std::size_t n, double mean_block_length, Rng& rng);

struct SkillSummary {
  double skill = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Gaussian confidence interval for the skill score 1 - mean(score)/mean(ref),
// with the standard deviation taken from block-bootstrap replicates that
// resample both per-date series jointly. Throws std::domain_error when the
// reference series mean is not positive, std::invalid_argument on mismatched
// or too-short series.
SkillSummary skill_ci(std::span<const double> score_series, std::span<const double> ref_series,
                      const BootstrapSettings& settings);

}  // namespace windcal
