#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windcal/dataset.hpp"
#include "windcal/truncated_normal.hpp"

namespace windcal {

enum class EmosMode { dual, pure_high, pure_low };

std::string to_string(EmosMode mode);
EmosMode emos_mode_from_string(const std::string& s);

struct EnsembleSummary {
  double mean_high = 0.0;      // defined iff count_high >= 1
  double mean_low = 0.0;       // defined iff count_low >= 1
  double pooled_variance = 0.0;  // sample variance (M-1) of all pooled members
  int count_high = 0;
  int count_low = 0;
};

// Group means per resolution plus pooled sample variance. With exactly one
// pooled member the variance is 0. Throws on zero members.
EnsembleSummary summarize(std::span<const double> members_low,
                          std::span<const double> members_high);
EnsembleSummary summarize(const ForecastCase& c);

struct FitMeta {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// The five link parameters. b_high, b_low, and d enter the link squared, so
// their signs are irrelevant.
struct EmosCoefficients {
  double a = 0.0;
  double b_high = 0.0;
  double b_low = 0.0;
  double c = 1.0;
  double d = 1.0;
  EmosMode mode = EmosMode::dual;
  FitMeta fit_meta;
};

// location = a + b_high^2 mean_high + b_low^2 mean_low
// scale    = sqrt(c^2 + d^2 pooled_variance)
// A nonzero b for an absent group is rejected; zero scale throws
// std::domain_error (degenerate predictive).
TruncatedNormal link(const EmosCoefficients& coeffs, const EnsembleSummary& s);

struct TrainingCase {
  EnsembleSummary summary;
  double observation = 0.0;
};

// Mean closed-form CRPS over the training set; +inf when any case yields a
// degenerate predictive scale (optimizer-safe rejection).
double objective(const EmosCoefficients& coeffs, std::span<const TrainingCase> training);

struct FitSettings {
  std::size_t min_training_cases = 10;
  double tolerance = 1e-6;  // simplex objective spread
  int max_iterations = 500;
  double initial_step = 0.3;   // cold-start simplex edge
  double restart_step = 0.05;  // re-inflation around the best vertex
};

// CRPS minimization via Nelder-Mead with one restart from the best vertex.
// Returns nullopt when fewer than min_training_cases usable cases are given
// (fit-skipped; the caller applies its fallback policy). Throws
// std::runtime_error when the objective is non-finite at every probe.
std::optional<EmosCoefficients> fit(std::span<const TrainingCase> training, EmosMode mode,
                                    const std::optional<EmosCoefficients>& init = std::nullopt,
                                    const FitSettings& settings = {});

// Convenience: summarizes the cases, dropping those without an observation.
std::optional<EmosCoefficients> fit_cases(std::span<const ForecastCase> training, EmosMode mode,
                                          const std::optional<EmosCoefficients>& init = std::nullopt,
                                          const FitSettings& settings = {});

}  // namespace windcal
