#pragma once

#include <functional>
#include <span>
#include <vector>

namespace windcal {

struct NelderMeadOptions {
  double tolerance = 1e-6;   // stop when max-min objective spread over the simplex is below this
  int max_iterations = 500;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex minimization with the standard reflection /
// expansion / contraction / shrink coefficients. Deterministic.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> start,
                             std::span<const double> initial_steps,
                             const NelderMeadOptions& options = {});

}  // namespace windcal
