#include "windcal/nelder_mead.hpp"

#include <algorithm>
#include <numeric>

namespace windcal {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> start,
                             std::span<const double> initial_steps,
                             const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> x(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) x[i + 1][i] += initial_steps[i];

  NelderMeadResult res;
  std::vector<double> fx(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    fx[j] = objective(x[j]);
    ++res.evaluations;
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), candidate(n);

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    if (fx[worst] - fx[best] < options.tolerance) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += x[j][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto try_point = [&](double scale) {
      for (std::size_t i = 0; i < n; ++i)
        candidate[i] = centroid[i] + scale * (x[worst][i] - centroid[i]);
      ++res.evaluations;
      return objective(candidate);
    };

    double f_refl = try_point(-alpha);
    if (f_refl < fx[order[0]]) {
      std::vector<double> reflected = candidate;
      double f_exp = try_point(-alpha * gamma);
      if (f_exp < f_refl) {
        x[worst] = candidate;
        fx[worst] = f_exp;
      } else {
        x[worst] = std::move(reflected);
        fx[worst] = f_refl;
      }
    } else if (f_refl < fx[second_worst]) {
      x[worst] = candidate;
      fx[worst] = f_refl;
    } else {
      double f_contr = f_refl < fx[worst] ? try_point(-alpha * rho) : try_point(rho);
      if (f_contr < std::min(f_refl, fx[worst])) {
        x[worst] = candidate;
        fx[worst] = f_contr;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t j = 0; j <= n; ++j) {
          if (j == best) continue;
          for (std::size_t i = 0; i < n; ++i)
            x[j][i] = x[best][i] + sigma * (x[j][i] - x[best][i]);
          fx[j] = objective(x[j]);
          ++res.evaluations;
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j <= n; ++j)
    if (fx[j] < fx[best]) best = j;
  res.x = x[best];
  res.value = fx[best];
  return res;
}

}  // namespace windcal
