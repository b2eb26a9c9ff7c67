#include "windcal/emos.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "windcal/nelder_mead.hpp"
#include "windcal/scoring.hpp"

namespace windcal {

std::string to_string(EmosMode mode) {
  switch (mode) {
    case EmosMode::dual: return "dual";
    case EmosMode::pure_high: return "pure_high";
    case EmosMode::pure_low: return "pure_low";
  }
  return "?";
}

EmosMode emos_mode_from_string(const std::string& s) {
  if (s == "dual") return EmosMode::dual;
  if (s == "pure_high") return EmosMode::pure_high;
  if (s == "pure_low") return EmosMode::pure_low;
  throw std::invalid_argument("unknown EMOS mode: " + s);
}

EnsembleSummary summarize(std::span<const double> members_low,
                          std::span<const double> members_high) {
  const std::size_t n = members_low.size() + members_high.size();
  if (n == 0) throw std::invalid_argument("summarize: no members");

  EnsembleSummary s;
  s.count_low = static_cast<int>(members_low.size());
  s.count_high = static_cast<int>(members_high.size());

  KahanSum pooled;
  if (s.count_low > 0) {
    KahanSum sum;
    for (double v : members_low) sum.add(v), pooled.add(v);
    s.mean_low = sum.value() / s.count_low;
  }
  if (s.count_high > 0) {
    KahanSum sum;
    for (double v : members_high) sum.add(v), pooled.add(v);
    s.mean_high = sum.value() / s.count_high;
  }
  if (n >= 2) {
    const double pooled_mean = pooled.value() / static_cast<double>(n);
    KahanSum ss;
    for (double v : members_low) ss.add((v - pooled_mean) * (v - pooled_mean));
    for (double v : members_high) ss.add((v - pooled_mean) * (v - pooled_mean));
    s.pooled_variance = std::max(0.0, ss.value() / static_cast<double>(n - 1));
  }
  return s;
}

EnsembleSummary summarize(const ForecastCase& c) {
  return summarize(c.members_low, c.members_high);
}

TruncatedNormal link(const EmosCoefficients& k, const EnsembleSummary& s) {
  if (s.count_high == 0 && k.b_high != 0.0)
    throw std::invalid_argument("link: b_high must be 0 when no high-resolution members");
  if (s.count_low == 0 && k.b_low != 0.0)
    throw std::invalid_argument("link: b_low must be 0 when no low-resolution members");
  double location = k.a;
  if (s.count_high > 0) location += k.b_high * k.b_high * s.mean_high;
  if (s.count_low > 0) location += k.b_low * k.b_low * s.mean_low;
  double var = k.c * k.c + k.d * k.d * s.pooled_variance;
  if (!(var > 0.0)) throw std::domain_error("link: degenerate predictive scale");
  return TruncatedNormal(location, std::sqrt(var));
}

double objective(const EmosCoefficients& k, std::span<const TrainingCase> training) {
  if (training.empty()) throw std::invalid_argument("objective: empty training set");
  constexpr double inf = std::numeric_limits<double>::infinity();
  KahanSum sum;
  for (const TrainingCase& t : training) {
    double location = k.a;
    if (t.summary.count_high > 0) location += k.b_high * k.b_high * t.summary.mean_high;
    if (t.summary.count_low > 0) location += k.b_low * k.b_low * t.summary.mean_low;
    double var = k.c * k.c + k.d * k.d * t.summary.pooled_variance;
    if (!(var > 0.0)) return inf;
    double v = crps_tn(TruncatedNormal(location, std::sqrt(var)), t.observation);
    if (!std::isfinite(v)) return inf;
    sum.add(v);
  }
  return sum.value() / static_cast<double>(training.size());
}

namespace {

struct ActiveParams {
  bool use_b_high = false;
  bool use_b_low = false;

  std::vector<double> pack(const EmosCoefficients& k) const {
    std::vector<double> x{k.a};
    if (use_b_high) x.push_back(k.b_high);
    if (use_b_low) x.push_back(k.b_low);
    x.push_back(k.c);
    x.push_back(k.d);
    return x;
  }

  EmosCoefficients unpack(std::span<const double> x, EmosMode mode) const {
    EmosCoefficients k;
    std::size_t i = 0;
    k.a = x[i++];
    k.b_high = use_b_high ? x[i++] : 0.0;
    k.b_low = use_b_low ? x[i++] : 0.0;
    k.c = x[i++];
    k.d = x[i++];
    k.mode = mode;
    return k;
  }
};

}  // namespace

std::optional<EmosCoefficients> fit(std::span<const TrainingCase> training, EmosMode mode,
                                    const std::optional<EmosCoefficients>& init,
                                    const FitSettings& settings) {
  if (training.size() < settings.min_training_cases) return std::nullopt;

  bool have_high = false, have_low = false;
  for (const TrainingCase& t : training) {
    have_high = have_high || t.summary.count_high > 0;
    have_low = have_low || t.summary.count_low > 0;
  }

  ActiveParams active;
  active.use_b_high = mode != EmosMode::pure_low && have_high;
  active.use_b_low = mode != EmosMode::pure_high && have_low;

  EmosCoefficients start;
  if (init) {
    start = *init;
    if (!active.use_b_high) start.b_high = 0.0;
    if (!active.use_b_low) start.b_low = 0.0;
  } else {
    start.a = 0.0;
    if (active.use_b_high && active.use_b_low)
      start.b_high = start.b_low = std::sqrt(0.5);
    else if (active.use_b_high)
      start.b_high = 1.0;
    else if (active.use_b_low)
      start.b_low = 1.0;
    start.c = 1.0;
    start.d = 1.0;
  }
  start.mode = mode;

  auto f = [&](std::span<const double> x) {
    return objective(active.unpack(x, mode), training);
  };

  std::vector<double> x0 = active.pack(start);
  std::vector<double> steps(x0.size(), settings.initial_step);

  NelderMeadOptions options{settings.tolerance, settings.max_iterations};
  NelderMeadResult first = nelder_mead(f, x0, steps, options);

  // One restart from the best vertex with a re-inflated simplex.
  std::vector<double> restart_steps(x0.size(), settings.restart_step);
  NelderMeadResult second = nelder_mead(f, first.x, restart_steps, options);

  const NelderMeadResult& best = second.value <= first.value ? second : first;
  if (!std::isfinite(best.value))
    throw std::runtime_error("fit: objective non-finite at every probe");

  EmosCoefficients out = active.unpack(best.x, mode);
  out.fit_meta = {best.value, first.iterations + second.iterations,
                  first.converged && second.converged};
  return out;
}

std::optional<EmosCoefficients> fit_cases(std::span<const ForecastCase> training, EmosMode mode,
                                          const std::optional<EmosCoefficients>& init,
                                          const FitSettings& settings) {
  std::vector<TrainingCase> tc;
  tc.reserve(training.size());
  for (const ForecastCase& c : training) {
    if (!c.observation) continue;
    if (c.members_low.empty() && c.members_high.empty()) continue;
    tc.push_back({summarize(c), *c.observation});
  }
  return fit(tc, mode, init, settings);
}

}  // namespace windcal
