#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "windcal/emos.hpp"
#include "windcal/nelder_mead.hpp"
#include "windcal/scoring.hpp"

using namespace windcal;

TEST_CASE("nelder-mead minimizes smooth functions") {
  auto quadratic = [](std::span<const double> x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0);
  };
  std::vector<double> start{0.0, 0.0}, steps{0.5, 0.5};
  auto res = nelder_mead(quadratic, start, steps);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(res.x[1] == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(res.value <= quadratic(start));

  auto rosenbrock = [](std::span<const double> x) {
    double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  std::vector<double> s2{-1.2, 1.0};
  auto r2 = nelder_mead(rosenbrock, s2, steps, {1e-9, 2000});
  CHECK(r2.value < rosenbrock(s2));
  CHECK(r2.value < 1e-3);
}

TEST_CASE("nelder-mead is deterministic") {
  auto f = [](std::span<const double> x) { return std::cos(x[0]) + x[0] * x[0] * 0.1; };
  std::vector<double> start{2.0}, steps{0.3};
  auto a = nelder_mead(f, start, steps);
  auto b = nelder_mead(f, start, steps);
  CHECK(a.x[0] == b.x[0]);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("ensemble summary hand arithmetic") {
  std::vector<double> low{2.0, 4.0}, high{3.0};
  auto s = summarize(low, high);
  CHECK(s.mean_low == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(s.mean_high == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(s.count_low == 2);
  CHECK(s.count_high == 1);
  // pooled {2,4,3}: mean 3, sum sq dev 2, sample variance 1
  CHECK(s.pooled_variance == doctest::Approx(1.0).epsilon(1e-14));

  auto single = summarize(std::vector<double>{5.0}, {});
  CHECK(single.pooled_variance == 0.0);
  CHECK(single.count_high == 0);
  CHECK_THROWS_AS(summarize(std::vector<double>{}, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("link evaluates the location/scale map and rejects misuse") {
  EnsembleSummary s;
  s.mean_low = 4.0;
  s.mean_high = 6.0;
  s.pooled_variance = 2.0;
  s.count_low = 10;
  s.count_high = 5;

  EmosCoefficients c{0.5, 0.7, 0.3, 0.4, 0.9, EmosMode::dual, {}};
  TruncatedNormal d = link(c, s);
  CHECK(d.location() == doctest::Approx(0.5 + 0.49 * 6.0 + 0.09 * 4.0).epsilon(1e-14));
  CHECK(d.scale() == doctest::Approx(std::sqrt(0.16 + 0.81 * 2.0)).epsilon(1e-14));

  // sign of b and d must not matter: they enter squared
  EmosCoefficients neg = c;
  neg.b_high = -c.b_high;
  neg.b_low = -c.b_low;
  neg.d = -c.d;
  TruncatedNormal d2 = link(neg, s);
  CHECK(d2.location() == d.location());
  CHECK(d2.scale() == d.scale());

  // pure-high coefficients applied to a case without high members: rejected
  EnsembleSummary low_only = s;
  low_only.count_high = 0;
  EmosCoefficients ph{0.5, 0.7, 0.0, 0.4, 0.9, EmosMode::pure_high, {}};
  CHECK_THROWS_AS(link(ph, low_only), std::invalid_argument);

  // degenerate scale
  EmosCoefficients flat = c;
  flat.c = 0.0;
  flat.d = 0.0;
  CHECK_THROWS_AS(link(flat, s), std::domain_error);
}

TEST_CASE("objective is the mean closed-form CRPS") {
  EnsembleSummary s;
  s.mean_low = 3.0;
  s.count_low = 4;
  s.pooled_variance = 1.5;
  std::vector<TrainingCase> tc = {{s, 2.0}, {s, 4.5}};
  EmosCoefficients c{0.2, 0.0, 0.8, 0.6, 0.5, EmosMode::pure_low, {}};
  TruncatedNormal d = link(c, s);
  double expect = 0.5 * (crps_tn(d, 2.0) + crps_tn(d, 4.5));
  CHECK(objective(c, tc) == doctest::Approx(expect).epsilon(1e-14));
}

namespace {

// Simulates training cases from a known link: y ~ TN(a + b^2 fbar, c^2 + d^2 S^2).
std::vector<TrainingCase> simulate_pure_high(std::size_t n, double a, double b2, double c2,
                                             double d2, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> fbar_d(2.0, 8.0), s2_d(0.5, 2.0);
  std::normal_distribution<double> nd;
  std::vector<TrainingCase> out;
  out.reserve(n);
  while (out.size() < n) {
    EnsembleSummary s;
    s.mean_high = fbar_d(gen);
    s.pooled_variance = s2_d(gen);
    s.count_high = 20;
    double loc = a + b2 * s.mean_high;
    double scale = std::sqrt(c2 + d2 * s.pooled_variance);
    double y = loc + scale * nd(gen);
    if (y <= 0.0) continue;  // rejection draw from the truncated law
    out.push_back({s, y});
  }
  return out;
}

}  // namespace

TEST_CASE("fit recovers known coefficients from simulated data") {
  const double a = 0.5, b2 = 0.8, c2 = 0.3, d2 = 0.5;
  auto training = simulate_pure_high(6000, a, b2, c2, d2, 2024);
  auto fitted = fit(training, EmosMode::pure_high);
  REQUIRE(fitted.has_value());
  CHECK(fitted->b_low == 0.0);

  // mean CRPS of the fit must come within a whisker of the truth's
  EmosCoefficients truth{a, std::sqrt(b2), 0.0, std::sqrt(c2), std::sqrt(d2),
                         EmosMode::pure_high, {}};
  double truth_score = objective(truth, training);
  double fit_score = objective(*fitted, training);
  CHECK(fit_score <= truth_score * 1.005);

  // squared coefficients near the generator's
  CHECK(fitted->a == doctest::Approx(a).epsilon(0.15));
  CHECK(fitted->b_high * fitted->b_high == doctest::Approx(b2).epsilon(0.1));
  CHECK(fitted->c * fitted->c + fitted->d * fitted->d * 1.25 ==
        doctest::Approx(c2 + d2 * 1.25).epsilon(0.15));  // variance at the mean S^2
}

TEST_CASE("fit honors the minimum-cases threshold and is deterministic") {
  auto training = simulate_pure_high(9, 0.5, 0.8, 0.3, 0.5, 3);
  CHECK(!fit(training, EmosMode::pure_high).has_value());
  FitSettings loose;
  loose.min_training_cases = 5;
  CHECK(fit(training, EmosMode::pure_high, std::nullopt, loose).has_value());

  auto big = simulate_pure_high(200, 0.5, 0.8, 0.3, 0.5, 4);
  auto f1 = fit(big, EmosMode::pure_high);
  auto f2 = fit(big, EmosMode::pure_high);
  REQUIRE(f1.has_value());
  REQUIRE(f2.has_value());
  CHECK(f1->a == f2->a);
  CHECK(f1->b_high == f2->b_high);
  CHECK(f1->c == f2->c);
  CHECK(f1->d == f2->d);
}

TEST_CASE("warm-started fit does not end worse than its starting point") {
  auto training = simulate_pure_high(400, 0.2, 1.1, 0.4, 0.6, 5);
  auto cold = fit(training, EmosMode::pure_high);
  REQUIRE(cold.has_value());
  auto training2 = simulate_pure_high(400, 0.2, 1.1, 0.4, 0.6, 6);
  auto warm = fit(training2, EmosMode::pure_high, cold);
  REQUIRE(warm.has_value());
  CHECK(warm->fit_meta.objective <= objective(*cold, training2) + 1e-12);
}

TEST_CASE("dual mode uses both resolutions; pure modes keep the other b at zero") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(2.0, 8.0);
  std::normal_distribution<double> nd;
  std::vector<TrainingCase> tc;
  while (tc.size() < 500) {
    EnsembleSummary s;
    s.mean_low = u(gen);
    s.mean_high = u(gen);
    s.pooled_variance = 1.0;
    s.count_low = 10;
    s.count_high = 5;
    double y = 0.3 + 0.5 * s.mean_high + 0.3 * s.mean_low + 0.7 * nd(gen);
    if (y <= 0.0) continue;
    tc.push_back({s, y});
  }
  auto dual = fit(tc, EmosMode::dual);
  REQUIRE(dual.has_value());
  CHECK(dual->b_high != 0.0);
  CHECK(dual->b_low != 0.0);
  auto ph = fit(tc, EmosMode::pure_high);
  REQUIRE(ph.has_value());
  CHECK(ph->b_low == 0.0);
  auto pl = fit(tc, EmosMode::pure_low);
  REQUIRE(pl.has_value());
  CHECK(pl->b_high == 0.0);
  // the richer model can only do better on its own training set
  CHECK(dual->fit_meta.objective <= ph->fit_meta.objective + 1e-9);
  CHECK(dual->fit_meta.objective <= pl->fit_meta.objective + 1e-9);
}

TEST_CASE("mode string round trip") {
  for (EmosMode m : {EmosMode::dual, EmosMode::pure_high, EmosMode::pure_low})
    CHECK(emos_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(emos_mode_from_string("nope"), std::invalid_argument);
}
