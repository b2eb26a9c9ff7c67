#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "windcal/scoring.hpp"

using namespace windcal;

TEST_CASE("closed-form truncated-normal CRPS matches the numeric integral") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> mu_d(-3.0, 8.0), sig_d(0.1, 4.0), y_d(0.0, 12.0);
  for (int i = 0; i < 60; ++i) {
    double mu = mu_d(gen), sigma = sig_d(gen), y = y_d(gen);
    TruncatedNormal d(mu, sigma);
    double closed = crps_tn(d, y);
    double numeric = oracle::crps_numeric({mu, sigma}, y);
    CHECK(closed == doctest::Approx(numeric).epsilon(1e-8));
    CHECK(closed >= 0.0);
  }
}

TEST_CASE("CRPS stays accurate under extreme truncation") {
  // References computed with 60-digit arithmetic (quadrature of the stable
  // survival-ratio cdf); double-precision quadrature cannot reach this
  // regime, where almost the entire normal mass sits below zero.
  struct Ref {
    double mu, sigma, y, crps;
  };
  const Ref refs[] = {
      {-3.0, 0.05, 0.2, 0.19875075121601154762},
      {-10.0, 1.0, 0.05, 0.020788423718314897409},
      {-60.0, 1.0, 0.01, 0.0032915946453670220294},
      {-200.0, 2.0, 0.005, 0.006150646516511727161},
      {5.0, 0.001, 5.0005, 0.00033140353125474966219},
  };
  for (const Ref& r : refs) {
    CAPTURE(r.mu);
    CHECK(crps_tn(TruncatedNormal(r.mu, r.sigma), r.y) ==
          doctest::Approx(r.crps).epsilon(1e-7));
  }
}

TEST_CASE("truncated-normal CRPS handles edge observations") {
  TruncatedNormal d(2.0, 1.0);
  CHECK(crps_tn(d, 0.0) == doctest::Approx(oracle::crps_numeric({2.0, 1.0}, 0.0)).epsilon(1e-8));
  CHECK_THROWS_AS(crps_tn(d, -0.5), std::domain_error);
  // observation far in the tail: y - E[X] - (1/2) E|X - X'|
  double far = crps_tn(d, 50.0);
  CHECK(far == doctest::Approx(oracle::crps_numeric({2.0, 1.0}, 50.0)).epsilon(1e-7));
  CHECK(far > 45.0);
  CHECK(far < 50.0);
}

TEST_CASE("ensemble CRPS agrees with the O(M^2) definition") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t m = 1 + gen() % 12;
    std::vector<double> x(m);
    for (auto& v : x) v = u(gen);
    double y = u(gen);
    double direct = 0.0;
    for (double v : x) direct += std::abs(v - y) / static_cast<double>(m);
    for (double a : x)
      for (double b : x) direct -= std::abs(a - b) / (2.0 * static_cast<double>(m * m));
    CHECK(crps_ensemble(x, y) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("ensemble CRPS hand values and identities") {
  std::vector<double> two{0.0, 1.0};
  CHECK(crps_ensemble(two, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(crps_ensemble(two, 0.5, /*fair=*/true) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<double> one{3.0};
  CHECK(crps_ensemble(one, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(crps_ensemble(one, 1.0, /*fair=*/true), std::invalid_argument);
  CHECK_THROWS_AS(crps_ensemble(std::vector<double>{}, 1.0), std::invalid_argument);

  // positive homogeneity: CRPS(cX, cy) = c CRPS(X, y)
  std::vector<double> x{1.0, 2.5, 4.0, 0.2};
  double base = crps_ensemble(x, 1.7);
  std::vector<double> scaled;
  for (double v : x) scaled.push_back(3.0 * v);
  CHECK(crps_ensemble(scaled, 3.0 * 1.7) == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("ensemble CRPS converges to the parametric CRPS as M grows") {
  oracle::Tn ref{2.0, 1.5};
  TruncatedNormal d(2.0, 1.5);
  auto sample = oracle::tn_sample(ref, 40000, 99);
  double y = 2.8;
  CHECK(crps_ensemble(sample, y) == doctest::Approx(crps_tn(d, y)).epsilon(0.02));
}

TEST_CASE("brier score is the squared probability error at the threshold") {
  TruncatedNormal d(4.0, 2.0);
  for (double t : {1.0, 4.0, 9.0}) {
    double p = d.cdf(t);
    CHECK(brier(d, 6.0, t) == doctest::Approx((p - (t >= 6.0 ? 1.0 : 0.0)) *
                                              (p - (t >= 6.0 ? 1.0 : 0.0)))
                                  .epsilon(1e-14));
  }
  std::vector<double> x{1.0, 2.0, 3.0, 10.0};
  CHECK(brier_ensemble(x, 5.0, 3.5) == doctest::Approx(0.75 * 0.75).epsilon(1e-14));
  CHECK(brier_ensemble(x, 2.0, 3.5) == doctest::Approx(0.25 * 0.25).epsilon(1e-14));
}

TEST_CASE("brier integral over thresholds recovers the CRPS") {
  TruncatedNormal d(3.0, 1.2);
  double y = 3.7;
  // CRPS = int BS(t) dt; trapezoid over a wide grid
  double lo = 0.0, hi = 3.0 + 14.0 * 1.2;
  int n = 20000;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    double t = lo + (hi - lo) * i / n;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * brier(d, y, t);
  }
  sum *= (hi - lo) / n;
  CHECK(sum == doctest::Approx(crps_tn(d, y)).epsilon(1e-4));
}

TEST_CASE("quantile score is the pinball loss at the predictive quantile") {
  TruncatedNormal d(2.0, 1.0);
  for (double tau : {0.05, 0.5, 0.9}) {
    double q = d.quantile(tau);
    double y = 2.6;
    double expect = y >= q ? tau * (y - q) : (1.0 - tau) * (q - y);
    CHECK(quantile_score(d, y, tau) == doctest::Approx(expect).epsilon(1e-13));
  }
  // tau = 0.5 pinball is half the absolute median error
  double y = 0.9;
  CHECK(quantile_score(d, y, 0.5) ==
        doctest::Approx(0.5 * std::abs(y - d.median())).epsilon(1e-13));
}

TEST_CASE("median quantile score is proportional to the absolute median error") {
  // The proportionality makes their skill scores identical.
  TruncatedNormal d(3.0, 2.0);
  for (double y : {0.0, 1.2, 3.1, 7.7})
    CHECK(2.0 * quantile_score(d, y, 0.5) ==
          doctest::Approx(point_errors(d, y).ae_median).epsilon(1e-13));
  std::vector<double> x{0.5, 1.0, 2.0, 8.0};
  for (double y : {0.2, 1.4, 5.0})
    CHECK(2.0 * quantile_score_ensemble(x, y, 0.5) ==
          doctest::Approx(point_errors_ensemble(x, y).ae_median).epsilon(1e-13));
}

TEST_CASE("type-7 sample quantiles") {
  std::vector<double> x{4.0, 1.0, 3.0, 2.0};
  CHECK(ensemble_quantile(x, 0.5) == doctest::Approx(2.5).epsilon(1e-15));  // midpoint median
  CHECK(ensemble_quantile(x, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  std::vector<double> odd{5.0, 1.0, 3.0};
  CHECK(ensemble_quantile(odd, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(ensemble_quantile(odd, 0.999) == doctest::Approx(5.0 - 0.002 * 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(ensemble_quantile(x, 0.0), std::domain_error);
  CHECK_THROWS_AS(ensemble_quantile(x, 1.0), std::domain_error);
}

TEST_CASE("point errors") {
  std::vector<double> x{1.0, 3.0};
  auto pe = point_errors_ensemble(x, 5.0);
  CHECK(pe.ae_median == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(pe.se_mean == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("skill score definition and guards") {
  CHECK(skill_score(0.8, 1.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(skill_score(1.2, 1.0) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK_THROWS_AS(skill_score(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(skill_score(1.0, -2.0), std::domain_error);
}

TEST_CASE("aggregation is permutation invariant and arithmetically right") {
  std::vector<ScoreRecord> records = {
      {"m", "s1", Date(2023, 5, 1), 1, "CRPS", 1.0},
      {"m", "s2", Date(2023, 5, 1), 1, "CRPS", 3.0},
      {"m", "s1", Date(2023, 5, 2), 1, "CRPS", 5.0},
      {"m", "s1", Date(2023, 5, 1), 2, "CRPS", 100.0},
      {"m", "s1", Date(2023, 5, 1), 1, "BS@5", 0.25},
  };
  auto agg = aggregate(records);
  const auto& g = agg.at({"m", "CRPS", 1});
  CHECK(g.cell_count == 3);
  CHECK(g.mean == doctest::Approx(3.0).epsilon(1e-15));
  REQUIRE(g.daily_means.size() == 2);
  CHECK(g.daily_means[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.daily_means[1] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(g.dates[0] < g.dates[1]);
  CHECK(agg.at({"m", "CRPS", 2}).mean == doctest::Approx(100.0));
  CHECK(agg.count({"m", "BS@10", 1}) == 0);

  std::vector<ScoreRecord> shuffled = {records[3], records[1], records[4], records[0],
                                       records[2]};
  auto agg2 = aggregate(shuffled);
  CHECK(agg2.at({"m", "CRPS", 1}).mean == g.mean);
  CHECK(agg2.at({"m", "CRPS", 1}).daily_means == g.daily_means);
}
