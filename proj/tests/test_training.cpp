#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "windcal/training.hpp"

using namespace windcal;

namespace {

// Small deterministic dataset: `n_stations` stations, daily init dates, one
// lead time, two low members and one high member per case.
Dataset make_dataset(int n_stations, int n_dates, int lead = 1) {
  std::vector<Station> stations;
  for (int s = 0; s < n_stations; ++s)
    stations.push_back({"S" + std::to_string(s), 50.0 + s, 10.0, 2.0});
  Dataset ds(std::move(stations));
  std::mt19937_64 gen(501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Date start(2023, 3, 1);
  for (int t = 0; t < n_dates; ++t) {
    for (int s = 0; s < n_stations; ++s) {
      double base = 2.0 + s * 0.5 + std::sin(0.2 * t);
      ds.add_observation(static_cast<std::uint32_t>(s), start + (t + lead),
                         std::max(0.0, base + u(gen)));
      ForecastCase c;
      c.station_index = static_cast<std::uint32_t>(s);
      c.init_date = start + t;
      c.lead_time = lead;
      c.members_low = {base + u(gen), base + u(gen)};
      c.members_high = {base + 0.5 * u(gen)};
      ds.add_case(std::move(c));
    }
  }
  ds.finalize();
  return ds;
}

double wcss_of(const std::vector<std::vector<double>>& pts, const std::vector<int>& assign,
               int k) {
  std::size_t dim = pts.front().size();
  std::vector<std::vector<double>> cent(static_cast<std::size_t>(k),
                                        std::vector<double>(dim, 0.0));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) cent[assign[i]][j] += pts[i][j];
    ++counts[assign[i]];
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0)
      for (double& v : cent[c]) v /= counts[c];
  double w = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      double d = pts[i][j] - cent[assign[i]][j];
      w += d * d;
    }
  return w;
}

}  // namespace

TEST_CASE("rolling window takes the half-open interval before the target date") {
  Dataset ds = make_dataset(2, 30);
  Date target = Date(2023, 3, 1) + 21;  // init dates t=0..29, verification t+1
  auto window = rolling_window(ds, target, 1, 5);
  // verification dates in [target-5, target): t+1 in {16..20} -> 5 dates x 2 stations
  CHECK(window.size() == 10);
  for (const ForecastCase* c : window) {
    CHECK(c->verification_date() >= target - 5);
    CHECK(c->verification_date() < target);
    CHECK(c->observation.has_value());
  }
  // ordered by (verification date, station)
  for (std::size_t i = 1; i < window.size(); ++i) {
    auto a = std::make_pair(window[i - 1]->verification_date(), window[i - 1]->station_index);
    auto b = std::make_pair(window[i]->verification_date(), window[i]->station_index);
    CHECK(a < b);
  }
  CHECK_THROWS_AS(rolling_window(ds, target, 1, 0), std::invalid_argument);
}

TEST_CASE("rolling window never sees the target date or anything later") {
  Dataset ds = make_dataset(1, 40);
  Date target = Date(2023, 3, 1) + 30;
  for (const ForecastCase* c : rolling_window(ds, target, 1, 60))
    CHECK(c->verification_date() < target);
}

TEST_CASE("equidistant quantiles hit the i/(q+1) levels exactly on a uniform grid") {
  // 14 values 0..13 with q=12: type-7 position h = 13 * i/13 = i
  std::vector<double> v;
  for (int i = 0; i <= 13; ++i) v.push_back(static_cast<double>(i));
  auto qs = equidistant_quantiles(v, 12);
  REQUIRE(qs.size() == 12);
  for (int i = 1; i <= 12; ++i) CHECK(qs[i - 1] == doctest::Approx(i).epsilon(1e-14));
  CHECK(std::is_sorted(qs.begin(), qs.end()));
  CHECK_THROWS_AS(equidistant_quantiles({1.0}, 12), std::invalid_argument);
}

TEST_CASE("feature vectors are standardized per coordinate") {
  Dataset ds = make_dataset(8, 60);
  Date target = Date(2023, 3, 1) + 50;
  auto features = build_features(ds, 1, target, 30, 2, 1);
  REQUIRE(features.size() == 8);
  for (const auto& f : features) {
    CHECK(f.values.size() == 24);
    CHECK(f.error_block_present);
  }
  for (std::size_t c = 0; c < 24; ++c) {
    double mean = 0.0, var = 0.0;
    for (const auto& f : features) mean += f.values[c];
    mean /= features.size();
    for (const auto& f : features) var += (f.values[c] - mean) * (f.values[c] - mean);
    var /= features.size() - 1;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("kmeans degenerate and exact cases") {
  std::vector<std::vector<double>> pts = {{0.0, 0.0}, {0.1, 0.0}, {5.0, 5.0}, {5.1, 5.0}};
  auto one = kmeans(pts, 1, 9);
  CHECK(one == std::vector<int>(4, 0));
  auto all = kmeans(pts, 4, 9);
  std::set<int> distinct(all.begin(), all.end());
  CHECK(distinct.size() == 4);
  CHECK(wcss_of(pts, all, 4) == doctest::Approx(0.0));
  auto two = kmeans(pts, 2, 9);
  CHECK(two[0] == two[1]);
  CHECK(two[2] == two[3]);
  CHECK(two[0] != two[2]);
  CHECK_THROWS_AS(kmeans(pts, 0, 9), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(pts, 5, 9), std::invalid_argument);
}

TEST_CASE("kmeans objective never increases across Lloyd iterations") {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<std::vector<double>> pts(40, std::vector<double>(3));
    for (auto& p : pts)
      for (double& v : p) v = nd(gen);
    std::vector<double> trace;
    auto assign = kmeans(pts, 4, static_cast<std::uint64_t>(rep), &trace);
    REQUIRE(trace.size() >= 1);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
    // the returned assignment is a partition into valid cluster ids
    for (int a : assign) {
      CHECK(a >= 0);
      CHECK(a < 4);
    }
  }
}

TEST_CASE("kmeans is deterministic in the seed") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> pts(30, std::vector<double>(4));
  for (auto& p : pts)
    for (double& v : p) v = nd(gen);
  CHECK(kmeans(pts, 5, 42) == kmeans(pts, 5, 42));
}

TEST_CASE("cluster assignment covers every station") {
  Dataset ds = make_dataset(10, 60);
  TrainingPlan plan;
  plan.strategy = Strategy::semi_local;
  plan.window_days = 30;
  plan.cluster_count = 3;
  plan.seed = 5;
  auto result = cluster_stations(ds, plan, 1, Date(2023, 3, 1) + 50, 2, 1);
  REQUIRE(result.assignment.size() == 10);
  for (int a : result.assignment) {
    CHECK(a >= 0);
    CHECK(a < 3);
  }
}

TEST_CASE("semi-local with one cluster selects exactly the regional window") {
  Dataset ds = make_dataset(6, 50);
  Date target = Date(2023, 3, 1) + 40;
  TrainingPlan regional;
  regional.strategy = Strategy::regional;
  regional.window_days = 25;
  TrainingPlan semi = regional;
  semi.strategy = Strategy::semi_local;
  semi.cluster_count = 1;
  auto reg = select_training(regional, ds, 2, target, 1, 2, 1);
  auto sl = select_training(semi, ds, 2, target, 1, 2, 1);
  REQUIRE(reg.cases.size() == sl.cases.size());
  for (std::size_t i = 0; i < reg.cases.size(); ++i) CHECK(reg.cases[i] == sl.cases[i]);
}

TEST_CASE("local selection keeps only the station's own cases") {
  Dataset ds = make_dataset(4, 50);
  TrainingPlan plan;
  plan.strategy = Strategy::local;
  plan.window_days = 20;
  auto sel = select_training(plan, ds, 3, Date(2023, 3, 1) + 40, 1, 2, 1);
  CHECK(sel.cases.size() == 20);
  for (const ForecastCase* c : sel.cases) CHECK(c->station_index == 3);
  CHECK(sel.group_id == "S3");
}

TEST_CASE("strategy string round trip") {
  for (Strategy s : {Strategy::regional, Strategy::local, Strategy::semi_local})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK(strategy_from_string("semi-local") == Strategy::semi_local);
  CHECK_THROWS_AS(strategy_from_string("global"), std::invalid_argument);
}
