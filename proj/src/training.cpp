#include "windcal/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "windcal/rng.hpp"
#include "windcal/scoring.hpp"

namespace windcal {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::regional: return "regional";
    case Strategy::local: return "local";
    case Strategy::semi_local: return "semi_local";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "regional") return Strategy::regional;
  if (s == "local") return Strategy::local;
  if (s == "semi_local" || s == "semi-local") return Strategy::semi_local;
  throw std::invalid_argument("unknown strategy: " + s);
}

void TrainingPlan::validate(std::size_t station_count) const {
  if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
  if (quantile_count < 1) throw std::invalid_argument("quantile_count must be >= 1");
  if (strategy == Strategy::semi_local) {
    if (cluster_count < 1) throw std::invalid_argument("cluster_count must be >= 1");
    if (static_cast<std::size_t>(cluster_count) > station_count)
      throw std::invalid_argument("cluster_count exceeds station count");
  }
}

std::vector<const ForecastCase*> rolling_window(const Dataset& dataset, Date target_date,
                                                int lead_time, int window_days) {
  if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
  const Date first = target_date - window_days;
  std::vector<const ForecastCase*> out;
  for (const ForecastCase& c : dataset.cases_for_lead(lead_time)) {
    Date v = c.verification_date();
    if (v < first || v >= target_date) continue;
    if (!c.observation) continue;
    out.push_back(&c);
  }
  return out;  // cases_for_lead is already (verification date, station) ordered
}

std::vector<double> equidistant_quantiles(std::vector<double> values, int q) {
  if (values.size() < 2) throw std::invalid_argument("need >= 2 values for quantiles");
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(q));
  for (int i = 1; i <= q; ++i)
    out.push_back(ensemble_quantile(values, static_cast<double>(i) / (q + 1)));
  return out;
}

std::vector<double> climatology_quantiles(const Dataset& dataset, std::uint32_t station,
                                          Date target_date, int q) {
  auto obs = dataset.observations_before(station, target_date);
  if (obs.size() < 2) return {};
  return equidistant_quantiles(std::move(obs), q);
}

std::vector<double> error_quantiles(const Dataset& dataset, std::uint32_t station, int lead_time,
                                    Date target_date, int window_days, int m_low, int m_high,
                                    int q) {
  std::vector<double> errors;
  for (const ForecastCase* c : rolling_window(dataset, target_date, lead_time, window_days)) {
    if (c->station_index != station) continue;
    int ml = std::min<int>(m_low, static_cast<int>(c->members_low.size()));
    int mh = std::min<int>(m_high, static_cast<int>(c->members_high.size()));
    if (ml + mh == 0) continue;
    KahanSum sum;
    for (int m = 0; m < ml; ++m) sum.add(c->members_low[static_cast<std::size_t>(m)]);
    for (int m = 0; m < mh; ++m) sum.add(c->members_high[static_cast<std::size_t>(m)]);
    errors.push_back(sum.value() / (ml + mh) - *c->observation);
  }
  if (errors.size() < 2) return {};
  return equidistant_quantiles(std::move(errors), q);
}

std::vector<FeatureVector> build_features(const Dataset& dataset, int lead_time, Date target_date,
                                          int window_days, int m_low, int m_high, int q) {
  const std::size_t n = dataset.stations().size();
  const std::size_t dim = 2 * static_cast<std::size_t>(q);
  std::vector<FeatureVector> features(n);

  for (std::uint32_t i = 0; i < n; ++i) {
    auto& f = features[i];
    f.station_index = i;
    f.values.assign(dim, 0.0);
    auto clim = climatology_quantiles(dataset, i, target_date, q);
    auto err = error_quantiles(dataset, i, lead_time, target_date, window_days, m_low, m_high, q);
    if (clim.empty())
      throw std::runtime_error("station " + dataset.stations()[i].station_id +
                               " has no climatology before " + target_date.iso());
    std::copy(clim.begin(), clim.end(), f.values.begin());
    if (err.empty()) {
      f.error_block_present = false;
    } else {
      std::copy(err.begin(), err.end(), f.values.begin() + q);
    }
  }

  // z-score per coordinate across stations carrying the full vector
  for (std::size_t c = 0; c < dim; ++c) {
    KahanSum sum;
    std::size_t count = 0;
    for (const auto& f : features) {
      if (c >= static_cast<std::size_t>(q) && !f.error_block_present) continue;
      sum.add(f.values[c]);
      ++count;
    }
    if (count < 2) continue;
    double mean = sum.value() / static_cast<double>(count);
    KahanSum ss;
    for (const auto& f : features) {
      if (c >= static_cast<std::size_t>(q) && !f.error_block_present) continue;
      ss.add((f.values[c] - mean) * (f.values[c] - mean));
    }
    double var = ss.value() / static_cast<double>(count - 1);
    double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (auto& f : features) {
      if (c >= static_cast<std::size_t>(q) && !f.error_block_present) {
        f.values[c] = 0.0;
        continue;
      }
      f.values[c] = (f.values[c] - mean) / sd;
    }
  }
  return features;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

}  // namespace

std::vector<int> kmeans(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, std::vector<double>* wcss_trace) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("kmeans: k must lie in [1, point count]");
  const std::size_t dim = points.front().size();

  // k-means++ seeding
  Rng rng = Rng::substream(seed, 0x6b6d6561u /* "kmea" */);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  centroids.push_back(points[rng.uniform_index(n)]);
  std::vector<double> d2(n);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total, acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    centroids.push_back(points[pick]);
  }

  std::vector<int> assignment(n, 0);
  auto assign_all = [&]() {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = sq_dist(points[i], centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {  // strict: ties keep the lowest cluster index
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    return changed;
  };

  auto record_wcss = [&]() {
    if (!wcss_trace) return;
    KahanSum w;
    for (std::size_t i = 0; i < n; ++i)
      w.add(sq_dist(points[i], centroids[static_cast<std::size_t>(assignment[i])]));
    wcss_trace->push_back(w.value());
  };

  assign_all();
  record_wcss();
  for (int iter = 0; iter < 100; ++iter) {
    // recompute centroids
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                          std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = static_cast<std::size_t>(assignment[i]);
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
      ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
      auto cc = static_cast<std::size_t>(c);
      if (counts[cc] == 0) {
        // re-seed with the point farthest from its own centroid
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          double d = sq_dist(points[i], centroids[static_cast<std::size_t>(assignment[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids[cc] = points[far];
      } else {
        for (std::size_t j = 0; j < dim; ++j)
          centroids[cc][j] = sums[cc][j] / static_cast<double>(counts[cc]);
      }
    }
    bool changed = assign_all();
    record_wcss();
    if (!changed) break;
  }
  return assignment;
}

ClusterResult cluster_stations(const Dataset& dataset, const TrainingPlan& plan, int lead_time,
                               Date target_date, int m_low, int m_high) {
  auto features = build_features(dataset, lead_time, target_date, plan.window_days, m_low, m_high,
                                 plan.quantile_count);
  const std::size_t q = static_cast<std::size_t>(plan.quantile_count);

  std::vector<std::size_t> full;  // indices of stations with both blocks
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].error_block_present) full.push_back(i);
  if (full.size() < static_cast<std::size_t>(plan.cluster_count))
    throw std::runtime_error("cluster_stations: fewer usable stations than clusters");

  std::vector<std::vector<double>> points;
  points.reserve(full.size());
  for (std::size_t i : full) points.push_back(features[i].values);
  auto sub_assignment = kmeans(points, plan.cluster_count, plan.seed);

  ClusterResult result;
  result.assignment.assign(features.size(), -1);
  for (std::size_t j = 0; j < full.size(); ++j) result.assignment[full[j]] = sub_assignment[j];

  // centroids of the climatology block, for the flagged stations
  std::vector<std::vector<double>> clim_centroids(static_cast<std::size_t>(plan.cluster_count),
                                                  std::vector<double>(q, 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(plan.cluster_count), 0);
  for (std::size_t j = 0; j < full.size(); ++j) {
    auto c = static_cast<std::size_t>(sub_assignment[j]);
    for (std::size_t t = 0; t < q; ++t) clim_centroids[c][t] += features[full[j]].values[t];
    ++counts[c];
  }
  for (std::size_t c = 0; c < clim_centroids.size(); ++c)
    if (counts[c] > 0)
      for (double& v : clim_centroids[c]) v /= static_cast<double>(counts[c]);

  for (std::size_t i = 0; i < features.size(); ++i) {
    if (result.assignment[i] >= 0) continue;
    std::span<const double> clim(features[i].values.data(), q);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < plan.cluster_count; ++c) {
      double d = sq_dist(clim, clim_centroids[static_cast<std::size_t>(c)]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    result.assignment[i] = best;
    result.flagged.push_back(static_cast<std::uint32_t>(i));
  }
  return result;
}

TrainingSelection select_training(const TrainingPlan& plan, const Dataset& dataset,
                                  std::uint32_t station, Date target_date, int lead_time,
                                  int m_low, int m_high, const std::vector<int>* assignment) {
  plan.validate(dataset.stations().size());
  auto window = rolling_window(dataset, target_date, lead_time, plan.window_days);

  TrainingSelection sel;
  switch (plan.strategy) {
    case Strategy::regional:
      sel.cases = std::move(window);
      sel.group_id = "region";
      break;
    case Strategy::local:
      for (const ForecastCase* c : window)
        if (c->station_index == station) sel.cases.push_back(c);
      sel.group_id = dataset.stations()[station].station_id;
      break;
    case Strategy::semi_local: {
      ClusterResult computed;
      if (!assignment) {
        computed = cluster_stations(dataset, plan, lead_time, target_date, m_low, m_high);
        assignment = &computed.assignment;
      }
      int cluster = assignment->at(station);
      for (const ForecastCase* c : window)
        if (assignment->at(c->station_index) == cluster) sel.cases.push_back(c);
      sel.group_id = "cluster" + std::to_string(cluster);
      break;
    }
  }
  return sel;
}

}  // namespace windcal
