#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "windcal/dataset.hpp"

namespace windcal {

enum class Strategy { regional, local, semi_local };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct TrainingPlan {
  Strategy strategy = Strategy::regional;
  int window_days = 60;
  int cluster_count = 1;  // semi-local only
  int quantile_count = 12;
  std::uint64_t seed = 0;

  void validate(std::size_t station_count) const;  // throws std::invalid_argument
};

// All forecast-observation pairs at the given lead time whose verification
// date lies in the window_days most recent dates strictly before target_date
// and whose observation exists. Ordered by (verification date, station).
std::vector<const ForecastCase*> rolling_window(const Dataset& dataset, Date target_date,
                                                int lead_time, int window_days);

// Empirical quantiles at levels i/(q+1), i=1..q (linear interpolation).
std::vector<double> equidistant_quantiles(std::vector<double> values, int q);

// Climatology block: quantiles of all observations at the station strictly
// before target_date. Empty when fewer than 2 observations exist.
std::vector<double> climatology_quantiles(const Dataset& dataset, std::uint32_t station,
                                          Date target_date, int q = 12);

// Error block: quantiles of (pooled ensemble mean - observation) over the
// training window, using the (m_low, m_high) member prefixes. Empty when the
// window holds no usable pair for the station.
std::vector<double> error_quantiles(const Dataset& dataset, std::uint32_t station, int lead_time,
                                    Date target_date, int window_days, int m_low, int m_high,
                                    int q = 12);

struct FeatureVector {
  std::uint32_t station_index = 0;
  std::vector<double> values;  // 2q standardized coordinates
  bool error_block_present = true;
};

// Feature vectors for every station: climatology block plus error block,
// z-scored per coordinate across the stations that carry both blocks.
// Stations lacking the error block keep a standardized climatology block
// only (error coordinates zero) and are flagged.
std::vector<FeatureVector> build_features(const Dataset& dataset, int lead_time, Date target_date,
                                          int window_days, int m_low, int m_high, int q = 12);

// Lloyd iterations from k-means++ seeding, Euclidean distance, at most 100
// iterations, deterministic given the seed. Equidistant centroids resolve to
// the lowest cluster index; empty clusters are re-seeded with the point
// farthest from its centroid. When given, `wcss_trace` receives the
// within-cluster sum of squares after every assignment step.
std::vector<int> kmeans(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, std::vector<double>* wcss_trace = nullptr);

// Cluster assignment per station for one (verification date, lead time).
// Stations without an error block are assigned to the nearest centroid by
// climatology block alone.
struct ClusterResult {
  std::vector<int> assignment;            // station index -> cluster
  std::vector<std::uint32_t> flagged;     // stations assigned by climatology only
};
ClusterResult cluster_stations(const Dataset& dataset, const TrainingPlan& plan, int lead_time,
                               Date target_date, int m_low, int m_high);

struct TrainingSelection {
  std::vector<const ForecastCase*> cases;  // ordered by (verification date, station)
  std::string group_id;
};

// Regional: all stations' windowed pairs. Local: the station's own pairs.
// Semi-local: pairs of all stations sharing the station's cluster, clusters
// recomputed per verification date. `assignment` may carry a precomputed
// cluster assignment for semi-local; when null it is computed on the fly.
TrainingSelection select_training(const TrainingPlan& plan, const Dataset& dataset,
                                  std::uint32_t station, Date target_date, int lead_time,
                                  int m_low, int m_high,
                                  const std::vector<int>* assignment = nullptr);

}  // namespace windcal
