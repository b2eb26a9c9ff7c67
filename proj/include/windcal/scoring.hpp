#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "windcal/date.hpp"
#include "windcal/truncated_normal.hpp"

namespace windcal {

// ---- proper scoring rules, parametric predictive law ----

// Closed-form CRPS of the zero-truncated normal. Observation must be >= 0.
double crps_tn(const TruncatedNormal& d, double y);

double brier(const TruncatedNormal& d, double y, double threshold);
double quantile_score(const TruncatedNormal& d, double y, double tau);

// ---- raw-ensemble counterparts ----

// CRPS of the empirical member CDF:
//   mean|x_i - y| - (1/(2 M^2)) sum_ij |x_i - x_j|.
// `fair` switches the second term's denominator to 2 M (M-1).
double crps_ensemble(std::span<const double> members, double y, bool fair = false);

double brier_ensemble(std::span<const double> members, double y, double threshold);
double quantile_score_ensemble(std::span<const double> members, double y, double tau);

// Linear-interpolation sample quantile of the members (midpoint convention
// for the median of even-sized ensembles).
double ensemble_quantile(std::span<const double> members, double tau);

// ---- point-forecast errors ----

struct PointErrors {
  double ae_median;  // |y - median(F)|
  double se_mean;    // (y - mean(F))^2
};

PointErrors point_errors(const TruncatedNormal& d, double y);
PointErrors point_errors_ensemble(std::span<const double> members, double y);

// ---- skill ----

// 1 - mean_score / mean_score_ref; throws std::domain_error when the
// reference mean score is not strictly positive.
double skill_score(double mean_score, double mean_score_ref);

// ---- aggregation ----

struct ScoreRecord {
  std::string model_id;
  std::string station_id;
  Date verification_date;
  int lead_time;
  std::string metric;
  double value;
};

struct GroupAggregate {
  double mean = 0.0;             // over all (station, date) cells
  std::size_t cell_count = 0;
  std::vector<Date> dates;       // ascending
  std::vector<double> daily_means;  // spatial mean per verification date
};

using GroupKey = std::tuple<std::string /*model*/, std::string /*metric*/, int /*lead*/>;

// Deterministic fold over sorted keys with compensated summation. Groups with
// no records simply do not appear.
std::map<GroupKey, GroupAggregate> aggregate(const std::vector<ScoreRecord>& records);

// Compensated (Kahan) accumulator.
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace windcal
