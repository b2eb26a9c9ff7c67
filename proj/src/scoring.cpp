#include "windcal/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "windcal/normal.hpp"

namespace windcal {

namespace {
constexpr double kInvSqrtPi = 0.5641895835477562869480794515607726;
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;

void require_nonneg_obs(double y) {
  if (!(y >= 0.0)) throw std::domain_error("observation must be >= 0");
}

void require_members(std::span<const double> members) {
  if (members.empty()) throw std::invalid_argument("ensemble must be nonempty");
}
}  // namespace

double crps_tn(const TruncatedNormal& d, double y) {
  require_nonneg_obs(y);
  const double sigma = d.scale();
  const double alpha = d.location() / sigma;
  const double z = (y - d.location()) / sigma;
  const double p = norm_sf(-alpha);  // Phi(alpha)

  double r1, r2, r3;  // Q(z)/p, phi(z)/p, Phi(sqrt2*alpha)/p^2
  if (p > 1e-150) {
    r1 = norm_sf(z) / p;
    r2 = norm_pdf(z) / p;
    r3 = norm_sf(-alpha * std::sqrt(2.0)) / (p * p);
  } else {
    const double lp = norm_logsf(-alpha);
    r1 = std::exp(norm_logsf(z) - lp);
    r2 = std::exp(-0.5 * z * z - kLogSqrt2Pi - lp);
    r3 = std::exp(norm_logsf(-alpha * std::sqrt(2.0)) - 2.0 * lp);
  }
  return sigma * (z * (1.0 - 2.0 * r1) + 2.0 * r2 - kInvSqrtPi * r3);
}

double brier(const TruncatedNormal& d, double y, double threshold) {
  require_nonneg_obs(y);
  double diff = d.cdf(threshold) - (threshold >= y ? 1.0 : 0.0);
  return diff * diff;
}

namespace {
double pinball(double x, double tau) {
  return x >= 0.0 ? tau * x : (tau - 1.0) * x;
}
}  // namespace

double quantile_score(const TruncatedNormal& d, double y, double tau) {
  require_nonneg_obs(y);
  return pinball(y - d.quantile(tau), tau);
}

double crps_ensemble(std::span<const double> members, double y, bool fair) {
  require_members(members);
  require_nonneg_obs(y);
  const std::size_t m = members.size();
  std::vector<double> x(members.begin(), members.end());
  std::sort(x.begin(), x.end());

  KahanSum abs_err;
  for (double v : x) abs_err.add(std::abs(v - y));

  // For sorted x: sum_{i<j} (x_j - x_i) = sum_k (2k - m + 1) x_k.
  KahanSum spread;
  for (std::size_t k = 0; k < m; ++k)
    spread.add((2.0 * static_cast<double>(k) - static_cast<double>(m) + 1.0) * x[k]);

  const double mm = static_cast<double>(m);
  const double denom = fair ? mm * (mm - 1.0) : mm * mm;
  if (fair && m == 1) throw std::invalid_argument("fair CRPS needs >= 2 members");
  return abs_err.value() / mm - spread.value() / denom;
}

double ensemble_quantile(std::span<const double> members, double tau) {
  require_members(members);
  if (!(tau > 0.0 && tau < 1.0))
    throw std::domain_error("ensemble_quantile: tau must lie in (0,1)");
  std::vector<double> x(members.begin(), members.end());
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * tau;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= x.size()) return x.back();
  const double frac = h - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

double brier_ensemble(std::span<const double> members, double y, double threshold) {
  require_members(members);
  require_nonneg_obs(y);
  double below = 0.0;
  for (double v : members)
    if (v <= threshold) below += 1.0;
  double diff = below / static_cast<double>(members.size()) - (threshold >= y ? 1.0 : 0.0);
  return diff * diff;
}

double quantile_score_ensemble(std::span<const double> members, double y, double tau) {
  require_nonneg_obs(y);
  return pinball(y - ensemble_quantile(members, tau), tau);
}

PointErrors point_errors(const TruncatedNormal& d, double y) {
  require_nonneg_obs(y);
  double de = y - d.mean();
  return {std::abs(y - d.median()), de * de};
}

PointErrors point_errors_ensemble(std::span<const double> members, double y) {
  require_members(members);
  require_nonneg_obs(y);
  KahanSum s;
  for (double v : members) s.add(v);
  double mean = s.value() / static_cast<double>(members.size());
  double de = y - mean;
  return {std::abs(y - ensemble_quantile(members, 0.5)), de * de};
}

double skill_score(double mean_score, double mean_score_ref) {
  if (!(mean_score_ref > 0.0))
    throw std::domain_error("skill_score: reference mean score must be > 0");
  return 1.0 - mean_score / mean_score_ref;
}

std::map<GroupKey, GroupAggregate> aggregate(const std::vector<ScoreRecord>& records) {
  // Sort keys first so accumulation order is independent of input order.
  struct Cell {
    KahanSum sum;
    std::size_t n = 0;
  };
  std::map<GroupKey, std::map<Date, std::vector<double>>> grouped;
  for (const auto& r : records)
    grouped[{r.model_id, r.metric, r.lead_time}][r.verification_date].push_back(r.value);

  std::map<GroupKey, GroupAggregate> out;
  for (auto& [key, by_date] : grouped) {
    GroupAggregate agg;
    KahanSum total;
    for (auto& [date, values] : by_date) {
      std::sort(values.begin(), values.end());
      KahanSum day;
      for (double v : values) day.add(v);
      agg.dates.push_back(date);
      agg.daily_means.push_back(day.value() / static_cast<double>(values.size()));
      total.add(day.value());
      agg.cell_count += values.size();
    }
    agg.mean = total.value() / static_cast<double>(agg.cell_count);
    out.emplace(key, std::move(agg));
  }
  return out;
}

}  // namespace windcal
