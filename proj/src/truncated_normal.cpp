#include "windcal/truncated_normal.hpp"

#include <cmath>
#include <stdexcept>

#include "windcal/normal.hpp"

namespace windcal {

TruncatedNormal::TruncatedNormal(double location, double scale)
    : location_(location), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(location))
    throw std::invalid_argument("TruncatedNormal: scale must be finite and > 0");
  double alpha = location_ / scale_;
  tail_at_zero_ = norm_sf(-alpha);  // = Phi(alpha)
  log_tail_at_zero_ = norm_logsf(-alpha);
}

double TruncatedNormal::cdf(double y) const {
  if (y <= 0.0) return 0.0;
  double z = (y - location_) / scale_;
  // 1 - Q(z)/Q(-alpha) keeps accuracy when both Phi terms are close to 1.
  double ratio;
  if (tail_at_zero_ > 0.0) {
    ratio = norm_sf(z) / tail_at_zero_;
  } else {
    ratio = std::exp(norm_logsf(z) - log_tail_at_zero_);
  }
  double p = 1.0 - ratio;
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

double TruncatedNormal::pdf(double y) const {
  if (y < 0.0) return 0.0;
  double z = (y - location_) / scale_;
  if (tail_at_zero_ > 0.0) return norm_pdf(z) / (scale_ * tail_at_zero_);
  double logp = -0.5 * z * z - std::log(scale_) -
                0.918938533204672741780329736406 /* log sqrt(2 pi) */ - log_tail_at_zero_;
  return std::exp(logp);
}

double TruncatedNormal::quantile(double tau) const {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::domain_error("TruncatedNormal::quantile: tau must lie in (0,1)");
  // cdf(y) = tau  <=>  Q((y-mu)/sigma) = (1-tau) Q(-alpha).
  double target = (1.0 - tau) * tail_at_zero_;
  if (target > 0.0 && target < 1.0)
    return location_ - scale_ * norm_quantile(target);
  // Tail mass underflowed; solve in log space by bisection on the cdf.
  double lo = 0.0, hi = std::max(1.0, location_ + 10.0 * scale_);
  while (cdf(hi) < tau) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (cdf(mid) < tau ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double TruncatedNormal::mean() const {
  double alpha = location_ / scale_;
  double hazard;  // phi(alpha)/Phi(alpha)
  if (tail_at_zero_ > 0.0 && alpha > -25.0) {
    hazard = norm_pdf(alpha) / tail_at_zero_;
  } else {
    hazard = std::exp(-0.5 * alpha * alpha -
                      0.918938533204672741780329736406 - log_tail_at_zero_);
  }
  return location_ + scale_ * hazard;
}

}  // namespace windcal
