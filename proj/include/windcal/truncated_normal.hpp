#pragma once

namespace windcal {

// Normal distribution left-truncated at zero. Location may be any real,
// scale must be strictly positive; a non-positive scale is rejected at
// construction rather than clamped.
class TruncatedNormal {
 public:
  TruncatedNormal(double location, double scale);

  double location() const { return location_; }
  double scale() const { return scale_; }

  // P(Y <= y). Zero for y <= 0, tends to 1 as y grows.
  double cdf(double y) const;

  // Density; zero below the truncation point, integrates to one.
  double pdf(double y) const;

  // Inverse CDF for tau in (0,1). Throws std::domain_error otherwise.
  double quantile(double tau) const;

  double mean() const;
  double median() const { return quantile(0.5); }

 private:
  double location_;
  double scale_;
  double tail_at_zero_;      // P(Z > -location/scale) = Phi(location/scale)
  double log_tail_at_zero_;  // log of the above, usable when it underflows
};

}  // namespace windcal
