#include "windcal/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace windcal {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double norm_logsf(double x) {
  if (x < 25.0) {
    double q = norm_sf(x);
    if (q > 0.0) return std::log(q);
  }
  // Asymptotic expansion of the Mills ratio for large x:
  // 1-Phi(x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6).
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(x / kInvSqrt2Pi) + std::log(series);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p must lie in (0,1)");

  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the erfc-based CDF.
  double e = norm_cdf(x) - p;
  double u = e / norm_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace windcal
