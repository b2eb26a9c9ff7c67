#pragma once

namespace windcal {

// Standard normal density phi(x).
double norm_pdf(double x);

// Standard normal CDF Phi(x), computed via erfc so both tails keep
// full relative accuracy down to the underflow limit.
double norm_cdf(double x);

// Upper tail 1 - Phi(x).
double norm_sf(double x);

// log(1 - Phi(x)); switches to an asymptotic expansion once erfc underflows.
double norm_logsf(double x);

// Inverse CDF. Rational approximation refined by one Halley step.
// Throws std::domain_error for p outside (0,1).
double norm_quantile(double p);

}  // namespace windcal
