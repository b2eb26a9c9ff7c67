#pragma once

#include <cstdint>
#include <string>

#include "windcal/dataset.hpp"

namespace windcal {

// Synthetic dual-resolution generator. Per station, a latent AR(1) Gaussian
// process scaled by site_scale defines the truth; observations and members
// add noise and are clamped at zero. High-resolution members carry strictly
// smaller bias and noise than low-resolution at every lead time, and both
// grow with lead time.
struct SyntheticConfig {
  int station_count = 120;
  int date_count = 300;  // init dates, daily
  int lead_times = 15;
  int members_low_total = 100;
  int members_high_total = 50;

  double ar_coefficient = 0.7;  // in [0, 1)
  double base_level = 2.5;      // truth = site_scale * (base_level + AR1 state)
  double site_scale_min = 1.5;  // m/s
  double site_scale_max = 3.5;
  double obs_noise_sd = 0.4;  // m/s

  // Per-resolution bias and noise, linear growth in (lead - 1).
  double bias_low = 0.8;
  double bias_high = 0.4;
  double bias_growth = 0.05;
  double common_error_low = 0.7;  // error shared by all members of a resolution
  double common_error_high = 0.45;
  double member_spread_low = 0.7;  // independent per-member noise
  double member_spread_high = 0.45;
  double noise_growth = 0.06;

  std::uint64_t seed = 20230901;
  Date start_date = Date(2023, 1, 1);

  double bias(bool high, int lead) const {
    return (high ? bias_high : bias_low) * (1.0 + bias_growth * (lead - 1));
  }
  double common_error(bool high, int lead) const {
    return (high ? common_error_high : common_error_low) * (1.0 + noise_growth * (lead - 1));
  }
  double member_spread(bool high, int lead) const {
    return (high ? member_spread_high : member_spread_low) * (1.0 + noise_growth * (lead - 1));
  }

  void validate() const;  // throws std::invalid_argument
  std::string to_json() const;
};

struct SyntheticResult {
  Dataset dataset;
  std::string manifest_json;
};

SyntheticResult generate(const SyntheticConfig& config);

// Mean CRPS of the generator's own conditional predictive law (the exact
// Gaussian posterior of the verifying value given the case's ensemble means),
// evaluated over the given cases with (m_low, m_high) member prefixes.
// This is the calibration target no fitted model can beat systematically.
double oracle_mean_crps(const SyntheticConfig& config, const Dataset& dataset, int lead_time,
                        int m_low, int m_high, Date first_verification, Date last_verification);

}  // namespace windcal
