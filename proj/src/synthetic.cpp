#include "windcal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "windcal/rng.hpp"
#include "windcal/scoring.hpp"

namespace windcal {

void SyntheticConfig::validate() const {
  auto fail = [](const std::string& why) { throw std::invalid_argument("SyntheticConfig: " + why); };
  if (station_count < 1 || date_count < 1 || lead_times < 1) fail("counts must be >= 1");
  if (lead_times > 15) fail("lead_times must be <= 15");
  if (members_low_total + members_high_total < 1) fail("need at least one member");
  if (!(ar_coefficient >= 0.0 && ar_coefficient < 1.0)) fail("AR(1) coefficient must lie in [0,1)");
  if (obs_noise_sd < 0.0) fail("obs_noise_sd must be >= 0");
  if (site_scale_min <= 0.0 || site_scale_max < site_scale_min) fail("bad site_scale range");
  if (member_spread_low < 0.0 || member_spread_high < 0.0 || common_error_low < 0.0 ||
      common_error_high < 0.0)
    fail("dispersion parameters must be >= 0");
  if (bias_high > bias_low || common_error_high > common_error_low ||
      member_spread_high > member_spread_low)
    fail("high-resolution members must not be worse than low-resolution");
}

std::string SyntheticConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["station_count"] = station_count;
  j["date_count"] = date_count;
  j["lead_times"] = lead_times;
  j["members_low_total"] = members_low_total;
  j["members_high_total"] = members_high_total;
  j["ar_coefficient"] = ar_coefficient;
  j["base_level"] = base_level;
  j["site_scale_min"] = site_scale_min;
  j["site_scale_max"] = site_scale_max;
  j["obs_noise_sd"] = obs_noise_sd;
  j["bias_low"] = bias_low;
  j["bias_high"] = bias_high;
  j["bias_growth"] = bias_growth;
  j["common_error_low"] = common_error_low;
  j["common_error_high"] = common_error_high;
  j["member_spread_low"] = member_spread_low;
  j["member_spread_high"] = member_spread_high;
  j["noise_growth"] = noise_growth;
  j["seed"] = seed;
  j["start_date"] = start_date.iso();
  j["nonnegativity"] = "clamped_at_zero";
  return j.dump(2);
}

SyntheticResult generate(const SyntheticConfig& cfg) {
  cfg.validate();

  std::vector<Station> stations(static_cast<std::size_t>(cfg.station_count));
  for (int i = 0; i < cfg.station_count; ++i) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i), 0);
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%04d", i);
    stations[static_cast<std::size_t>(i)] = {buf, rng.uniform(35.0, 70.0),
                                             rng.uniform(-10.0, 30.0),
                                             rng.uniform(cfg.site_scale_min, cfg.site_scale_max)};
  }

  Dataset ds(std::move(stations));
  const int total_days = cfg.date_count + cfg.lead_times;

  for (int i = 0; i < cfg.station_count; ++i) {
    const double s = ds.stations()[static_cast<std::size_t>(i)].site_scale;
    const auto si = static_cast<std::uint32_t>(i);

    Rng rng_truth = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i), 1);
    std::vector<double> truth(static_cast<std::size_t>(total_days) + 1);
    double g = rng_truth.normal();
    const double innov = std::sqrt(1.0 - cfg.ar_coefficient * cfg.ar_coefficient);
    for (int d = 0; d <= total_days; ++d) {
      truth[static_cast<std::size_t>(d)] = s * (cfg.base_level + g);
      g = cfg.ar_coefficient * g + innov * rng_truth.normal();
    }

    Rng rng_obs = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i), 2);
    for (int d = 0; d <= total_days; ++d)
      ds.add_observation(si, cfg.start_date + d,
                         std::max(0.0, truth[static_cast<std::size_t>(d)] +
                                           cfg.obs_noise_sd * rng_obs.normal()));

    Rng rng_fc = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i), 3);
    for (int d = 0; d < cfg.date_count; ++d) {
      for (int lead = 1; lead <= cfg.lead_times; ++lead) {
        ForecastCase c;
        c.station_index = si;
        c.init_date = cfg.start_date + d;
        c.lead_time = lead;
        const double t = truth[static_cast<std::size_t>(d + lead)];
        const double e_high = cfg.common_error(true, lead) * rng_fc.normal();
        const double e_low = cfg.common_error(false, lead) * rng_fc.normal();
        c.members_high.reserve(static_cast<std::size_t>(cfg.members_high_total));
        for (int m = 0; m < cfg.members_high_total; ++m)
          c.members_high.push_back(std::max(
              0.0, t + cfg.bias(true, lead) + e_high + cfg.member_spread(true, lead) * rng_fc.normal()));
        c.members_low.reserve(static_cast<std::size_t>(cfg.members_low_total));
        for (int m = 0; m < cfg.members_low_total; ++m)
          c.members_low.push_back(std::max(
              0.0, t + cfg.bias(false, lead) + e_low + cfg.member_spread(false, lead) * rng_fc.normal()));
        ds.add_case(std::move(c));
      }
    }
  }

  ds.finalize();
  return {std::move(ds), cfg.to_json()};
}

double oracle_mean_crps(const SyntheticConfig& cfg, const Dataset& dataset, int lead_time,
                        int m_low, int m_high, Date first_verification, Date last_verification) {
  KahanSum total;
  std::size_t n = 0;
  for (const ForecastCase& c : dataset.cases_for_lead(lead_time)) {
    Date v = c.verification_date();
    if (v < first_verification || v > last_verification || !c.observation) continue;

    const double s = dataset.stations()[c.station_index].site_scale;
    const double prior_mean = s * cfg.base_level;
    const double prior_var = s * s;

    double precision = 1.0 / prior_var;
    double weighted = prior_mean / prior_var;
    if (m_high > 0) {
      KahanSum sum;
      for (int m = 0; m < m_high; ++m) sum.add(c.members_high[static_cast<std::size_t>(m)]);
      double q = cfg.common_error(true, lead_time), sp = cfg.member_spread(true, lead_time);
      double w2 = q * q + sp * sp / m_high;
      double u = sum.value() / m_high - cfg.bias(true, lead_time);
      precision += 1.0 / w2;
      weighted += u / w2;
    }
    if (m_low > 0) {
      KahanSum sum;
      for (int m = 0; m < m_low; ++m) sum.add(c.members_low[static_cast<std::size_t>(m)]);
      double q = cfg.common_error(false, lead_time), sp = cfg.member_spread(false, lead_time);
      double w2 = q * q + sp * sp / m_low;
      double u = sum.value() / m_low - cfg.bias(false, lead_time);
      precision += 1.0 / w2;
      weighted += u / w2;
    }
    double post_mean = weighted / precision;
    double pred_sd = std::sqrt(1.0 / precision + cfg.obs_noise_sd * cfg.obs_noise_sd);
    total.add(crps_tn(TruncatedNormal(post_mean, pred_sd), *c.observation));
    ++n;
  }
  if (n == 0) throw std::invalid_argument("oracle_mean_crps: no cases in range");
  return total.value() / static_cast<double>(n);
}

}  // namespace windcal
