#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windcal/date.hpp"

namespace windcal {

struct Station {
  std::string station_id;
  double latitude = 0.0;
  double longitude = 0.0;
  double site_scale = 1.0;  // synthetic wind climatology scale, m/s
};

// One (station, init date, lead time) cell.
struct ForecastCase {
  std::uint32_t station_index = 0;
  Date init_date;
  int lead_time = 1;  // days, 1..15
  std::vector<double> members_low;
  std::vector<double> members_high;
  std::optional<double> observation;  // at the verification date

  Date verification_date() const { return init_date + lead_time; }
};

// Keeps the first m_low low- and m_high high-resolution members by stable
// member index. Throws std::invalid_argument if more members are requested
// than available or the result would be empty.
ForecastCase subset_members(const ForecastCase& c, int m_low, int m_high);

class Dataset {
 public:
  Dataset(std::vector<Station> stations);

  const std::vector<Station>& stations() const { return stations_; }
  std::uint32_t station_index(const std::string& id) const;  // throws if unknown

  void add_observation(std::uint32_t station, Date date, double wind_speed);
  void add_case(ForecastCase c);

  // Sorts cases by (lead_time, verification date, station), attaches
  // observations to cases, and builds the lead-time index. Must be called
  // after the last add_* and before any query below.
  void finalize();

  std::optional<double> observation(std::uint32_t station, Date date) const;

  // All observations at the station strictly before `date`, in date order.
  std::vector<double> observations_before(std::uint32_t station, Date date) const;

  std::span<const ForecastCase> cases() const { return cases_; }
  std::span<const ForecastCase> cases_for_lead(int lead_time) const;

  int max_lead_time() const { return max_lead_; }
  Date first_init_date() const { return first_init_; }
  Date last_init_date() const { return last_init_; }

  // CSV persistence (stations.csv, observations.csv, forecasts.csv).
  void save(const std::string& dir) const;
  static Dataset load(const std::string& dir);

 private:
  std::vector<Station> stations_;
  // Per station, (date, value) sorted by date.
  std::vector<std::vector<std::pair<Date, double>>> obs_;
  std::vector<ForecastCase> cases_;
  std::vector<std::pair<std::size_t, std::size_t>> lead_ranges_;  // [begin,end) into cases_
  int max_lead_ = 0;
  Date first_init_;
  Date last_init_;
  bool finalized_ = false;
};

}  // namespace windcal
