#include "windcal/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace windcal {

ForecastCase subset_members(const ForecastCase& c, int m_low, int m_high) {
  if (m_low < 0 || m_high < 0 || m_low + m_high < 1)
    throw std::invalid_argument("subset_members: need at least one member");
  if (static_cast<std::size_t>(m_low) > c.members_low.size() ||
      static_cast<std::size_t>(m_high) > c.members_high.size())
    throw std::invalid_argument("subset_members: more members requested than available");
  ForecastCase out;
  out.station_index = c.station_index;
  out.init_date = c.init_date;
  out.lead_time = c.lead_time;
  out.observation = c.observation;
  out.members_low.assign(c.members_low.begin(), c.members_low.begin() + m_low);
  out.members_high.assign(c.members_high.begin(), c.members_high.begin() + m_high);
  return out;
}

Dataset::Dataset(std::vector<Station> stations) : stations_(std::move(stations)) {
  obs_.resize(stations_.size());
}

std::uint32_t Dataset::station_index(const std::string& id) const {
  for (std::uint32_t i = 0; i < stations_.size(); ++i)
    if (stations_[i].station_id == id) return i;
  throw std::invalid_argument("unknown station id: " + id);
}

void Dataset::add_observation(std::uint32_t station, Date date, double wind_speed) {
  if (wind_speed < 0.0)
    throw std::invalid_argument("observation must be >= 0 (station " +
                                stations_.at(station).station_id + ", " + date.iso() + ")");
  obs_.at(station).emplace_back(date, wind_speed);
  finalized_ = false;
}

void Dataset::add_case(ForecastCase c) {
  if (c.members_low.empty() && c.members_high.empty())
    throw std::invalid_argument("forecast case has no members");
  for (double v : c.members_low)
    if (v < 0.0) throw std::invalid_argument("member value must be >= 0");
  for (double v : c.members_high)
    if (v < 0.0) throw std::invalid_argument("member value must be >= 0");
  if (c.lead_time < 1 || c.lead_time > 15)
    throw std::invalid_argument("lead_time must lie in [1, 15]");
  cases_.push_back(std::move(c));
  finalized_ = false;
}

void Dataset::finalize() {
  for (auto& series : obs_) std::sort(series.begin(), series.end());
  std::sort(cases_.begin(), cases_.end(), [](const ForecastCase& a, const ForecastCase& b) {
    return std::tuple(a.lead_time, a.verification_date(), a.station_index) <
           std::tuple(b.lead_time, b.verification_date(), b.station_index);
  });
  max_lead_ = 0;
  for (auto& c : cases_) {
    c.observation = observation(c.station_index, c.verification_date());
    max_lead_ = std::max(max_lead_, c.lead_time);
  }
  lead_ranges_.assign(static_cast<std::size_t>(max_lead_) + 1, {0, 0});
  std::size_t i = 0;
  while (i < cases_.size()) {
    std::size_t j = i;
    while (j < cases_.size() && cases_[j].lead_time == cases_[i].lead_time) ++j;
    lead_ranges_[static_cast<std::size_t>(cases_[i].lead_time)] = {i, j};
    i = j;
  }
  if (!cases_.empty()) {
    first_init_ = cases_.front().init_date;
    last_init_ = cases_.front().init_date;
    for (const auto& c : cases_) {
      first_init_ = std::min(first_init_, c.init_date);
      last_init_ = std::max(last_init_, c.init_date);
    }
  }
  finalized_ = true;
}

std::optional<double> Dataset::observation(std::uint32_t station, Date date) const {
  const auto& series = obs_.at(station);
  auto it = std::lower_bound(series.begin(), series.end(), date,
                             [](const auto& p, Date d) { return p.first < d; });
  if (it != series.end() && it->first == date) return it->second;
  return std::nullopt;
}

std::vector<double> Dataset::observations_before(std::uint32_t station, Date date) const {
  const auto& series = obs_.at(station);
  std::vector<double> out;
  for (const auto& [d, v] : series) {
    if (d >= date) break;
    out.push_back(v);
  }
  return out;
}

std::span<const ForecastCase> Dataset::cases_for_lead(int lead_time) const {
  if (lead_time < 1 || lead_time > max_lead_) return {};
  auto [b, e] = lead_ranges_[static_cast<std::size_t>(lead_time)];
  return {cases_.data() + b, e - b};
}

// ---- CSV persistence ----

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& file, std::size_t line_no, const std::string& why) {
  throw std::runtime_error(file + ":" + std::to_string(line_no) + ": " + why);
}

double parse_double(const std::string& s, const std::string& file, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(file, line_no, "not a number: '" + s + "'");
  }
}

}  // namespace

void Dataset::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream f(fs::path(dir) / "stations.csv");
    f << "station_id,latitude,longitude,site_scale\n";
    for (const auto& s : stations_)
      f << s.station_id << ',' << fmt17(s.latitude) << ',' << fmt17(s.longitude) << ','
        << fmt17(s.site_scale) << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "observations.csv");
    f << "station_id,date,wind_speed\n";
    for (std::size_t i = 0; i < obs_.size(); ++i)
      for (const auto& [d, v] : obs_[i])
        f << stations_[i].station_id << ',' << d.iso() << ',' << fmt17(v) << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "forecasts.csv");
    f << "station_id,init_date,lead_time,resolution,member_index,value\n";
    for (const auto& c : cases_) {
      const std::string& sid = stations_[c.station_index].station_id;
      for (std::size_t m = 0; m < c.members_high.size(); ++m)
        f << sid << ',' << c.init_date.iso() << ',' << c.lead_time << ",H," << m << ','
          << fmt17(c.members_high[m]) << '\n';
      for (std::size_t m = 0; m < c.members_low.size(); ++m)
        f << sid << ',' << c.init_date.iso() << ',' << c.lead_time << ",L," << m << ','
          << fmt17(c.members_low[m]) << '\n';
    }
  }
}

Dataset Dataset::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<Station> stations;
  {
    std::ifstream f(fs::path(dir) / "stations.csv");
    if (!f) throw std::runtime_error("cannot open " + dir + "/stations.csv");
    std::string line;
    std::getline(f, line);  // header
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (fields.size() != 4) parse_fail("stations.csv", line_no, "expected 4 fields");
      Station s;
      s.station_id = fields[0];
      s.latitude = parse_double(fields[1], "stations.csv", line_no);
      s.longitude = parse_double(fields[2], "stations.csv", line_no);
      s.site_scale = parse_double(fields[3], "stations.csv", line_no);
      if (std::abs(s.latitude) > 90.0 || std::abs(s.longitude) > 180.0)
        parse_fail("stations.csv", line_no, "coordinates out of range");
      stations.push_back(std::move(s));
    }
  }

  Dataset ds(std::move(stations));
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < ds.stations_.size(); ++i)
    index.emplace(ds.stations_[i].station_id, i);

  {
    std::ifstream f(fs::path(dir) / "observations.csv");
    if (!f) throw std::runtime_error("cannot open " + dir + "/observations.csv");
    std::string line;
    std::getline(f, line);
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (fields.size() != 3) parse_fail("observations.csv", line_no, "expected 3 fields");
      auto it = index.find(fields[0]);
      if (it == index.end()) parse_fail("observations.csv", line_no, "unknown station");
      double v = parse_double(fields[2], "observations.csv", line_no);
      if (v < 0.0) parse_fail("observations.csv", line_no, "negative wind speed");
      ds.add_observation(it->second, Date::parse(fields[1]), v);
    }
  }

  {
    std::ifstream f(fs::path(dir) / "forecasts.csv");
    if (!f) throw std::runtime_error("cannot open " + dir + "/forecasts.csv");
    std::string line;
    std::getline(f, line);
    std::size_t line_no = 1;
    // (station, init, lead) -> case under construction
    std::map<std::tuple<std::uint32_t, Date, int>, ForecastCase> building;
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (fields.size() != 6) parse_fail("forecasts.csv", line_no, "expected 6 fields");
      auto it = index.find(fields[0]);
      if (it == index.end()) parse_fail("forecasts.csv", line_no, "unknown station");
      Date init = Date::parse(fields[1]);
      int lead = std::stoi(fields[2]);
      double v = parse_double(fields[5], "forecasts.csv", line_no);
      if (v < 0.0) parse_fail("forecasts.csv", line_no, "negative wind speed");
      auto& c = building[{it->second, init, lead}];
      c.station_index = it->second;
      c.init_date = init;
      c.lead_time = lead;
      if (fields[3] == "H")
        c.members_high.push_back(v);
      else if (fields[3] == "L")
        c.members_low.push_back(v);
      else
        parse_fail("forecasts.csv", line_no, "resolution must be H or L");
    }
    for (auto& [key, c] : building) ds.add_case(std::move(c));
  }

  ds.finalize();
  return ds;
}

}  // namespace windcal
