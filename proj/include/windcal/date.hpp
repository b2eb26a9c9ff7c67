#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace windcal {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
 public:
  Date() : days_(0) {}
  explicit Date(std::int32_t days) : days_(days) {}

  Date(int y, int m, int d) {
    // Howard Hinnant's days_from_civil.
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    days_ = era * 146097 + static_cast<int>(doe) - 719468;
  }

  static Date parse(const std::string& iso) {
    int y, m, d;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
        d > 31)
      throw std::invalid_argument("Date::parse: expected YYYY-MM-DD, got '" + iso + "'");
    return Date(y, m, d);
  }

  std::string iso() const {
    // civil_from_days.
    int z = days_ + 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y + (m <= 2), m, d);
    return buf;
  }

  std::int32_t days() const { return days_; }
  Date operator+(int d) const { return Date(days_ + d); }
  Date operator-(int d) const { return Date(days_ - d); }
  int operator-(Date other) const { return days_ - other.days_; }
  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_;
};

}  // namespace windcal
