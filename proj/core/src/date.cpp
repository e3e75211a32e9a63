#include "epifit/date.hpp"

#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace epifit {

namespace {

// Howard Hinnant's civil-days algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::tuple<std::int64_t, unsigned, unsigned> civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day)
    : days_(days_from_civil(year, month, day)) {
  if (month < 1 || month > 12 || day < 1 || day > 31)
    throw std::invalid_argument("Date: bad calendar components");
}

Date Date::parse_iso(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3)
    throw std::invalid_argument("Date: cannot parse ISO date '" + s + "'");
  return Date(y, m, d);
}

Date Date::parse_mdy(const std::string& s) {
  unsigned m = 0, d = 0;
  int y = 0;
  if (std::sscanf(s.c_str(), "%u/%u/%d", &m, &d, &y) != 3)
    throw std::invalid_argument("Date: cannot parse m/d/y date '" + s + "'");
  if (y < 100) y += 2000;
  return Date(y, m, d);
}

std::string Date::to_iso() const {
  auto [y, m, d] = civil_from_days(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

int Date::year() const { return static_cast<int>(std::get<0>(civil_from_days(days_))); }
unsigned Date::month() const { return std::get<1>(civil_from_days(days_)); }
unsigned Date::day() const { return std::get<2>(civil_from_days(days_)); }

}  // namespace epifit
