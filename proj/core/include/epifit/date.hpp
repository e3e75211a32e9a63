#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace epifit {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
 public:
  Date() = default;
  explicit Date(std::int64_t days_since_epoch) : days_(days_since_epoch) {}
  Date(int year, unsigned month, unsigned day);

  static Date parse_iso(const std::string& s);   // "2020-03-15"
  static Date parse_mdy(const std::string& s);   // "3/15/20" (JHU header style)

  std::int64_t days() const { return days_; }
  std::string to_iso() const;

  int year() const;
  unsigned month() const;
  unsigned day() const;

  Date operator+(std::int64_t n) const { return Date(days_ + n); }
  Date operator-(std::int64_t n) const { return Date(days_ - n); }
  std::int64_t operator-(const Date& o) const { return days_ - o.days_; }
  Date& operator++() { ++days_; return *this; }
  auto operator<=>(const Date&) const = default;

 private:
  std::int64_t days_ = 0;
};

}  // namespace epifit
