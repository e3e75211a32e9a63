#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epifit/date.hpp"

namespace epifit {

enum class SeriesKind {
  deaths,
  confirmed_cases,
  tests,
  first_dose_vaccinations,
  mobility_component,
};

std::string to_string(SeriesKind k);

// A value per consecutive calendar day starting at start_date. No gaps:
// values[i] belongs to start_date + i.
struct DailySeries {
  Date start_date;
  std::vector<double> values;
  SeriesKind kind = SeriesKind::deaths;

  std::size_t size() const { return values.size(); }
  Date end_date() const { return start_date + static_cast<std::int64_t>(values.size()) - 1; }
  bool covers(Date d) const { return d >= start_date && d <= end_date(); }
  double at(Date d) const { return values.at(static_cast<std::size_t>(d - start_date)); }
};

// Index range [first, last] into a shared daily grid.
struct DayWindow {
  std::int64_t first = 0;
  std::int64_t last = 0;  // inclusive
  std::int64_t length() const { return last - first + 1; }
};

struct CountryDataset {
  std::string country;
  double population = 0;  // N
  DailySeries deaths;
  DailySeries cases;
  DailySeries tests;
  DailySeries vaccinations;
  std::vector<DailySeries> mobility_components;
  DayWindow analysis_window;  // indices into the aligned grid

  // Grid origin after align(); all member series share it.
  Date grid_start;
  bool aligned = false;
};

}  // namespace epifit
