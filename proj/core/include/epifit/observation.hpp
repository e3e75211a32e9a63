#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epifit/kernel.hpp"

namespace epifit {

// Piecewise-constant infection fatality ratio.
struct IfrSchedule {
  std::vector<std::int64_t> change_points;  // day indices opening a new level
  std::vector<double> levels;               // change_points.size() + 1 entries
  std::vector<double> prior_means;          // Beta prior mean per level
  double prior_kappa = 2000.0;              // Beta concentration

  std::size_t level_of(std::int64_t day) const;
  double at(std::int64_t day) const { return levels[level_of(day)]; }
  void validate(std::int64_t horizon) const;
};

struct ObservationParams {
  double phi = 10.0;  // negative-binomial overdispersion: var = d + d^2/phi
};

inline constexpr double kDeathMeanFloor = 1e-10;

// d[t] = ifr_t * sum_{lag>=1} infections[t-lag] * f_lag.
std::vector<double> expected_deaths(std::span<const double> infections, const DelayKernel& kernel,
                                    const IfrSchedule& ifr);

// Case-mix weighted IFR: sum_g ifr_g * cases_g / total cases. Drives the Beta
// prior means of the schedule levels.
double ifr_prior_mean(std::span<const double> age_ifr, std::span<const double> reported_by_age);

}  // namespace epifit
