#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace epifit {

// Piecewise-constant random-walk volatility. boundaries are day indices that
// open a new segment; sigmas has one entry per segment (boundaries.size()+1).
struct WaveSchedule {
  std::vector<std::int64_t> boundaries;
  std::vector<double> sigmas;

  std::size_t segments() const { return sigmas.size(); }
  // Segment the given day index falls into.
  std::size_t segment_of(std::int64_t day) const;
  double sigma_for_day(std::int64_t day) const { return sigmas[segment_of(day)]; }
  void validate(std::int64_t horizon) const;  // throws ConfigError
};

// Log transmission-rate trajectory. eta[t] = log beta_t; z are the
// non-centered standard-normal increments, eta[t] = eta[t-1] + sigma(t-1) * z[t-1].
struct LatentPath {
  double eta0 = 0;
  std::vector<double> z;
  std::vector<double> eta;  // z.size() + 1 entries
};

LatentPath reconstruct_path(double eta0, std::span<const double> z, const WaveSchedule& schedule);

// Sum of standard-normal log densities of z. The volatility enters through
// reconstruction only (non-centered contract).
double path_log_prior(std::span<const double> z);

}  // namespace epifit
