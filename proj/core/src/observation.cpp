#include "epifit/observation.hpp"

#include <stdexcept>

#include "epifit/errors.hpp"

namespace epifit {

std::size_t IfrSchedule::level_of(std::int64_t day) const {
  std::size_t lvl = 0;
  for (std::size_t i = 0; i < change_points.size(); ++i)
    if (day >= change_points[i]) lvl = i + 1;
  return lvl;
}

void IfrSchedule::validate(std::int64_t horizon) const {
  if (levels.size() != change_points.size() + 1)
    throw ConfigError("ifr schedule: need one level per interval");
  for (double l : levels)
    if (!(l > 0 && l < 1)) throw ConfigError("ifr schedule: levels must lie in (0,1)");
  if (!prior_means.empty() && prior_means.size() != levels.size())
    throw ConfigError("ifr schedule: prior_means size mismatch");
  for (std::size_t i = 0; i < change_points.size(); ++i) {
    if (change_points[i] <= 0 || change_points[i] >= horizon)
      throw ConfigError("ifr schedule: change point outside (0, T)");
    if (i > 0 && change_points[i] <= change_points[i - 1])
      throw ConfigError("ifr schedule: change points must be strictly increasing");
  }
}

std::vector<double> expected_deaths(std::span<const double> infections, const DelayKernel& kernel,
                                    const IfrSchedule& ifr) {
  std::vector<double> d = convolve_delay(infections, kernel);
  for (std::size_t t = 0; t < d.size(); ++t) d[t] *= ifr.at(static_cast<std::int64_t>(t));
  return d;
}

double ifr_prior_mean(std::span<const double> age_ifr, std::span<const double> reported_by_age) {
  if (age_ifr.size() != reported_by_age.size() || age_ifr.empty())
    throw std::invalid_argument("ifr_prior_mean: group size mismatch");
  double total = 0;
  for (double c : reported_by_age) {
    if (c < 0) throw std::invalid_argument("ifr_prior_mean: negative count");
    total += c;
  }
  if (total <= 0) throw DataError("ifr_prior_mean: all age-group counts are zero");
  double acc = 0;
  for (std::size_t g = 0; g < age_ifr.size(); ++g) acc += age_ifr[g] * reported_by_age[g] / total;
  return acc;
}

}  // namespace epifit
