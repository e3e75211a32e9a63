#include "epifit/path.hpp"

#include <algorithm>
#include <cmath>

#include "epifit/errors.hpp"

namespace epifit {

std::size_t WaveSchedule::segment_of(std::int64_t day) const {
  std::size_t seg = 0;
  for (std::size_t b = 0; b < boundaries.size(); ++b)
    if (day >= boundaries[b]) seg = b + 1;
  return seg;
}

void WaveSchedule::validate(std::int64_t horizon) const {
  if (sigmas.size() != boundaries.size() + 1)
    throw ConfigError("wave schedule: need one sigma per segment");
  for (double s : sigmas)
    if (!(s >= 0)) throw ConfigError("wave schedule: sigmas must be nonnegative");
  for (std::size_t b = 0; b < boundaries.size(); ++b) {
    if (boundaries[b] <= 0 || boundaries[b] >= horizon)
      throw ConfigError("wave schedule: boundary outside (0, T)");
    if (b > 0 && boundaries[b] <= boundaries[b - 1])
      throw ConfigError("wave schedule: boundaries must be strictly increasing");
  }
}

LatentPath reconstruct_path(double eta0, std::span<const double> z,
                            const WaveSchedule& schedule) {
  LatentPath p;
  p.eta0 = eta0;
  p.z.assign(z.begin(), z.end());
  p.eta.resize(z.size() + 1);
  p.eta[0] = eta0;
  for (std::size_t k = 0; k < z.size(); ++k)
    p.eta[k + 1] = p.eta[k] + schedule.sigma_for_day(static_cast<std::int64_t>(k)) * z[k];
  return p;
}

double path_log_prior(std::span<const double> z) {
  constexpr double kLogInvSqrt2Pi = -0.91893853320467274178;
  double lp = 0;
  for (double v : z) lp += kLogInvSqrt2Pi - 0.5 * v * v;
  return lp;
}

}  // namespace epifit
