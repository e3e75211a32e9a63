#pragma once

#include <span>
#include <vector>

namespace epifit {

// Daily weights of a continuous Gamma delay density. weights[0] corresponds
// to day s = 1 and holds the mass on [0, 1.5); weights[s-1] for s >= 2 holds
// the mass on [s - 0.5, s + 0.5).
struct DelayKernel {
  std::vector<double> weights;
  double shape = 0;
  double rate = 0;

  std::size_t max_day() const { return weights.size(); }
  double total_mass() const;
  double mean_day() const;  // sum_s s * weights[s-1]
};

// Bin the Gamma(shape, rate) density into daily weights up to day s_max.
DelayKernel discretize_gamma(double shape, double rate, int s_max);

// Smallest s_max whose CDF at s_max + 0.5 exceeds mass_target.
int kernel_support(double shape, double rate, double mass_target = 0.999);

// Convenience: discretize with the support chosen by kernel_support.
DelayKernel discretize_gamma_auto(double shape, double rate, double mass_target = 0.999);

// out[t] = sum_{tau < t} series[tau] * kernel_{t - tau}, both 0-indexed on the
// same daily grid. out has the same length as series.
std::vector<double> convolve_delay(std::span<const double> series, const DelayKernel& kernel);

}  // namespace epifit
