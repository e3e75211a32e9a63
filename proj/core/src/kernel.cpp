#include "epifit/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "epifit/errors.hpp"
#include "epifit/stats.hpp"

namespace epifit {

double DelayKernel::total_mass() const {
  double acc = 0;
  for (double w : weights) acc += w;
  return acc;
}

double DelayKernel::mean_day() const {
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    acc += static_cast<double>(i + 1) * weights[i];
  return acc;
}

DelayKernel discretize_gamma(double shape, double rate, int s_max) {
  if (shape <= 0 || rate <= 0) throw std::invalid_argument("discretize_gamma: shape and rate must be positive");
  if (s_max < 2) throw std::invalid_argument("discretize_gamma: s_max must be >= 2");

  DelayKernel k;
  k.shape = shape;
  k.rate = rate;
  k.weights.resize(static_cast<std::size_t>(s_max));

  // CDF at the bin edges 1.5, 2.5, ... via the regularized lower incomplete
  // gamma; the first bin starts at 0.
  double prev = gamma_cdf_lower(shape, rate * 1.5);
  if (!std::isfinite(prev)) throw NumericError("discretize_gamma: non-finite CDF");
  k.weights[0] = prev;
  for (int s = 2; s <= s_max; ++s) {
    const double cur = gamma_cdf_lower(shape, rate * (static_cast<double>(s) + 0.5));
    if (!std::isfinite(cur)) throw NumericError("discretize_gamma: non-finite CDF");
    k.weights[static_cast<std::size_t>(s - 1)] = cur - prev;
    prev = cur;
  }
  return k;
}

int kernel_support(double shape, double rate, double mass_target) {
  int s = 2;
  while (gamma_cdf_lower(shape, rate * (static_cast<double>(s) + 0.5)) <= mass_target) {
    ++s;
    if (s > 100000) throw NumericError("kernel_support: target mass unreachable");
  }
  return s;
}

DelayKernel discretize_gamma_auto(double shape, double rate, double mass_target) {
  return discretize_gamma(shape, rate, kernel_support(shape, rate, mass_target));
}

std::vector<double> convolve_delay(std::span<const double> series, const DelayKernel& kernel) {
  const std::size_t n = series.size();
  const std::size_t s_max = kernel.weights.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    const std::size_t reach = std::min(t, s_max);
    double acc = 0;
    for (std::size_t lag = 1; lag <= reach; ++lag)
      acc += series[t - lag] * kernel.weights[lag - 1];
    out[t] = acc;
  }
  return out;
}

}  // namespace epifit
