#pragma once

#include <cstdint>
#include <random>

namespace epifit {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-stream RNG. Stream seeds are derived from (seed, stream)
// by counting splitmix64 steps, so chain streams do not depend on thread
// scheduling or chain count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed;
    for (std::uint64_t i = 0; i <= stream; ++i) last_ = splitmix64(s);
    engine_.seed(last_);
  }

  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mu, double sigma) {
    return std::normal_distribution<double>(mu, sigma)(engine_);
  }
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }
  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }
  long poisson(double lambda) {
    return std::poisson_distribution<long>(lambda)(engine_);
  }
  // Gamma-Poisson mixture; mean/overdispersion parameterization (variance
  // mean + mean^2/phi). Works for non-integer phi.
  long negbin(double mean, double phi) {
    if (mean <= 0) return 0;
    const double lambda = gamma(phi, phi / mean);
    return poisson(lambda);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t last_ = 0;
};

}  // namespace epifit
