#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epifit/rng.hpp"

namespace epifit {

// Differentiable unnormalized log density. Implementations must be reentrant:
// chains call logp_grad concurrently. A return of -inf (gradient contents
// then ignored) marks an invalid point; the sampler treats the transition as
// divergent.
class LogDensityTarget {
 public:
  virtual ~LogDensityTarget() = default;
  virtual std::size_t dim() const = 0;
  virtual double logp_grad(std::span<const double> x, std::span<double> grad) const = 0;
};

struct NutsOptions {
  int warmup = 500;
  int samples = 500;
  double target_accept = 0.8;
  int max_treedepth = 10;
  double divergence_threshold = 1000.0;  // energy error cutoff
  bool adapt_mass = true;
  double fixed_stepsize = 0;  // > 0 disables stepsize search and averaging
  // Stan-style warmup phases: stepsize-only head, expanding covariance
  // windows, stepsize-only tail.
  int init_buffer = 75;
  int term_buffer = 50;
  int base_window = 25;
};

struct TransitionStats {
  double accept_stat = 0;
  double stepsize = 0;
  double energy = 0;
  int treedepth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
};

struct ChainResult {
  std::vector<std::vector<double>> draws;  // post-warmup: samples x dim
  std::vector<TransitionStats> stats;      // one per post-warmup draw
  std::vector<double> inv_mass;
  double stepsize = 0;
  int divergences = 0;         // post-warmup
  int warmup_divergences = 0;
};

// Run one chain from the given initial point. Throws NumericError when the
// initial log density is not finite.
ChainResult run_nuts_chain(const LogDensityTarget& target, std::span<const double> init,
                           const NutsOptions& options, Rng& rng);

}  // namespace epifit
