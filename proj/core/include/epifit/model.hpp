#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epifit/kernel.hpp"
#include "epifit/observation.hpp"
#include "epifit/path.hpp"
#include "epifit/rng.hpp"
#include "epifit/seir.hpp"
#include "epifit/stats.hpp"

namespace epifit {

struct PriorConfig {
  double gamma1_mean = 1.0;
  double gamma1_sd = 0.05;
  double gamma2_mean = 0.4;
  double gamma2_sd = 0.05;
  double sigma_scale = 5.0;     // half-Cauchy scale for each wave volatility
  double inv_phi_scale = 5.0;   // half-Cauchy scale for 1/phi
  double seed_log_mean = 2.9957322735539909;  // log 20
  double seed_log_sd = 1.0;
  double r0_guess = 3.0;        // centers the eta0 prior at log(r0 * gamma2 / 2)
  double eta0_sd = 0.5;
};

struct ModelConfig {
  double population = 0;
  int substeps = 4;
  std::vector<std::int64_t> wave_boundaries;  // day indices; one sigma per segment
  IfrSchedule ifr;                            // levels are sampled; priors read from here
  DelayKernel death_kernel;                   // infection-to-death delay
  PriorConfig priors;
  // rho * nu_{t-U} as a population fraction per day; empty means no vaccination.
  std::vector<double> vax_sink;
  double likelihood_weight = 1.0;  // test hook; 0 switches the observations off
};

// Offsets of the unconstrained parameter vector.
struct ParamLayout {
  std::size_t horizon = 0;  // T days in the analysis window
  std::size_t n_waves = 1;
  std::size_t n_ifr = 1;
  bool has_gamma1 = true;

  std::size_t z_off = 0;
  std::size_t eta0_off = 0;
  std::size_t lgamma1_off = 0;
  std::size_t lgamma2_off = 0;
  std::size_t lsigma_off = 0;
  std::size_t linvphi_off = 0;
  std::size_t lifr_off = 0;
  std::size_t lseed_off = 0;
  std::size_t dim = 0;

  static ParamLayout make(std::size_t horizon, std::size_t n_waves, std::size_t n_ifr,
                          bool has_gamma1);
  std::vector<std::string> names() const;
};

// Constrained view of one parameter vector.
struct UnpackedParams {
  std::vector<double> z;
  double eta0 = 0;
  double gamma1 = 0;  // NaN-free but unused for the SIR reduction
  double gamma2 = 0;
  std::vector<double> sigmas;
  double phi = 0;
  std::vector<double> ifr_levels;
  double seed_size = 0;
};

// Per-draw derived series on the window grid.
struct DerivedSeries {
  std::vector<double> beta;        // exp(eta_t), t = 0..T-1
  std::vector<double> infections;  // persons newly infected during (t-1, t]; index 0 is 0
  std::vector<double> deaths_mean; // expected deaths d_t
  std::vector<double> rt;          // 2 beta_t / gamma2
};

// Joint log posterior of the transmission model fit to daily death counts,
// with the exact gradient assembled by a reverse pass through the convolution
// and the trapezoidal integrator.
class EpiModel {
 public:
  enum class Kind { seir, sir };

  EpiModel(Kind kind, std::vector<double> deaths, ModelConfig config);

  std::size_t dim() const { return layout_.dim; }
  const ParamLayout& layout() const { return layout_; }
  const ModelConfig& config() const { return config_; }
  Kind kind() const { return kind_; }

  // Returns -inf (gradient zeroed) when the integrator fails; the sampler
  // treats that as a divergent proposal.
  double logp_grad(std::span<const double> theta, std::span<double> grad) const;

  UnpackedParams unpack(std::span<const double> theta) const;
  // Forward pass only. Throws IntegratorError if the trajectory fails.
  DerivedSeries derived(std::span<const double> theta) const;

  // z = 0, scalars at prior medians jittered by +-10%.
  std::vector<double> initial_point(Rng& rng) const;

  GammaMoments gamma1_prior() const;
  GammaMoments gamma2_prior() const;

 private:
  Kind kind_;
  std::vector<double> deaths_;
  ModelConfig config_;
  ParamLayout layout_;
  std::vector<std::size_t> wave_of_day_;  // increment k -> wave segment
  std::vector<std::size_t> ifr_of_day_;
};

}  // namespace epifit
