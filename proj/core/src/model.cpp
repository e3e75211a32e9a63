#include "epifit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epifit/errors.hpp"
#include "epifit/stats.hpp"

namespace epifit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ParamLayout ParamLayout::make(std::size_t horizon, std::size_t n_waves, std::size_t n_ifr,
                              bool has_gamma1) {
  ParamLayout l;
  l.horizon = horizon;
  l.n_waves = n_waves;
  l.n_ifr = n_ifr;
  l.has_gamma1 = has_gamma1;
  std::size_t off = 0;
  l.z_off = off;
  off += horizon - 1;
  l.eta0_off = off++;
  if (has_gamma1) l.lgamma1_off = off++;
  l.lgamma2_off = off++;
  l.lsigma_off = off;
  off += n_waves;
  l.linvphi_off = off++;
  l.lifr_off = off;
  off += n_ifr;
  l.lseed_off = off++;
  l.dim = off;
  return l;
}

std::vector<std::string> ParamLayout::names() const {
  std::vector<std::string> out(dim);
  for (std::size_t k = 0; k + 1 < horizon; ++k) out[z_off + k] = "z." + std::to_string(k + 1);
  out[eta0_off] = "eta0";
  if (has_gamma1) out[lgamma1_off] = "log_gamma1";
  out[lgamma2_off] = "log_gamma2";
  for (std::size_t w = 0; w < n_waves; ++w)
    out[lsigma_off + w] = "log_sigma_w." + std::to_string(w + 1);
  out[linvphi_off] = "log_inv_phi";
  for (std::size_t l = 0; l < n_ifr; ++l) out[lifr_off + l] = "logit_ifr." + std::to_string(l + 1);
  out[lseed_off] = "log_seed";
  return out;
}

EpiModel::EpiModel(Kind kind, std::vector<double> deaths, ModelConfig config)
    : kind_(kind), deaths_(std::move(deaths)), config_(std::move(config)) {
  const std::size_t T = deaths_.size();
  if (T < 3) throw std::invalid_argument("EpiModel: need at least 3 observation days");
  if (config_.population <= 0) throw std::invalid_argument("EpiModel: population must be positive");
  if (config_.substeps < 1) throw std::invalid_argument("EpiModel: substeps must be >= 1");
  if (config_.death_kernel.weights.empty())
    throw std::invalid_argument("EpiModel: death kernel not set");

  WaveSchedule waves;
  waves.boundaries = config_.wave_boundaries;
  waves.sigmas.assign(config_.wave_boundaries.size() + 1, 1.0);
  waves.validate(static_cast<std::int64_t>(T));
  config_.ifr.validate(static_cast<std::int64_t>(T));
  if (config_.ifr.prior_means.size() != config_.ifr.levels.size())
    throw std::invalid_argument("EpiModel: ifr prior means required for every level");

  layout_ = ParamLayout::make(T, waves.segments(), config_.ifr.levels.size(),
                              kind_ == Kind::seir);
  wave_of_day_.resize(T - 1);
  for (std::size_t k = 0; k + 1 < T; ++k)
    wave_of_day_[k] = waves.segment_of(static_cast<std::int64_t>(k));
  ifr_of_day_.resize(T);
  for (std::size_t t = 0; t < T; ++t)
    ifr_of_day_[t] = config_.ifr.level_of(static_cast<std::int64_t>(t));
}

GammaMoments EpiModel::gamma1_prior() const {
  return gamma_from_mean_sd(config_.priors.gamma1_mean, config_.priors.gamma1_sd);
}

GammaMoments EpiModel::gamma2_prior() const {
  return gamma_from_mean_sd(config_.priors.gamma2_mean, config_.priors.gamma2_sd);
}

UnpackedParams EpiModel::unpack(std::span<const double> theta) const {
  const auto& l = layout_;
  UnpackedParams p;
  p.z.assign(theta.begin() + static_cast<std::ptrdiff_t>(l.z_off),
             theta.begin() + static_cast<std::ptrdiff_t>(l.z_off + l.horizon - 1));
  p.eta0 = theta[l.eta0_off];
  p.gamma1 = l.has_gamma1 ? std::exp(theta[l.lgamma1_off]) : 0.0;
  p.gamma2 = std::exp(theta[l.lgamma2_off]);
  p.sigmas.resize(l.n_waves);
  for (std::size_t w = 0; w < l.n_waves; ++w) p.sigmas[w] = std::exp(theta[l.lsigma_off + w]);
  p.phi = std::exp(-theta[l.linvphi_off]);
  p.ifr_levels.resize(l.n_ifr);
  for (std::size_t i = 0; i < l.n_ifr; ++i) p.ifr_levels[i] = sigmoid(theta[l.lifr_off + i]);
  p.seed_size = std::exp(theta[l.lseed_off]);
  return p;
}

double EpiModel::logp_grad(std::span<const double> theta, std::span<double> grad) const {
  const auto& l = layout_;
  const std::size_t T = l.horizon;
  const double N = config_.population;
  const int K = config_.substeps;
  std::fill(grad.begin(), grad.end(), 0.0);

  // ---- unpack ----
  const double eta0 = theta[l.eta0_off];
  const double a1 = l.has_gamma1 ? theta[l.lgamma1_off] : 0.0;
  const double a2 = theta[l.lgamma2_off];
  const double g1 = std::exp(a1);
  const double g2 = std::exp(a2);
  const double q = theta[l.linvphi_off];
  const double phi = std::exp(-q);
  const double seed_pc = std::exp(theta[l.lseed_off]) / N;
  if (!(seed_pc > 0) || seed_pc >= 1.0 || !std::isfinite(g2) || !std::isfinite(phi))
    return kNegInf;

  thread_local std::vector<double> sigmas, ifr_levels, eta, beta, c_pc, conv, d, dbar, conv_bar,
      c_pc_bar, eta_bar;
  sigmas.resize(l.n_waves);
  for (std::size_t w = 0; w < l.n_waves; ++w) sigmas[w] = std::exp(theta[l.lsigma_off + w]);
  ifr_levels.resize(l.n_ifr);
  for (std::size_t i = 0; i < l.n_ifr; ++i) ifr_levels[i] = sigmoid(theta[l.lifr_off + i]);

  // ---- latent path ----
  eta.resize(T);
  eta[0] = eta0;
  for (std::size_t k = 0; k + 1 < T; ++k)
    eta[k + 1] = eta[k] + sigmas[wave_of_day_[k]] * theta[l.z_off + k];
  beta.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    beta[t] = std::exp(eta[t]);
    if (!std::isfinite(beta[t])) return kNegInf;
  }

  // ---- forward trajectory ----
  thread_local std::vector<std::vector<StateVec>> nodes6;
  thread_local std::vector<std::vector<StateVec4>> nodes4;
  const bool seir = kind_ == Kind::seir;
  if (seir)
    nodes6.resize(T - 1);
  else
    nodes4.resize(T - 1);

  c_pc.assign(T, 0.0);
  if (seir) {
    StateVec x = {1.0 - seed_pc, 0.5 * seed_pc, 0.5 * seed_pc, 0.0, 0.0, 0.0};
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const double vax = t < config_.vax_sink.size() ? config_.vax_sink[t] : 0.0;
      double inc = 0;
      if (!seir_step_day(x, beta[t], g1, g2, vax, K, inc, &nodes6[t])) return kNegInf;
      c_pc[t + 1] = inc;
    }
  } else {
    StateVec4 x = {1.0 - seed_pc, 0.5 * seed_pc, 0.5 * seed_pc, 0.0};
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const double vax = t < config_.vax_sink.size() ? config_.vax_sink[t] : 0.0;
      double inc = 0;
      if (!sir_step_day(x, beta[t], g2, vax, K, inc, &nodes4[t])) return kNegInf;
      c_pc[t + 1] = inc;
    }
  }

  // ---- observation ----
  const auto& f = config_.death_kernel.weights;
  const std::size_t s_max = f.size();
  conv.assign(T, 0.0);
  for (std::size_t t = 1; t < T; ++t) {
    const std::size_t reach = std::min(t, s_max);
    double acc = 0;
    for (std::size_t lag = 1; lag <= reach; ++lag) acc += c_pc[t - lag] * f[lag - 1];
    conv[t] = acc * N;
  }
  d.resize(T);
  for (std::size_t t = 0; t < T; ++t) d[t] = ifr_levels[ifr_of_day_[t]] * conv[t];

  const double w_lik = config_.likelihood_weight;
  double lp = 0;
  dbar.assign(T, 0.0);
  double phi_bar = 0;
  if (w_lik != 0) {
    for (std::size_t t = 0; t < T; ++t) {
      const double mean = std::max(d[t], kDeathMeanFloor);
      lp += w_lik * negbin_lpmf(deaths_[t], mean, phi);
      if (d[t] > kDeathMeanFloor) dbar[t] = w_lik * negbin_lpmf_dmean(deaths_[t], mean, phi);
      phi_bar += w_lik * negbin_lpmf_dphi(deaths_[t], mean, phi);
    }
  }
  if (!std::isfinite(lp)) return kNegInf;

  // ---- priors ----
  const auto& pr = config_.priors;
  for (std::size_t k = 0; k + 1 < T; ++k) {
    const double z = theta[l.z_off + k];
    lp += -0.91893853320467274178 - 0.5 * z * z;
    grad[l.z_off + k] += -z;
  }
  const double mu0 = std::log(0.5 * pr.r0_guess) + a2;
  lp += normal_lpdf(eta0, mu0, pr.eta0_sd);
  grad[l.eta0_off] += -(eta0 - mu0) / (pr.eta0_sd * pr.eta0_sd);
  grad[l.lgamma2_off] += (eta0 - mu0) / (pr.eta0_sd * pr.eta0_sd);

  if (l.has_gamma1) {
    const auto gm1 = gamma1_prior();
    lp += gamma_lpdf(g1, gm1.shape, gm1.rate) + a1;
    grad[l.lgamma1_off] += gm1.shape - gm1.rate * g1;
  }
  {
    const auto gm2 = gamma2_prior();
    lp += gamma_lpdf(g2, gm2.shape, gm2.rate) + a2;
    grad[l.lgamma2_off] += gm2.shape - gm2.rate * g2;
  }
  for (std::size_t w = 0; w < l.n_waves; ++w) {
    const double s = sigmas[w];
    const double sc = pr.sigma_scale;
    lp += half_cauchy_lpdf(s, sc) + theta[l.lsigma_off + w];
    grad[l.lsigma_off + w] += 1.0 - 2.0 * s * s / (sc * sc + s * s);
  }
  {
    const double inv_phi = std::exp(q);
    const double sc = pr.inv_phi_scale;
    lp += half_cauchy_lpdf(inv_phi, sc) + q;
    grad[l.linvphi_off] += 1.0 - 2.0 * inv_phi * inv_phi / (sc * sc + inv_phi * inv_phi);
  }
  for (std::size_t i = 0; i < l.n_ifr; ++i) {
    const double x = ifr_levels[i];
    const double a = config_.ifr.prior_means[i] * config_.ifr.prior_kappa;
    const double b = (1.0 - config_.ifr.prior_means[i]) * config_.ifr.prior_kappa;
    const double lbeta = lgamma_fn(a) + lgamma_fn(b) - lgamma_fn(a + b);
    lp += a * std::log(x) + b * std::log1p(-x) - lbeta;
    grad[l.lifr_off + i] += a * (1.0 - x) - b * x;
  }
  {
    const double m = theta[l.lseed_off];
    lp += normal_lpdf(m, pr.seed_log_mean, pr.seed_log_sd);
    grad[l.lseed_off] += -(m - pr.seed_log_mean) / (pr.seed_log_sd * pr.seed_log_sd);
  }
  if (!std::isfinite(lp)) return kNegInf;

  // ---- adjoint: observation ----
  conv_bar.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double x = ifr_levels[ifr_of_day_[t]];
    conv_bar[t] = dbar[t] * x;
    grad[l.lifr_off + ifr_of_day_[t]] += dbar[t] * conv[t] * x * (1.0 - x);
  }
  c_pc_bar.assign(T, 0.0);
  for (std::size_t tau = 0; tau < T; ++tau) {
    const std::size_t reach = std::min(s_max, T - 1 - tau);
    double acc = 0;
    for (std::size_t lag = 1; lag <= reach; ++lag) acc += conv_bar[tau + lag] * f[lag - 1];
    c_pc_bar[tau] = acc * N;
  }

  // ---- adjoint: trajectory ----
  eta_bar.assign(T, 0.0);
  double g1_bar = 0, g2_bar = 0, seed_pc_bar = 0;
  if (seir) {
    StateVec lambda = {0, 0, 0, 0, 0, 0};
    for (std::size_t t = T - 1; t-- > 0;) {
      double beta_bar = 0;
      seir_day_adjoint(nodes6[t], beta[t], g1, g2, K, lambda, c_pc_bar[t + 1], beta_bar, g1_bar,
                       g2_bar);
      eta_bar[t] = beta_bar * beta[t];
    }
    seed_pc_bar = -lambda[0] + 0.5 * (lambda[1] + lambda[2]);
  } else {
    StateVec4 lambda = {0, 0, 0, 0};
    for (std::size_t t = T - 1; t-- > 0;) {
      double beta_bar = 0;
      sir_day_adjoint(nodes4[t], beta[t], g2, K, lambda, c_pc_bar[t + 1], beta_bar, g2_bar);
      eta_bar[t] = beta_bar * beta[t];
    }
    seed_pc_bar = -lambda[0] + 0.5 * (lambda[1] + lambda[2]);
  }

  // ---- adjoint: path and transforms ----
  double suffix = 0;  // sum of eta_bar[t] for t >= k+1
  for (std::size_t k = T - 1; k-- > 0;) {
    suffix += eta_bar[k + 1];
    const std::size_t w = wave_of_day_[k];
    grad[l.z_off + k] += sigmas[w] * suffix;
    grad[l.lsigma_off + w] += theta[l.z_off + k] * suffix * sigmas[w];
  }
  grad[l.eta0_off] += suffix + eta_bar[0];

  if (l.has_gamma1) grad[l.lgamma1_off] += g1_bar * g1;
  grad[l.lgamma2_off] += g2_bar * g2;
  grad[l.linvphi_off] += phi_bar * (-phi);
  grad[l.lseed_off] += seed_pc_bar * seed_pc;

  return lp;
}

DerivedSeries EpiModel::derived(std::span<const double> theta) const {
  const auto& l = layout_;
  const std::size_t T = l.horizon;
  const double N = config_.population;
  const auto p = unpack(theta);

  DerivedSeries out;
  out.beta.resize(T);
  {
    double e = p.eta0;
    out.beta[0] = std::exp(e);
    for (std::size_t k = 0; k + 1 < T; ++k) {
      e += p.sigmas[wave_of_day_[k]] * p.z[k];
      out.beta[k + 1] = std::exp(e);
    }
  }

  out.infections.assign(T, 0.0);
  if (kind_ == Kind::seir) {
    StateVec x = {1.0 - p.seed_size / N, 0.5 * p.seed_size / N, 0.5 * p.seed_size / N, 0, 0, 0};
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const double vax = t < config_.vax_sink.size() ? config_.vax_sink[t] : 0.0;
      double inc = 0;
      if (!seir_step_day(x, out.beta[t], p.gamma1, p.gamma2, vax, config_.substeps, inc, nullptr))
        throw IntegratorError("derived: trajectory failed", static_cast<int>(t));
      out.infections[t + 1] = inc * N;
    }
  } else {
    StateVec4 x = {1.0 - p.seed_size / N, 0.5 * p.seed_size / N, 0.5 * p.seed_size / N, 0};
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const double vax = t < config_.vax_sink.size() ? config_.vax_sink[t] : 0.0;
      double inc = 0;
      if (!sir_step_day(x, out.beta[t], p.gamma2, vax, config_.substeps, inc, nullptr))
        throw IntegratorError("derived: trajectory failed", static_cast<int>(t));
      out.infections[t + 1] = inc * N;
    }
  }

  out.deaths_mean = convolve_delay(out.infections, config_.death_kernel);
  for (std::size_t t = 0; t < T; ++t) out.deaths_mean[t] *= p.ifr_levels[ifr_of_day_[t]];
  out.rt.resize(T);
  for (std::size_t t = 0; t < T; ++t) out.rt[t] = 2.0 * out.beta[t] / p.gamma2;
  return out;
}

std::vector<double> EpiModel::initial_point(Rng& rng) const {
  const auto& l = layout_;
  const auto& pr = config_.priors;
  std::vector<double> theta(l.dim, 0.0);
  auto jitter = [&] { return 1.0 + rng.uniform(-0.1, 0.1); };

  theta[l.eta0_off] =
      (std::log(0.5 * pr.r0_guess * pr.gamma2_mean)) + rng.uniform(-0.1, 0.1);
  if (l.has_gamma1) theta[l.lgamma1_off] = std::log(pr.gamma1_mean * jitter());
  theta[l.lgamma2_off] = std::log(pr.gamma2_mean * jitter());
  for (std::size_t w = 0; w < l.n_waves; ++w)
    theta[l.lsigma_off + w] = std::log(pr.sigma_scale * jitter());
  theta[l.linvphi_off] = std::log(pr.inv_phi_scale * jitter());
  for (std::size_t i = 0; i < l.n_ifr; ++i)
    theta[l.lifr_off + i] = logit(std::clamp(config_.ifr.prior_means[i] * jitter(), 1e-8, 1 - 1e-8));
  theta[l.lseed_off] = std::log(std::exp(pr.seed_log_mean) * jitter());
  return theta;
}

}  // namespace epifit
