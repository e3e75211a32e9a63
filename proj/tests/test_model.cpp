#include <doctest.h>

#include <cmath>
#include <vector>

#include "epifit/model.hpp"
#include "epifit/rng.hpp"
#include "epifit/stats.hpp"

#include "support/synthetic.hpp"

using namespace epifit;

namespace {

ModelConfig base_config(double N, std::size_t /*T*/) {
  ModelConfig cfg;
  cfg.population = N;
  cfg.ifr.levels = {0.01};
  cfg.ifr.prior_means = {0.01};
  cfg.death_kernel = discretize_gamma_auto(6.29, 0.26);
  return cfg;
}

// Random but well-behaved evaluation point.
std::vector<double> random_point(const EpiModel& m, Rng& rng) {
  const auto& l = m.layout();
  std::vector<double> theta(l.dim);
  for (std::size_t k = 0; k + 1 < l.horizon; ++k) theta[l.z_off + k] = 0.3 * rng.normal();
  theta[l.eta0_off] = std::log(0.5) + 0.15 * rng.normal();
  if (l.has_gamma1) theta[l.lgamma1_off] = std::log(1.0) + 0.04 * rng.normal();
  theta[l.lgamma2_off] = std::log(0.4) + 0.04 * rng.normal();
  for (std::size_t w = 0; w < l.n_waves; ++w) theta[l.lsigma_off + w] = std::log(0.1) + 0.3 * rng.normal();
  theta[l.linvphi_off] = std::log(0.2) + 0.3 * rng.normal();
  for (std::size_t i = 0; i < l.n_ifr; ++i) theta[l.lifr_off + i] = logit(0.01) + 0.1 * rng.normal();
  theta[l.lseed_off] = std::log(50.0) + 0.3 * rng.normal();
  return theta;
}

double max_grad_rel_error(const EpiModel& m, std::span<const double> theta) {
  const std::size_t dim = m.dim();
  std::vector<double> grad(dim), gtmp(dim);
  const double lp = m.logp_grad(theta, grad);
  REQUIRE(std::isfinite(lp));

  std::vector<double> point(theta.begin(), theta.end());
  double worst = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(point[i]));
    const double saved = point[i];
    point[i] = saved + h;
    const double up = m.logp_grad(point, gtmp);
    point[i] = saved - h;
    const double dn = m.logp_grad(point, gtmp);
    point[i] = saved;
    const double fd = (up - dn) / (2 * h);
    const double denom = std::max({std::abs(grad[i]), std::abs(fd), 1e-3});
    worst = std::max(worst, std::abs(grad[i] - fd) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("SEIR log-posterior gradient matches central finite differences") {
  const std::size_t T = 40;
  const double N = 2e5;
  const auto synth = testsupport::make_synthetic(T, N, 0.5, 1.0, 0.4, 0.01, 8.0, 60, 0.2, 11);
  ModelConfig cfg = base_config(N, T);
  cfg.wave_boundaries = {20};  // exercise two wave segments
  EpiModel m(EpiModel::Kind::seir, synth.deaths, cfg);

  Rng rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    const auto theta = random_point(m, rng);
    const double worst = max_grad_rel_error(m, theta);
    INFO("replicate ", rep, " max relative gradient error ", worst);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("SIR log-posterior gradient matches central finite differences") {
  const std::size_t T = 40;
  const double N = 2e5;
  const auto synth = testsupport::make_synthetic(T, N, 0.5, 1.0, 0.4, 0.01, 8.0, 60, 0.2, 13);
  EpiModel m(EpiModel::Kind::sir, synth.deaths, base_config(N, T));

  Rng rng(7);
  for (int rep = 0; rep < 3; ++rep) {
    const auto theta = random_point(m, rng);
    const double worst = max_grad_rel_error(m, theta);
    INFO("replicate ", rep, " max relative gradient error ", worst);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("with the likelihood switched off the path prior peaks at z = 0") {
  const std::size_t T = 30;
  const double N = 1e5;
  const auto synth = testsupport::make_synthetic(T, N, 0.5, 1.0, 0.4, 0.01, 8.0, 40, 0.0, 3);
  ModelConfig cfg = base_config(N, T);
  cfg.likelihood_weight = 0.0;
  EpiModel m(EpiModel::Kind::seir, synth.deaths, cfg);

  Rng rng(5);
  auto theta = random_point(m, rng);
  const auto& l = m.layout();
  for (std::size_t k = 0; k + 1 < T; ++k) theta[l.z_off + k] = 0.0;

  std::vector<double> grad(m.dim());
  const double at_zero = m.logp_grad(theta, grad);
  for (std::size_t k = 0; k + 1 < T; ++k) CHECK(grad[l.z_off + k] == 0.0);

  for (int rep = 0; rep < 10; ++rep) {
    auto perturbed = theta;
    for (std::size_t k = 0; k + 1 < T; ++k) perturbed[l.z_off + k] = 0.3 * rng.normal();
    CHECK(m.logp_grad(perturbed, grad) < at_zero);
  }
}

TEST_CASE("doubling observed deaths lowers the posterior when the model under-predicts") {
  const std::size_t T = 10;
  const double N = 5e4;
  std::vector<double> deaths = {0, 1, 2, 4, 5, 8, 9, 12, 15, 18};
  ModelConfig cfg = base_config(N, T);
  EpiModel m(EpiModel::Kind::seir, deaths, cfg);

  // Tiny seed: the model's expected deaths stay far below the observations.
  Rng rng(1);
  auto theta = random_point(m, rng);
  theta[m.layout().lseed_off] = std::log(2.0);
  const auto der = m.derived(theta);
  for (std::size_t t = 0; t < T; ++t) REQUIRE(der.deaths_mean[t] < deaths[t] + 1e-9);

  std::vector<double> grad(m.dim());
  const double before = m.logp_grad(theta, grad);
  std::vector<double> doubled = deaths;
  for (auto& v : doubled) v *= 2;
  EpiModel m2(EpiModel::Kind::seir, doubled, cfg);
  CHECK(m2.logp_grad(theta, grad) < before);
}

TEST_CASE("unpack inverts the packing transforms") {
  const std::size_t T = 25;
  const double N = 1e5;
  const auto synth = testsupport::make_synthetic(T, N, 0.5, 1.0, 0.4, 0.01, 8.0, 40, 0.1, 17);
  ModelConfig cfg = base_config(N, T);
  cfg.wave_boundaries = {12};
  EpiModel m(EpiModel::Kind::seir, synth.deaths, cfg);

  Rng rng(23);
  const auto theta = random_point(m, rng);
  const auto p = m.unpack(theta);
  const auto& l = m.layout();

  // Re-pack by applying the declared transforms and compare coordinates.
  std::vector<double> repacked(l.dim);
  for (std::size_t k = 0; k + 1 < T; ++k) repacked[l.z_off + k] = p.z[k];
  repacked[l.eta0_off] = p.eta0;
  repacked[l.lgamma1_off] = std::log(p.gamma1);
  repacked[l.lgamma2_off] = std::log(p.gamma2);
  for (std::size_t w = 0; w < l.n_waves; ++w) repacked[l.lsigma_off + w] = std::log(p.sigmas[w]);
  repacked[l.linvphi_off] = -std::log(p.phi);
  for (std::size_t i = 0; i < l.n_ifr; ++i) repacked[l.lifr_off + i] = logit(p.ifr_levels[i]);
  repacked[l.lseed_off] = std::log(p.seed_size);
  for (std::size_t i = 0; i < l.dim; ++i)
    CHECK(repacked[i] == doctest::Approx(theta[i]).epsilon(1e-12));
}

TEST_CASE("prior suite pins the stated sojourn times") {
  const std::size_t T = 25;
  const double N = 1e5;
  const auto synth = testsupport::make_synthetic(T, N, 0.5, 1.0, 0.4, 0.01, 8.0, 40, 0.0, 19);
  ModelConfig cfg = base_config(N, T);
  EpiModel m(EpiModel::Kind::seir, synth.deaths, cfg);

  const auto g1 = m.gamma1_prior();
  const auto g2 = m.gamma2_prior();
  CHECK(2.0 / (g1.shape / g1.rate) == doctest::Approx(2.0));  // mean latent period
  CHECK(2.0 / (g2.shape / g2.rate) == doctest::Approx(5.0));  // mean infectious period (2020)

  ModelConfig late = cfg;
  late.priors.gamma2_mean = 0.5;
  EpiModel m_late(EpiModel::Kind::seir, synth.deaths, late);
  const auto g2l = m_late.gamma2_prior();
  CHECK(2.0 / (g2l.shape / g2l.rate) == doctest::Approx(4.0));

  // Half-Cauchy(0, 5) median is 5: the volatility prior.
  CHECK(half_cauchy_quantile(0.5, 5.0) == doctest::Approx(5.0));
}

TEST_CASE("divergent parameter regions return -inf with a zeroed gradient") {
  const std::size_t T = 20;
  const double N = 1e5;
  const auto synth = testsupport::make_synthetic(T, N, 0.5, 1.0, 0.4, 0.01, 8.0, 40, 0.0, 29);
  EpiModel m(EpiModel::Kind::seir, synth.deaths, base_config(N, T));

  Rng rng(31);
  auto theta = random_point(m, rng);
  theta[m.layout().eta0_off] = 8.0;  // beta ~ 3000/day breaks the fixed point
  std::vector<double> grad(m.dim(), 123.0);
  const double lp = m.logp_grad(theta, grad);
  CHECK(lp == -std::numeric_limits<double>::infinity());
  for (double g : grad) CHECK(g == 0.0);
}
