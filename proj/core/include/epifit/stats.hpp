#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace epifit {

// ---- special functions ----------------------------------------------------

double lgamma_fn(double x);
double digamma_fn(double x);
// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_cdf_lower(double shape, double x);
// Standard normal quantile.
double normal_quantile(double p);

// ---- log densities (and the derivatives the adjoint pass needs) -----------

double normal_lpdf(double x, double mu, double sigma);
double gamma_lpdf(double x, double shape, double rate);
double beta_lpdf(double x, double a, double b);
// Half-Cauchy on [0, inf) with scale s.
double half_cauchy_lpdf(double x, double s);
double half_cauchy_quantile(double p, double s);

// Shape/rate pair of the Gamma with the given mean and standard deviation.
struct GammaMoments {
  double shape;
  double rate;
};
GammaMoments gamma_from_mean_sd(double mean, double sd);

// Negative binomial with mean `mean` and variance mean + mean^2/phi.
double negbin_lpmf(double count, double mean, double phi);
double negbin_lpmf_dmean(double count, double mean, double phi);
double negbin_lpmf_dphi(double count, double mean, double phi);

// ---- small numeric helpers -------------------------------------------------

double log_sum_exp(double a, double b);
double sigmoid(double x);
double logit(double p);

// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::span<const double> sample, double p);
double mean_of(std::span<const double> v);
double sample_variance(std::span<const double> v);  // ddof = 1
double median_of(std::span<const double> v);

// Average ranks (ties averaged), then the normal quantile of
// (rank - 3/8) / (n + 1/4). Used by the sampler diagnostics.
std::vector<double> rank_normalize(std::span<const double> v);

}  // namespace epifit
