#include "epifit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace epifit {

double lgamma_fn(double x) { return std::lgamma(x); }

double digamma_fn(double x) { return boost::math::digamma(x); }

double gamma_cdf_lower(double shape, double x) {
  if (x <= 0) return 0.0;
  return boost::math::gamma_p(shape, x);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
  return boost::math::quantile(std_normal, p);
}

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
}

double normal_lpdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double gamma_lpdf(double x, double shape, double rate) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double beta_lpdf(double x, double a, double b) {
  if (x <= 0 || x >= 1) return -std::numeric_limits<double>::infinity();
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
}

double half_cauchy_lpdf(double x, double s) {
  if (x < 0) return -std::numeric_limits<double>::infinity();
  return std::log(2.0) - std::log(M_PI * s) - std::log1p((x / s) * (x / s));
}

double half_cauchy_quantile(double p, double s) { return s * std::tan(0.5 * M_PI * p); }

GammaMoments gamma_from_mean_sd(double mean, double sd) {
  const double shape = (mean / sd) * (mean / sd);
  return {shape, mean / (sd * sd)};
}

double negbin_lpmf(double count, double mean, double phi) {
  // size = phi, success prob = phi / (phi + mean); variance = mean + mean^2/phi.
  const double lp = std::log(phi) - std::log(phi + mean);
  const double lq = std::log(mean) - std::log(phi + mean);
  return std::lgamma(count + phi) - std::lgamma(phi) - std::lgamma(count + 1.0) +
         phi * lp + count * lq;
}

double negbin_lpmf_dmean(double count, double mean, double phi) {
  return count / mean - (count + phi) / (phi + mean);
}

double negbin_lpmf_dphi(double count, double mean, double phi) {
  return boost::math::digamma(count + phi) - boost::math::digamma(phi) +
         std::log(phi) - std::log(phi + mean) + 1.0 - (count + phi) / (phi + mean);
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double quantile(std::span<const double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  if (p <= 0) return s.front();
  if (p >= 1) return s.back();
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * s[lo] + w * s[hi];
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

double median_of(std::span<const double> v) { return quantile(v, 0.5); }

std::vector<double> rank_normalize(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
    i = j + 1;
  }

  std::vector<double> z(n);
  const double denom = static_cast<double>(n) + 0.25;
  for (std::size_t k = 0; k < n; ++k)
    z[k] = normal_quantile((ranks[k] - 0.375) / denom);
  return z;
}

}  // namespace epifit
