#include "epifit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "epifit/stats.hpp"

namespace epifit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Split each chain in half, pool, rank-normalize jointly, and hand back the
// normalized split chains.
ChainDraws split_and_rank_normalize(const ChainDraws& chains) {
  if (chains.empty() || chains.front().size() < 4)
    throw std::invalid_argument("diagnostics: need chains with at least 4 draws");
  const std::size_t n_half = chains.front().size() / 2;

  std::vector<double> pooled;
  for (const auto& c : chains) {
    if (c.size() != chains.front().size())
      throw std::invalid_argument("diagnostics: ragged chains");
    for (std::size_t i = 0; i < 2 * n_half; ++i) pooled.push_back(c[i]);
  }
  const auto z = rank_normalize(pooled);

  ChainDraws split;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    split.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(pos),
                       z.begin() + static_cast<std::ptrdiff_t>(pos + n_half));
    split.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(pos + n_half),
                       z.begin() + static_cast<std::ptrdiff_t>(pos + 2 * n_half));
    pos += 2 * n_half;
  }
  return split;
}

bool is_constant(const ChainDraws& chains) {
  const double v0 = chains.front().front();
  for (const auto& c : chains)
    for (double v : c)
      if (v != v0) return false;
  return true;
}

double rhat_of(const ChainDraws& split) {
  const double m = static_cast<double>(split.size());
  const double n = static_cast<double>(split.front().size());
  std::vector<double> means(split.size());
  double w = 0;
  for (std::size_t c = 0; c < split.size(); ++c) {
    means[c] = mean_of(split[c]);
    w += sample_variance(split[c]);
  }
  w /= m;
  const double b = n * sample_variance(means);
  if (!(w > 0)) return kNaN;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double ess_of(const ChainDraws& split) {
  const std::size_t m = split.size();
  const std::size_t n = split.front().size();

  // Per-chain autocovariance (biased, divisor n).
  std::vector<std::vector<double>> acov(m);
  std::vector<double> chain_means(m), chain_vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    const auto& x = split[c];
    const double mu = mean_of(x);
    chain_means[c] = mu;
    acov[c].assign(n, 0.0);
    for (std::size_t lag = 0; lag < n; ++lag) {
      double acc = 0;
      for (std::size_t i = 0; i + lag < n; ++i) acc += (x[i] - mu) * (x[i + lag] - mu);
      acov[c][lag] = acc / static_cast<double>(n);
    }
    chain_vars[c] = acov[c][0] * static_cast<double>(n) / (static_cast<double>(n) - 1.0);
  }

  const double mean_var = mean_of(chain_vars);
  double var_plus = mean_var * (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  if (m > 1) var_plus += sample_variance(chain_means);
  if (!(var_plus > 0)) return kNaN;

  auto mean_acov = [&](std::size_t lag) {
    double acc = 0;
    for (std::size_t c = 0; c < m; ++c) acc += acov[c][lag];
    return acc / static_cast<double>(m);
  };

  // Geyer initial positive + monotone sequence over paired autocorrelations.
  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  if (n > 1) rho[1] = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  double tau = rho[0] + (n > 1 ? rho[1] : 0.0);
  double prev_pair = tau;
  std::size_t lag = 2;
  while (lag + 1 < n) {
    const double even = 1.0 - (mean_var - mean_acov(lag)) / var_plus;
    const double odd = 1.0 - (mean_var - mean_acov(lag + 1)) / var_plus;
    double pair = even + odd;
    if (pair < 0) break;
    pair = std::min(pair, prev_pair);  // enforce monotone non-increase
    tau += pair;
    prev_pair = pair;
    lag += 2;
  }
  tau = 2.0 * tau - 1.0;  // tau = -1 + 2 * sum of pair sums (rho_0 counted once)

  const double total = static_cast<double>(m) * static_cast<double>(n);
  if (!(tau > 0)) return total;
  return total / tau;
}

}  // namespace

double split_rhat(const ChainDraws& chains) {
  if (is_constant(chains)) return kNaN;
  return rhat_of(split_and_rank_normalize(chains));
}

double bulk_ess(const ChainDraws& chains) {
  if (is_constant(chains)) return kNaN;
  return ess_of(split_and_rank_normalize(chains));
}

SummaryStats summarize(const ChainDraws& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());

  SummaryStats s;
  s.mean = mean_of(pooled);
  s.sd = std::sqrt(sample_variance(pooled));
  s.q2_5 = quantile(pooled, 0.025);
  s.q25 = quantile(pooled, 0.25);
  s.q50 = quantile(pooled, 0.50);
  s.q75 = quantile(pooled, 0.75);
  s.q97_5 = quantile(pooled, 0.975);
  s.rhat = split_rhat(chains);
  s.ess_bulk = bulk_ess(chains);
  s.mcse_mean = s.ess_bulk > 0 ? s.sd / std::sqrt(s.ess_bulk) : kNaN;
  return s;
}

}  // namespace epifit
