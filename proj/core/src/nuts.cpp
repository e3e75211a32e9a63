#include "epifit/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epifit/errors.hpp"
#include "epifit/stats.hpp"

namespace epifit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PhasePoint {
  std::vector<double> x, p, grad;
  double logp = -kInf;
};

struct Welford {
  std::size_t n = 0;
  std::vector<double> mean, m2;
  void reset(std::size_t dim) {
    n = 0;
    mean.assign(dim, 0.0);
    m2.assign(dim, 0.0);
  }
  void add(std::span<const double> x) {
    ++n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(n);
      m2[i] += d * (x[i] - mean[i]);
    }
  }
};

class Sampler {
 public:
  Sampler(const LogDensityTarget& target, const NutsOptions& opts, Rng& rng)
      : target_(target), opts_(opts), rng_(rng), dim_(target.dim()), inv_mass_(dim_, 1.0) {}

  ChainResult run(std::span<const double> init);

 private:
  double kinetic(std::span<const double> p) const {
    double k = 0;
    for (std::size_t i = 0; i < dim_; ++i) k += p[i] * p[i] * inv_mass_[i];
    return 0.5 * k;
  }

  // One leapfrog step; returns false when the density is invalid there.
  bool leapfrog(PhasePoint& z, double eps) const {
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps * z.grad[i];
    for (std::size_t i = 0; i < dim_; ++i) z.x[i] += eps * inv_mass_[i] * z.p[i];
    z.logp = target_.logp_grad(z.x, z.grad);
    if (!std::isfinite(z.logp)) return false;
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps * z.grad[i];
    return true;
  }

  struct Tree {
    std::vector<double> x_prop, grad_prop;
    double logp_prop = -kInf;
    std::vector<double> rho;            // sum of momenta over the subtree
    std::vector<double> p_sharp_begin;  // M^-1 p at the subtree ends
    std::vector<double> p_sharp_end;
    double log_sum_weight = -kInf;
    double sum_accept = 0;
    int n_leapfrog = 0;
    bool divergent = false;
    bool turning = false;
  };

  bool no_u_turn(std::span<const double> p_sharp_a, std::span<const double> p_sharp_b,
                 std::span<const double> rho) const {
    double da = 0, db = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      da += p_sharp_a[i] * rho[i];
      db += p_sharp_b[i] * rho[i];
    }
    return da > 0 && db > 0;
  }

  void build_tree(int depth, PhasePoint& z, double eps, double h0, Tree& out) {
    if (depth == 0) {
      const bool ok = leapfrog(z, eps);
      out.n_leapfrog = 1;
      const double h = ok ? -z.logp + kinetic(z.p) : kInf;
      const double delta = h - h0;
      if (!std::isfinite(delta) || delta > opts_.divergence_threshold) {
        out.divergent = true;
        out.log_sum_weight = -kInf;
        out.sum_accept += 0.0;
        return;
      }
      out.log_sum_weight = -delta;
      out.sum_accept = std::min(1.0, std::exp(-delta));
      out.x_prop = z.x;
      out.grad_prop = z.grad;
      out.logp_prop = z.logp;
      out.rho = z.p;
      out.p_sharp_begin.resize(dim_);
      for (std::size_t i = 0; i < dim_; ++i) out.p_sharp_begin[i] = inv_mass_[i] * z.p[i];
      out.p_sharp_end = out.p_sharp_begin;
      return;
    }

    Tree left;
    build_tree(depth - 1, z, eps, h0, left);
    out.n_leapfrog = left.n_leapfrog;
    out.sum_accept = left.sum_accept;
    if (left.divergent || left.turning) {
      out.divergent = left.divergent;
      out.turning = left.turning;
      return;
    }

    Tree right;
    build_tree(depth - 1, z, eps, h0, right);
    out.n_leapfrog += right.n_leapfrog;
    out.sum_accept += right.sum_accept;
    if (right.divergent || right.turning) {
      out.divergent = right.divergent;
      out.turning = right.turning;
      return;
    }

    out.log_sum_weight = log_sum_exp(left.log_sum_weight, right.log_sum_weight);
    const double take_right = std::exp(right.log_sum_weight - out.log_sum_weight);
    if (rng_.uniform() < take_right) {
      out.x_prop = std::move(right.x_prop);
      out.grad_prop = std::move(right.grad_prop);
      out.logp_prop = right.logp_prop;
    } else {
      out.x_prop = std::move(left.x_prop);
      out.grad_prop = std::move(left.grad_prop);
      out.logp_prop = left.logp_prop;
    }
    out.rho.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out.rho[i] = left.rho[i] + right.rho[i];
    out.p_sharp_begin = std::move(left.p_sharp_begin);
    out.p_sharp_end = std::move(right.p_sharp_end);
    out.turning = !no_u_turn(out.p_sharp_begin, out.p_sharp_end, out.rho);
  }

  TransitionStats transition(PhasePoint& current, double eps) {
    PhasePoint z_minus = current, z_plus = current;
    for (std::size_t i = 0; i < dim_; ++i)
      z_minus.p[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
    z_plus.p = z_minus.p;

    const double h0 = -current.logp + kinetic(z_minus.p);

    std::vector<double> x_sample = current.x, grad_sample = current.grad;
    double logp_sample = current.logp;
    std::vector<double> rho = z_minus.p;
    double log_sum_weight = 0.0;

    TransitionStats ts;
    ts.stepsize = eps;
    ts.energy = h0;
    double sum_accept = 0;
    int n_states = 0;

    for (int depth = 0; depth < opts_.max_treedepth; ++depth) {
      const double dir = rng_.uniform() < 0.5 ? -1.0 : 1.0;
      PhasePoint& edge = dir < 0 ? z_minus : z_plus;
      Tree sub;
      build_tree(depth, edge, dir * eps, h0, sub);
      ts.n_leapfrog += sub.n_leapfrog;
      sum_accept += sub.sum_accept;
      n_states += sub.n_leapfrog;
      if (sub.divergent) {
        ts.divergent = true;
        break;
      }
      if (sub.turning) break;
      ts.treedepth = depth + 1;

      if (rng_.uniform() < std::exp(sub.log_sum_weight - log_sum_weight)) {
        x_sample = std::move(sub.x_prop);
        grad_sample = std::move(sub.grad_prop);
        logp_sample = sub.logp_prop;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, sub.log_sum_weight);
      for (std::size_t i = 0; i < dim_; ++i) rho[i] += sub.rho[i];

      std::vector<double> ps_minus(dim_), ps_plus(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        ps_minus[i] = inv_mass_[i] * z_minus.p[i];
        ps_plus[i] = inv_mass_[i] * z_plus.p[i];
      }
      if (!no_u_turn(ps_minus, ps_plus, rho)) break;
    }

    ts.accept_stat = n_states > 0 ? sum_accept / n_states : 0.0;
    current.x = std::move(x_sample);
    current.grad = std::move(grad_sample);
    current.logp = logp_sample;
    return ts;
  }

  // Heuristic initial step size (doubling/halving to cross 50% acceptance).
  double find_initial_stepsize(const PhasePoint& origin) {
    double eps = 1.0;
    PhasePoint probe = origin;
    for (std::size_t i = 0; i < dim_; ++i) probe.p[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
    const double h0 = -probe.logp + kinetic(probe.p);

    auto accept_prob = [&](double e) {
      PhasePoint z = probe;
      if (!leapfrog(z, e)) return 0.0;
      const double h = -z.logp + kinetic(z.p);
      return std::exp(std::min(0.0, h0 - h));
    };

    double a0 = accept_prob(eps);
    const double dir = a0 > 0.5 ? 1.0 : -1.0;
    for (int it = 0; it < 100; ++it) {
      eps *= dir > 0 ? 2.0 : 0.5;
      const double a = accept_prob(eps);
      if ((dir > 0 && a <= 0.5) || (dir < 0 && a >= 0.5)) break;
      if (eps > 1e7 || eps < 1e-10) break;
    }
    return std::clamp(eps, 1e-10, 1e7);
  }

  const LogDensityTarget& target_;
  const NutsOptions& opts_;
  Rng& rng_;
  std::size_t dim_;
  std::vector<double> inv_mass_;
};

// Dual averaging state for the step size (Hoffman & Gelman defaults).
struct DualAveraging {
  double mu = 0, log_eps = 0, log_eps_bar = 0, h_bar = 0;
  double gamma = 0.20, t0 = 10, kappa = 0.75;
  int counter = 0;

  void restart(double eps) {
    mu = std::log(10.0 * eps);
    log_eps = std::log(eps);
    log_eps_bar = std::log(eps);
    h_bar = 0;
    counter = 0;
  }
  double update(double accept, double target) {
    ++counter;
    const double m = counter;
    h_bar = (1.0 - 1.0 / (m + t0)) * h_bar + (target - accept) / (m + t0);
    log_eps = mu - std::sqrt(m) / gamma * h_bar;
    const double w = std::pow(m, -kappa);
    log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
    return std::exp(log_eps);
  }
};

ChainResult Sampler::run(std::span<const double> init) {
  PhasePoint z;
  z.x.assign(init.begin(), init.end());
  z.p.assign(dim_, 0.0);
  z.grad.assign(dim_, 0.0);
  z.logp = target_.logp_grad(z.x, z.grad);
  if (!std::isfinite(z.logp))
    throw NumericError("nuts: initial point has non-finite log density");

  // Warmup phase boundaries.
  int init_buf = opts_.init_buffer, term_buf = opts_.term_buffer, base_win = opts_.base_window;
  const int warmup = opts_.warmup;
  if (warmup < init_buf + term_buf + base_win) {
    init_buf = static_cast<int>(0.15 * warmup);
    term_buf = static_cast<int>(0.10 * warmup);
    base_win = std::max(0, warmup - init_buf - term_buf);
  }
  // End iterations (exclusive) of each expanding covariance window.
  std::vector<int> window_ends;
  if (opts_.adapt_mass && base_win > 0) {
    int start = init_buf, size = base_win;
    while (start < warmup - term_buf) {
      int end = start + size;
      if (end + 2 * size > warmup - term_buf) end = warmup - term_buf;  // absorb remainder
      window_ends.push_back(end);
      start = end;
      size *= 2;
    }
  }

  const bool adapt_eps = !(opts_.fixed_stepsize > 0);
  double eps = adapt_eps ? find_initial_stepsize(z) : opts_.fixed_stepsize;
  DualAveraging da;
  da.restart(eps);
  Welford acc;
  acc.reset(dim_);
  std::size_t next_window = 0;

  ChainResult result;
  result.draws.reserve(static_cast<std::size_t>(opts_.samples));
  result.stats.reserve(static_cast<std::size_t>(opts_.samples));

  for (int it = 0; it < warmup; ++it) {
    const auto ts = transition(z, eps);
    if (ts.divergent) ++result.warmup_divergences;
    if (adapt_eps) eps = da.update(ts.accept_stat, opts_.target_accept);

    const bool in_slow = !window_ends.empty() && it >= init_buf &&
                         it < window_ends.back();
    if (in_slow) acc.add(z.x);
    if (next_window < window_ends.size() && it + 1 == window_ends[next_window]) {
      // Regularized variance estimate -> new diagonal metric.
      const double n = static_cast<double>(acc.n);
      for (std::size_t i = 0; i < dim_; ++i) {
        const double var = acc.n > 1 ? acc.m2[i] / (n - 1) : 1.0;
        inv_mass_[i] = n / (n + 5.0) * var + 1e-3 * (5.0 / (n + 5.0));
      }
      acc.reset(dim_);
      ++next_window;
      // Re-center the averaging for the next window. After the last metric
      // update the averaging keeps running into the tail phase: restarting
      // there leaves too few iterations for the average to settle.
      if (adapt_eps && next_window < window_ends.size()) da.restart(eps);
    }
  }
  if (warmup > 0 && adapt_eps) eps = std::exp(da.log_eps_bar);

  for (int it = 0; it < opts_.samples; ++it) {
    auto ts = transition(z, eps);
    if (ts.divergent) ++result.divergences;
    result.draws.push_back(z.x);
    result.stats.push_back(ts);
  }
  result.inv_mass = inv_mass_;
  result.stepsize = eps;
  return result;
}

}  // namespace

ChainResult run_nuts_chain(const LogDensityTarget& target, std::span<const double> init,
                           const NutsOptions& options, Rng& rng) {
  Sampler s(target, options, rng);
  return s.run(init);
}

}  // namespace epifit
