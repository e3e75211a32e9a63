#include "epifit/seir.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epifit/errors.hpp"

namespace epifit {

CompartmentState ode_rhs(const CompartmentState& y, double beta, double vax_inflow,
                         const RateParams& p, double population) {
  const double inf = beta * y.S * (y.I1 + y.I2) / population;
  const double vax = p.rho * vax_inflow;
  CompartmentState d;
  d.S = -inf - vax;
  d.E1 = inf - p.gamma1 * y.E1;
  d.E2 = p.gamma1 * (y.E1 - y.E2);
  d.I1 = p.gamma1 * y.E2 - p.gamma2 * y.I1;
  d.I2 = p.gamma2 * (y.I1 - y.I2);
  d.R = p.gamma2 * y.I2 + vax;
  return d;
}

CompartmentState initial_state(double population, double seed_size) {
  if (!(seed_size > 0) || !(seed_size < population))
    throw std::domain_error("initial_state: seed_size must lie in (0, N)");
  CompartmentState y;
  y.S = population - seed_size;
  y.E1 = 0.5 * seed_size;
  y.E2 = 0.5 * seed_size;
  return y;
}

namespace {

inline StateVec rhs_pc(const StateVec& x, double beta, double g1, double g2, double w) {
  const double inf = beta * x[0] * (x[3] + x[4]);
  return {-inf - w,
          inf - g1 * x[1],
          g1 * (x[1] - x[2]),
          g1 * x[2] - g2 * x[3],
          g2 * (x[3] - x[4]),
          g2 * x[4] + w};
}

inline double max_abs_diff(const StateVec& a, const StateVec& b) {
  double m = 0;
  for (int i = 0; i < 6; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// x^T J where J is the RHS Jacobian at node x (w drops out).
inline StateVec jac_t_mul(const StateVec& x, const StateVec& mu, double beta, double g1,
                          double g2) {
  const double i_sum = x[3] + x[4];
  const double d_inf = mu[1] - mu[0];  // adjoint weight of the infection flux
  return {beta * i_sum * d_inf,
          g1 * (mu[2] - mu[1]),
          g1 * (mu[3] - mu[2]),
          beta * x[0] * d_inf + g2 * (mu[4] - mu[3]),
          beta * x[0] * d_inf + g2 * (mu[5] - mu[4]),
          0.0};
}

}  // namespace

bool seir_step_day(StateVec& state, double beta, double g1, double g2, double vax_sink,
                   int substeps, double& new_infections, std::vector<StateVec>* nodes) {
  const double h = 1.0 / substeps;
  new_infections = 0;
  if (nodes) {
    nodes->clear();
    nodes->push_back(state);
  }
  StateVec x = state;
  for (int k = 0; k < substeps; ++k) {
    const StateVec f0 = rhs_pc(x, beta, g1, g2, vax_sink);
    StateVec base, next;
    for (int i = 0; i < 6; ++i) {
      base[i] = x[i] + 0.5 * h * f0[i];
      next[i] = x[i] + h * f0[i];  // explicit predictor
    }
    bool converged = false;
    for (int it = 0; it < kFixedPointMaxIter; ++it) {
      const StateVec f1 = rhs_pc(next, beta, g1, g2, vax_sink);
      StateVec cand;
      for (int i = 0; i < 6; ++i) cand[i] = base[i] + 0.5 * h * f1[i];
      const double delta = max_abs_diff(cand, next);
      next = cand;
      if (delta <= kFixedPointTol) {
        converged = true;
        break;
      }
    }
    if (!converged) return false;
    for (int i = 0; i < 6; ++i) {
      if (next[i] < 0) {
        if (next[i] <= kNegativeSlack) return false;
        next[i] = 0;
      }
      if (!std::isfinite(next[i])) return false;
    }
    new_infections += 0.5 * h * g1 * (x[2] + next[2]);
    x = next;
    if (nodes) nodes->push_back(x);
  }
  state = x;
  return true;
}

void seir_day_adjoint(const std::vector<StateVec>& nodes, double beta, double g1, double g2,
                      int substeps, StateVec& lambda, double incidence_bar, double& beta_bar,
                      double& g1_bar, double& g2_bar) {
  const double h = 1.0 / substeps;
  for (int k = substeps - 1; k >= 0; --k) {
    const StateVec& x0 = nodes[static_cast<std::size_t>(k)];
    const StateVec& x1 = nodes[static_cast<std::size_t>(k) + 1];

    // Incidence term touching the right endpoint and gamma1.
    lambda[2] += incidence_bar * 0.5 * h * g1;
    g1_bar += incidence_bar * 0.5 * h * (x0[2] + x1[2]);

    // Solve mu = lambda + (h/2) J(x1)^T mu at the converged substep.
    StateVec mu = lambda;
    for (int it = 0; it < 200; ++it) {
      const StateVec jt = jac_t_mul(x1, mu, beta, g1, g2);
      StateVec cand;
      double delta = 0, scale = 0;
      for (int i = 0; i < 6; ++i) {
        cand[i] = lambda[i] + 0.5 * h * jt[i];
        delta = std::max(delta, std::abs(cand[i] - mu[i]));
        scale = std::max(scale, std::abs(cand[i]));
      }
      mu = cand;
      if (delta <= 1e-13 * std::max(1.0, scale)) break;
    }

    // Parameter sensitivities of the averaged right-hand side.
    const double dinf = mu[1] - mu[0];
    beta_bar += 0.5 * h * dinf * (x0[0] * (x0[3] + x0[4]) + x1[0] * (x1[3] + x1[4]));
    g1_bar += 0.5 * h * ((-x0[1]) * mu[1] + (x0[1] - x0[2]) * mu[2] + x0[2] * mu[3] +
                         (-x1[1]) * mu[1] + (x1[1] - x1[2]) * mu[2] + x1[2] * mu[3]);
    g2_bar += 0.5 * h * ((-x0[3]) * mu[3] + (x0[3] - x0[4]) * mu[4] + x0[4] * mu[5] +
                         (-x1[3]) * mu[3] + (x1[3] - x1[4]) * mu[4] + x1[4] * mu[5]);

    // Pull back to the left endpoint.
    const StateVec jt0 = jac_t_mul(x0, mu, beta, g1, g2);
    for (int i = 0; i < 6; ++i) lambda[i] = mu[i] + 0.5 * h * jt0[i];
    lambda[2] += incidence_bar * 0.5 * h * g1;
  }
}

DayStepResult integrate_day(const CompartmentState& state, double beta, double vax_inflow,
                            const RateParams& params, double population, int substeps,
                            int day_label) {
  if (substeps < 1) throw std::invalid_argument("integrate_day: substeps must be >= 1");
  StateVec x = {state.S / population,  state.E1 / population, state.E2 / population,
                state.I1 / population, state.I2 / population, state.R / population};
  double inc = 0;
  const double vax_sink = params.rho * vax_inflow / population;
  if (!seir_step_day(x, beta, params.gamma1, params.gamma2, vax_sink, substeps, inc, nullptr))
    throw IntegratorError("integrate_day: trapezoidal step failed", day_label);
  DayStepResult out;
  out.state = {x[0] * population, x[1] * population, x[2] * population,
               x[3] * population, x[4] * population, x[5] * population};
  out.new_infections = inc * population;
  return out;
}

// ---- SIR reduction ----------------------------------------------------------

namespace {

inline StateVec4 sir_rhs_pc(const StateVec4& x, double beta, double g2, double w) {
  const double inf = beta * x[0] * (x[1] + x[2]);
  return {-inf - w, inf - g2 * x[1], g2 * (x[1] - x[2]), g2 * x[2] + w};
}

inline StateVec4 sir_jac_t_mul(const StateVec4& x, const StateVec4& mu, double beta,
                               double g2) {
  const double i_sum = x[1] + x[2];
  const double d_inf = mu[1] - mu[0];
  return {beta * i_sum * d_inf,
          beta * x[0] * d_inf + g2 * (mu[2] - mu[1]),
          beta * x[0] * d_inf + g2 * (mu[3] - mu[2]),
          0.0};
}

}  // namespace

bool sir_step_day(StateVec4& state, double beta, double g2, double vax_sink, int substeps,
                  double& new_infections, std::vector<StateVec4>* nodes) {
  const double h = 1.0 / substeps;
  new_infections = 0;
  if (nodes) {
    nodes->clear();
    nodes->push_back(state);
  }
  StateVec4 x = state;
  for (int k = 0; k < substeps; ++k) {
    const StateVec4 f0 = sir_rhs_pc(x, beta, g2, vax_sink);
    StateVec4 base, next;
    for (int i = 0; i < 4; ++i) {
      base[i] = x[i] + 0.5 * h * f0[i];
      next[i] = x[i] + h * f0[i];
    }
    bool converged = false;
    for (int it = 0; it < kFixedPointMaxIter; ++it) {
      const StateVec4 f1 = sir_rhs_pc(next, beta, g2, vax_sink);
      StateVec4 cand;
      double delta = 0;
      for (int i = 0; i < 4; ++i) {
        cand[i] = base[i] + 0.5 * h * f1[i];
        delta = std::max(delta, std::abs(cand[i] - next[i]));
      }
      next = cand;
      if (delta <= kFixedPointTol) {
        converged = true;
        break;
      }
    }
    if (!converged) return false;
    for (int i = 0; i < 4; ++i) {
      if (next[i] < 0) {
        if (next[i] <= kNegativeSlack) return false;
        next[i] = 0;
      }
      if (!std::isfinite(next[i])) return false;
    }
    // New infections are the flux into I1.
    new_infections += 0.5 * h * beta * (x[0] * (x[1] + x[2]) + next[0] * (next[1] + next[2]));
    x = next;
    if (nodes) nodes->push_back(x);
  }
  state = x;
  return true;
}

void sir_day_adjoint(const std::vector<StateVec4>& nodes, double beta, double g2, int substeps,
                     StateVec4& lambda, double incidence_bar, double& beta_bar,
                     double& g2_bar) {
  const double h = 1.0 / substeps;
  for (int k = substeps - 1; k >= 0; --k) {
    const StateVec4& x0 = nodes[static_cast<std::size_t>(k)];
    const StateVec4& x1 = nodes[static_cast<std::size_t>(k) + 1];

    // Right-endpoint incidence term: d(inc)/d(x1) and d(inc)/d(beta).
    const double w_inc = incidence_bar * 0.5 * h;
    lambda[0] += w_inc * beta * (x1[1] + x1[2]);
    lambda[1] += w_inc * beta * x1[0];
    lambda[2] += w_inc * beta * x1[0];
    beta_bar += w_inc * x1[0] * (x1[1] + x1[2]);

    StateVec4 mu = lambda;
    for (int it = 0; it < 200; ++it) {
      const StateVec4 jt = sir_jac_t_mul(x1, mu, beta, g2);
      StateVec4 cand;
      double delta = 0, scale = 0;
      for (int i = 0; i < 4; ++i) {
        cand[i] = lambda[i] + 0.5 * h * jt[i];
        delta = std::max(delta, std::abs(cand[i] - mu[i]));
        scale = std::max(scale, std::abs(cand[i]));
      }
      mu = cand;
      if (delta <= 1e-13 * std::max(1.0, scale)) break;
    }

    const double dinf = mu[1] - mu[0];
    beta_bar += 0.5 * h * dinf * (x0[0] * (x0[1] + x0[2]) + x1[0] * (x1[1] + x1[2]));
    g2_bar += 0.5 * h * ((-x0[1]) * mu[1] + (x0[1] - x0[2]) * mu[2] + x0[2] * mu[3] +
                         (-x1[1]) * mu[1] + (x1[1] - x1[2]) * mu[2] + x1[2] * mu[3]);

    const StateVec4 jt0 = sir_jac_t_mul(x0, mu, beta, g2);
    for (int i = 0; i < 4; ++i) lambda[i] = mu[i] + 0.5 * h * jt0[i];
    lambda[0] += w_inc * beta * (x0[1] + x0[2]);
    lambda[1] += w_inc * beta * x0[0];
    lambda[2] += w_inc * beta * x0[0];
    beta_bar += w_inc * x0[0] * (x0[1] + x0[2]);
  }
}

}  // namespace epifit
