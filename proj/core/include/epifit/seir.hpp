#pragma once

#include <array>
#include <vector>

namespace epifit {

// Person counts, possibly fractional.
struct CompartmentState {
  double S = 0, E1 = 0, E2 = 0, I1 = 0, I2 = 0, R = 0;
  double sum() const { return S + E1 + E2 + I1 + I2 + R; }
};

struct RateParams {
  double gamma1 = 1.0;       // latency-stage exit rate (two stages)
  double gamma2 = 0.4;       // infectious-stage exit rate (two stages)
  double rho = 0.5;          // vaccine efficacy
  int vaccine_lag_days = 45; // U: days from first dose to protection
};

// Eq-of-motion for the two-stage SEIR with a vaccination leak on S -> R.
// vax_inflow is the lagged first-dose count nu_{t-U} in persons/day; the
// efficacy factor rho is applied here.
CompartmentState ode_rhs(const CompartmentState& state, double beta, double vax_inflow,
                         const RateParams& params, double population);

// S = N - seed, E1 = E2 = seed/2. Throws std::domain_error unless 0 < seed < N.
CompartmentState initial_state(double population, double seed_size);

struct DayStepResult {
  CompartmentState state;
  double new_infections = 0;  // integral of gamma1 * E2 over the day
};

// Advance one day with the implicit trapezoidal rule (fixed-point solve per
// substep). beta and vax_inflow are held constant within the day. Throws
// IntegratorError carrying day_label when a substep fails to converge or a
// compartment drops below the numerical slack.
DayStepResult integrate_day(const CompartmentState& state, double beta, double vax_inflow,
                            const RateParams& params, double population, int substeps,
                            int day_label = 0);

// ---- per-capita fast path (used by the posterior evaluation) ---------------
//
// States are fractions of the population: all tolerances below are on that
// scale, which keeps the fixed-point stopping rule meaningful for any N.

using StateVec = std::array<double, 6>;  // S, E1, E2, I1, I2, R

inline constexpr double kFixedPointTol = 1e-10;
inline constexpr int kFixedPointMaxIter = 50;
inline constexpr double kNegativeSlack = -1e-9;

// One day of substeps. vax_sink is rho * nu_{t-U} as a population fraction
// per day. When nodes != nullptr the K+1 substep states are recorded for the
// adjoint pass. Returns false on non-convergence or slack violation.
bool seir_step_day(StateVec& state, double beta, double gamma1, double gamma2,
                   double vax_sink, int substeps, double& new_infections,
                   std::vector<StateVec>* nodes);

// Reverse-mode pass over one recorded day. lambda enters as d(loss)/d(end
// state) and leaves as d(loss)/d(start state); incidence_bar is d(loss)/d(day
// incidence). Parameter adjoints accumulate into *_bar. The implicit substep
// is differentiated at its converged point by iterating the transposed
// linearized equation (implicit-function rule).
void seir_day_adjoint(const std::vector<StateVec>& nodes, double beta, double gamma1,
                      double gamma2, int substeps, StateVec& lambda, double incidence_bar,
                      double& beta_bar, double& gamma1_bar, double& gamma2_bar);

// ---- SIR reduction (warm-start model): S -> I1 -> I2 -> R ------------------

using StateVec4 = std::array<double, 4>;

bool sir_step_day(StateVec4& state, double beta, double gamma2, double vax_sink,
                  int substeps, double& new_infections, std::vector<StateVec4>* nodes);

void sir_day_adjoint(const std::vector<StateVec4>& nodes, double beta, double gamma2,
                     int substeps, StateVec4& lambda, double incidence_bar,
                     double& beta_bar, double& gamma2_bar);

}  // namespace epifit
