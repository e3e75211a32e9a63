#pragma once

// Test-only reference integrator: classical RK4 at a fine fixed step on the
// SEIR system augmented with cumulative incidence (dC/dt = gamma1 * E2). Kept
// independent of the library's trapezoidal path so it can serve as an oracle.

#include <array>
#include <cmath>

namespace testsupport {

using Aug = std::array<double, 7>;  // S, E1, E2, I1, I2, R, C

struct Rk4DayResult {
  std::array<double, 6> state;
  double new_infections;
};

inline Aug seir_aug_rhs(const Aug& y, double beta, double g1, double g2, double vax_sink,
                        double N) {
  const double inf = beta * y[0] * (y[3] + y[4]) / N;
  return {-inf - vax_sink,
          inf - g1 * y[1],
          g1 * (y[1] - y[2]),
          g1 * y[2] - g2 * y[3],
          g2 * (y[3] - y[4]),
          g2 * y[4] + vax_sink,
          g1 * y[2]};
}

inline Aug rk4_step(const Aug& y, double beta, double g1, double g2, double vax_sink, double N,
                    double h) {
  const Aug k1 = seir_aug_rhs(y, beta, g1, g2, vax_sink, N);
  Aug tmp;
  for (int i = 0; i < 7; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  const Aug k2 = seir_aug_rhs(tmp, beta, g1, g2, vax_sink, N);
  for (int i = 0; i < 7; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  const Aug k3 = seir_aug_rhs(tmp, beta, g1, g2, vax_sink, N);
  for (int i = 0; i < 7; ++i) tmp[i] = y[i] + h * k3[i];
  const Aug k4 = seir_aug_rhs(tmp, beta, g1, g2, vax_sink, N);
  Aug out;
  for (int i = 0; i < 7; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

// One day in person units; vax_sink is already efficacy-scaled (persons/day).
inline Rk4DayResult rk4_day(std::array<double, 6> state, double beta, double g1, double g2,
                            double vax_sink, double N, double h) {
  const int steps = static_cast<int>(std::llround(1.0 / h));
  Aug y = {state[0], state[1], state[2], state[3], state[4], state[5], 0.0};
  for (int s = 0; s < steps; ++s) y = rk4_step(y, beta, g1, g2, vax_sink, N, h);
  return {{y[0], y[1], y[2], y[3], y[4], y[5]}, y[6]};
}

}  // namespace testsupport
