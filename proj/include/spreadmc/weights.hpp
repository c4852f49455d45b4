#pragma once

#include <cmath>

#include "spreadmc/types.hpp"

namespace spreadmc {

/// Evaluates the six Malliavin weights from a path summary. Both models share
/// one functional form; the GBM case is the constant-variance reduction
/// (all V-integrals collapse to their deterministic values).
///
/// With the independent-driver integrals
///   I_i = int dW~i / sqrt(V),  J = int dt / V,
///   M_i = int sqrt(V) dW_i (asset drivers),  Q = int V dt,
/// the weights are
///   delta1 = ( I1 - rho I2 / sqrt(1-rho^2) ) / (sigma1 x1 T)
///   delta2 =   I2 / ( sigma2 sqrt(1-rho^2) x2 T )
///   gamma_i = delta_i^2 - delta_i / x_i - J / (T^2 sigma_i^2 x_i^2 (1-rho^2))
///   vega_i  = ( M_i - sigma_i Q ) x_i delta_i - 1 / sigma_i
/// They are the exact score functionals of the simulated (left-endpoint
/// Euler) dynamics, so they match common-random-number finite differences up
/// to O(bump^2) for any grid size.
inline WeightSet weights_from_summary(const DriverSummary& s,
                                      const MarketParams& p) {
  const double T = p.maturity;
  const double rho_c2 = 1.0 - p.rho * p.rho;
  const double rho_c = std::sqrt(rho_c2);

  const double i1 = s.int_dW1_over_sqrtV;
  const double i2 = s.int_dW2_over_sqrtV;
  const double j = s.int_dt_over_V;
  const double q = s.int_V_dt;
  const double m1 = s.int_sqrtV_dW1;
  const double m2 = p.rho * s.int_sqrtV_dW1 + rho_c * s.int_sqrtV_dW2;

  WeightSet w;
  w.delta1 = (i1 - p.rho * i2 / rho_c) / (p.sigma1 * p.x1 * T);
  w.delta2 = i2 / (p.sigma2 * rho_c * p.x2 * T);
  w.gamma1 = w.delta1 * w.delta1 - w.delta1 / p.x1 -
             j / (T * T * p.sigma1 * p.sigma1 * p.x1 * p.x1 * rho_c2);
  w.gamma2 = w.delta2 * w.delta2 - w.delta2 / p.x2 -
             j / (T * T * p.sigma2 * p.sigma2 * p.x2 * p.x2 * rho_c2);
  w.vega1 = (m1 - p.sigma1 * q) * p.x1 * w.delta1 - 1.0 / p.sigma1;
  w.vega2 = (m2 - p.sigma2 * q) * p.x2 * w.delta2 - 1.0 / p.sigma2;
  return w;
}

/// Weights for a summary produced by gbm_terminal.
inline WeightSet gbm_weights(const DriverSummary& s, const MarketParams& p) {
  return weights_from_summary(s, p);
}

/// Weights for a summary produced by sv_path.
inline WeightSet sv_weights(const DriverSummary& s, const SvParams& p) {
  return weights_from_summary(s, p.base);
}

inline double weight(const WeightSet& w, Greek g) {
  switch (g) {
    case Greek::delta1: return w.delta1;
    case Greek::delta2: return w.delta2;
    case Greek::gamma1: return w.gamma1;
    case Greek::gamma2: return w.gamma2;
    case Greek::vega1: return w.vega1;
    case Greek::vega2: return w.vega2;
  }
  return 0.0;
}

}  // namespace spreadmc
