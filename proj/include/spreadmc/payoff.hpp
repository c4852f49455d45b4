#pragma once

#include <algorithm>
#include <cmath>

#include "spreadmc/types.hpp"

namespace spreadmc {

/// Localization band half-width around the strike.
struct LocalizationSpec {
  double a = 1.0;  ///< band half-width (> 0)
};

inline LocalizationSpec validate(const LocalizationSpec& s) {
  if (!(s.a > 0.0))
    throw ValidationError("NonPositiveBandWidth",
                          "localization half-width must be > 0");
  return s;
}

/// Proportional to the strike, with a price-scale fallback for exchange
/// options (K = 0).
inline double default_band_width(const MarketParams& p) {
  return 0.1 * std::max(p.strike, (p.x1 + p.x2) / 20.0);
}

/// Spread call payoff (s2 - s1 - K)^+ on raw terminal values; discounting
/// lives in the estimator.
inline double spread_call(double s1, double s2, double strike) {
  return std::max(s2 - s1 - strike, 0.0);
}

/// Lipschitz ramp approximation H_a of the Heaviside step in the spread:
/// 0 below K-a, linear on [K-a, K+a], 1 above K+a.
inline double heaviside_smooth(double s1, double s2, double strike,
                               const LocalizationSpec& spec) {
  const double spread = s2 - s1;
  if (spread < strike - spec.a) return 0.0;
  if (spread > strike + spec.a) return 1.0;
  return (spread - (strike - spec.a)) / (2.0 * spec.a);
}

/// Derivative of H_a in the spread variable: 1/(2a) on the band, 0 outside.
inline double heaviside_density(double s1, double s2, double strike,
                                const LocalizationSpec& spec) {
  const double spread = s2 - s1;
  if (spread < strike - spec.a || spread > strike + spec.a) return 0.0;
  return 1.0 / (2.0 * spec.a);
}

/// Smooth payoff h_a with h_a' = H_a (in the spread variable): 0 below the
/// band, quadratic on it, and the plain spread payoff above.
inline double smoothed_payoff(double s1, double s2, double strike,
                              const LocalizationSpec& spec) {
  const double spread = s2 - s1;
  if (spread < strike - spec.a) return 0.0;
  if (spread > strike + spec.a) return spread - strike;
  const double d = spread - (strike - spec.a);
  return d * d / (4.0 * spec.a);
}

/// Residual Phi_a = payoff - h_a; supported on [K-a, K+a], |Phi_a| <= a/4.
inline double residual_payoff(double s1, double s2, double strike,
                              const LocalizationSpec& spec) {
  return spread_call(s1, s2, strike) - smoothed_payoff(s1, s2, strike, spec);
}

}  // namespace spreadmc
