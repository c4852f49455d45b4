#pragma once

#include <cmath>
#include <cstdint>

#include "spreadmc/types.hpp"

namespace spreadmc {

// Floor applied to every variance value fed to sqrt or a division; the SV
// weights integrate 1/V, which is singular at zero.
inline constexpr double kVarianceFloor = 1e-12;

/// Uniform time grid t_k = k dt, k = 0..n_steps, t_{n_steps} = T.
struct PathGrid {
  std::size_t n_steps;
  double dt;

  PathGrid(std::size_t steps, double maturity)
      : n_steps(steps), dt(maturity / static_cast<double>(steps)) {}

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Per-run engine diagnostics, merged across batches.
struct PathDiagnostics {
  std::uint64_t floor_hits = 0;

  void merge(const PathDiagnostics& o) noexcept { floor_hits += o.floor_hits; }
};

/// Exact terminal sampling under GBM. Draws two independent normals
/// (Z1 then Z2); asset drivers are W1 = W~1 and W2 = rho W~1 +
/// sqrt(1-rho^2) W~2. The V-integrals take their constant-variance values.
template <class Source>
DriverSummary gbm_terminal(const MarketParams& p, Source&& z) {
  const double T = p.maturity;
  const double sqT = std::sqrt(T);
  const double w1 = sqT * z();
  const double w2 = sqT * z();
  const double a1 = w1;
  const double a2 = p.rho * w1 + std::sqrt(1.0 - p.rho * p.rho) * w2;

  DriverSummary s;
  s.w1T = w1;
  s.w2T = w2;
  s.s1T = p.x1 * std::exp((p.r - p.q1 - 0.5 * p.sigma1 * p.sigma1) * T +
                          p.sigma1 * a1);
  s.s2T = p.x2 * std::exp((p.r - p.q2 - 0.5 * p.sigma2 * p.sigma2) * T +
                          p.sigma2 * a2);
  s.int_dW1_over_sqrtV = w1;
  s.int_dW2_over_sqrtV = w2;
  s.int_dt_over_V = T;
  s.int_sqrtV_dt = T;
  s.int_dt_over_sqrtV = T;
  s.int_sqrtV_dW1 = w1;
  s.int_sqrtV_dW2 = w2;
  s.int_V_dt = T;
  s.vT = 1.0;
  return s;
}

/// Euler path under the stochastic-volatility model. Three independent
/// normal increments per step, drawn in the order (dW~1, dW~2, dZ).
/// Variance uses full-truncation Euler with flooring; all integrals are
/// accumulated with LEFT-endpoint (Ito) evaluation, which keeps the discrete
/// weight identities exact.
template <class Source>
DriverSummary sv_path(const SvParams& p, Source&& z,
                      PathDiagnostics* diag = nullptr) {
  const MarketParams& m = p.base;
  const PathGrid grid(p.n_steps, m.maturity);
  const double dt = grid.dt;
  const double sdt = std::sqrt(dt);
  const double rho_c = std::sqrt(1.0 - m.rho * m.rho);
  const double drift1 = (m.r - m.q1) * dt;
  const double drift2 = (m.r - m.q2) * dt;

  double v = p.v0;
  double log1 = 0.0, log2 = 0.0;
  double w1 = 0.0, w2 = 0.0;
  double i1 = 0.0, i2 = 0.0;
  double j = 0.0, a = 0.0, d = 0.0;
  double m1 = 0.0, m2 = 0.0, q = 0.0;
  std::uint64_t floor_hits = 0;

  for (std::size_t k = 0; k < p.n_steps; ++k) {
    const double dw1 = sdt * z();
    const double dw2 = sdt * z();
    const double dz = sdt * z();

    double vp = v;
    if (vp < kVarianceFloor) {
      vp = kVarianceFloor;
      ++floor_hits;
    }
    const double sq = std::sqrt(vp);
    const double da1 = dw1;
    const double da2 = m.rho * dw1 + rho_c * dw2;

    log1 += drift1 - 0.5 * m.sigma1 * m.sigma1 * vp * dt + m.sigma1 * sq * da1;
    log2 += drift2 - 0.5 * m.sigma2 * m.sigma2 * vp * dt + m.sigma2 * sq * da2;

    w1 += dw1;
    w2 += dw2;
    i1 += dw1 / sq;
    i2 += dw2 / sq;
    j += dt / vp;
    a += sq * dt;
    d += dt / sq;
    m1 += sq * dw1;
    m2 += sq * dw2;
    q += vp * dt;

    v = v + p.kappa * (1.0 - vp) * dt + p.nu * sq * dz;
  }

  if (diag != nullptr) diag->floor_hits += floor_hits;

  DriverSummary s;
  s.w1T = w1;
  s.w2T = w2;
  s.s1T = m.x1 * std::exp(log1);
  s.s2T = m.x2 * std::exp(log2);
  s.int_dW1_over_sqrtV = i1;
  s.int_dW2_over_sqrtV = i2;
  s.int_dt_over_V = j;
  s.int_sqrtV_dt = a;
  s.int_dt_over_sqrtV = d;
  s.int_sqrtV_dW1 = m1;
  s.int_sqrtV_dW2 = m2;
  s.int_V_dt = q;
  s.vT = v;
  return s;
}

}  // namespace spreadmc
