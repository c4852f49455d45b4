#pragma once

#include <cmath>
#include <optional>

#include "spreadmc/types.hpp"

namespace spreadmc {

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Closed-form reference values. Fields are empty when the oracle does not
/// provide them (e.g. Kirk is price-only).
struct OracleResult {
  std::optional<double> price;
  std::optional<double> delta1;
  std::optional<double> delta2;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::optional<double> vega1;
  std::optional<double> vega2;

  std::optional<double> greek(Greek g) const {
    switch (g) {
      case Greek::delta1: return delta1;
      case Greek::delta2: return delta2;
      case Greek::gamma1: return gamma1;
      case Greek::gamma2: return gamma2;
      case Greek::vega1: return vega1;
      case Greek::vega2: return vega2;
    }
    return std::nullopt;
  }
};

/// Margrabe exchange-option formula (K = 0) under bivariate lognormal
/// dynamics, with Greeks by exact differentiation of the closed form.
inline OracleResult margrabe(const MarketParams& p) {
  if (p.strike != 0.0)
    throw ValidationError("StrikeNotZero",
                          "margrabe oracle requires strike = 0");
  const double T = p.maturity;
  const double sig2 = p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2 -
                      2.0 * p.rho * p.sigma1 * p.sigma2;
  if (!(sig2 > 1e-24))
    throw ValidationError("DegenerateVol", "spread volatility is zero");
  const double sig = std::sqrt(sig2);
  const double st = sig * std::sqrt(T);
  const double dp =
      (std::log(p.x2 / p.x1) + (p.q1 - p.q2 + 0.5 * sig2) * T) / st;
  const double dm = dp - st;
  const double df1 = std::exp(-p.q1 * T);
  const double df2 = std::exp(-p.q2 * T);

  OracleResult res;
  res.price = p.x2 * df2 * norm_cdf(dp) - p.x1 * df1 * norm_cdf(dm);
  res.delta1 = -df1 * norm_cdf(dm);
  res.delta2 = df2 * norm_cdf(dp);
  res.gamma1 = df1 * norm_pdf(dm) / (p.x1 * st);
  res.gamma2 = df2 * norm_pdf(dp) / (p.x2 * st);
  // dP/dsig = x2 e^{-q2 T} n(d+) sqrt(T), then chain through
  // sig(sigma1, sigma2).
  const double vega_sig = p.x2 * df2 * norm_pdf(dp) * std::sqrt(T);
  res.vega1 = vega_sig * (p.sigma1 - p.rho * p.sigma2) / sig;
  res.vega2 = vega_sig * (p.sigma2 - p.rho * p.sigma1) / sig;
  return res;
}

/// Standard discounted-lognormal call on a single asset. Greeks are reported
/// in the asset-2 slots, matching the degenerate x1 -> 0 reduction where the
/// spread option collapses to a call on the second asset.
inline OracleResult black_scholes_call(double x, double sigma, double r,
                                       double q, double strike,
                                       double maturity) {
  OracleResult res;
  const double df = std::exp(-r * maturity);
  const double fwd = x * std::exp((r - q) * maturity);
  const double st = sigma * std::sqrt(maturity);
  if (strike <= 0.0) {
    res.price = df * fwd;
    res.delta2 = std::exp(-q * maturity);
    res.gamma2 = 0.0;
    res.vega2 = 0.0;
    return res;
  }
  if (st < 1e-14) {
    res.price = df * std::max(fwd - strike, 0.0);
    res.delta2 = fwd > strike ? std::exp(-q * maturity) : 0.0;
    res.gamma2 = 0.0;
    res.vega2 = 0.0;
    return res;
  }
  const double d1 = (std::log(x / strike) +
                     (r - q + 0.5 * sigma * sigma) * maturity) / st;
  const double d2 = d1 - st;
  res.price = x * std::exp(-q * maturity) * norm_cdf(d1) -
              strike * df * norm_cdf(d2);
  res.delta2 = std::exp(-q * maturity) * norm_cdf(d1);
  res.gamma2 = std::exp(-q * maturity) * norm_pdf(d1) / (x * st);
  res.vega2 = x * std::exp(-q * maturity) * norm_pdf(d1) * std::sqrt(maturity);
  return res;
}

/// Kirk's lognormal approximation for the nonzero-strike spread option.
/// Price only, APPROXIMATE (sanity bands, never tight assertions); exact at
/// K = 0 where it reduces to Margrabe.
inline OracleResult kirk_approx(const MarketParams& p) {
  const double T = p.maturity;
  const double f1 = p.x1 * std::exp(-p.q1 * T);
  const double denom = f1 + p.strike * std::exp(-p.r * T);
  const double f = f1 / denom;
  const double sig_eff2 = p.sigma2 * p.sigma2 -
                          2.0 * p.rho * p.sigma1 * p.sigma2 * f +
                          p.sigma1 * p.sigma1 * f * f;
  if (!(sig_eff2 > 1e-24))
    throw ValidationError("DegenerateVol", "effective volatility is zero");
  const double st = std::sqrt(sig_eff2 * T);
  const double fwd2 = p.x2 * std::exp((p.r - p.q2) * T);
  const double fwd1k = p.x1 * std::exp((p.r - p.q1) * T) + p.strike;
  const double d1 = (std::log(fwd2 / fwd1k) + 0.5 * sig_eff2 * T) / st;
  const double d2 = d1 - st;
  OracleResult res;
  res.price =
      std::exp(-p.r * T) * (fwd2 * norm_cdf(d1) - fwd1k * norm_cdf(d2));
  return res;
}

}  // namespace spreadmc
