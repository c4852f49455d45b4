#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace spreadmc {

/// Parameter rejection carrying a stable violation name (e.g. "NonPositiveVol")
/// in addition to a human-readable message.
class ValidationError : public std::runtime_error {
public:
  ValidationError(std::string name, const std::string& detail)
      : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Raised when a Monte Carlo estimate degenerates (non-finite value, or a
/// finite-difference bump too small for the requested sensitivity).
class NumericalError : public std::runtime_error {
public:
  NumericalError(std::string name, const std::string& detail)
      : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

// Weights divide by sqrt(1-rho^2); 0.999 caps the amplification near 22x.
inline constexpr double kMaxAbsCorrelation = 0.999;

/// Static contract and market inputs for the two-asset spread option.
/// All rates and vols are annualized, maturity is in years; no day-count
/// conventions. strike = 0 is allowed (exchange option).
struct MarketParams {
  double x1 = 100.0;    ///< initial price of asset 1 (> 0)
  double x2 = 100.0;    ///< initial price of asset 2 (> 0)
  double sigma1 = 0.2;  ///< volatility of asset 1 (> 0)
  double sigma2 = 0.2;  ///< volatility of asset 2 (> 0)
  double rho = 0.0;     ///< driver correlation, |rho| <= 0.999
  double r = 0.0;       ///< risk-free rate
  double q1 = 0.0;      ///< dividend yield of asset 1 (>= 0)
  double q2 = 0.0;      ///< dividend yield of asset 2 (>= 0)
  double strike = 0.0;  ///< exercise price K (>= 0)
  double maturity = 1.0;///< T in years (> 0)

  bool operator==(const MarketParams&) const = default;
};

/// Stochastic-volatility extension: a mean-reverting square-root variance
/// factor dV = kappa (1 - V) dt + nu sqrt(V) dZ shared by both assets.
struct SvParams {
  MarketParams base;
  double kappa = 1.0;       ///< mean-reversion speed (> 0)
  double nu = 0.3;          ///< vol of variance (> 0)
  double v0 = 1.0;          ///< initial variance factor (> 0)
  std::size_t n_steps = 252;///< Euler grid size (>= 1)

  /// True when 2 kappa < nu^2: the variance may touch zero and the
  /// engine's flooring will engage.
  bool feller_warning() const noexcept { return 2.0 * kappa < nu * nu; }

  bool operator==(const SvParams&) const = default;
};

enum class ModelKind { gbm, sv };

/// Per-path terminal values and accumulated stochastic integrals consumed by
/// the Malliavin weights. The first eight fields match the binary dump record
/// layout; the remaining fields extend it (Vega weights, diagnostics).
/// w1T/w2T and the dW integrals are taken against the INDEPENDENT drivers.
struct DriverSummary {
  double w1T = 0.0;
  double w2T = 0.0;
  double s1T = 0.0;
  double s2T = 0.0;
  double int_dW1_over_sqrtV = 0.0;
  double int_dW2_over_sqrtV = 0.0;
  double int_dt_over_V = 0.0;
  double int_sqrtV_dt = 0.0;
  // extensions
  double int_dt_over_sqrtV = 0.0;
  double int_sqrtV_dW1 = 0.0;
  double int_sqrtV_dW2 = 0.0;
  double int_V_dt = 0.0;
  double vT = 1.0;
};

inline constexpr std::size_t kDriverSummaryFields = 13;

/// The six Malliavin weights evaluated on one path.
struct WeightSet {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double vega1 = 0.0;
  double vega2 = 0.0;
};

enum class Greek { delta1, delta2, gamma1, gamma2, vega1, vega2 };

inline constexpr Greek kAllGreeks[] = {Greek::delta1, Greek::delta2,
                                       Greek::gamma1, Greek::gamma2,
                                       Greek::vega1,  Greek::vega2};

inline const char* to_string(Greek g) {
  switch (g) {
    case Greek::delta1: return "delta1";
    case Greek::delta2: return "delta2";
    case Greek::gamma1: return "gamma1";
    case Greek::gamma2: return "gamma2";
    case Greek::vega1: return "vega1";
    case Greek::vega2: return "vega2";
  }
  return "?";
}

enum class EstimatorTag { price, malliavin, localized, finite_diff };

inline const char* to_string(EstimatorTag t) {
  switch (t) {
    case EstimatorTag::price: return "price";
    case EstimatorTag::malliavin: return "malliavin";
    case EstimatorTag::localized: return "localized";
    case EstimatorTag::finite_diff: return "finite_diff";
  }
  return "?";
}

/// Monte Carlo aggregate for one estimator: point estimate, standard error
/// of the mean and the symmetric 95% confidence interval.
struct GreekEstimate {
  double value = 0.0;
  double std_err = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_paths = 0;
  EstimatorTag estimator_tag = EstimatorTag::price;
};

inline MarketParams validate(const MarketParams& p) {
  if (!(p.x1 > 0.0)) throw ValidationError("NonPositiveSpot", "x1 must be > 0");
  if (!(p.x2 > 0.0)) throw ValidationError("NonPositiveSpot", "x2 must be > 0");
  if (!(p.sigma1 > 0.0))
    throw ValidationError("NonPositiveVol", "sigma1 must be > 0");
  if (!(p.sigma2 > 0.0))
    throw ValidationError("NonPositiveVol", "sigma2 must be > 0");
  if (!(p.rho >= -kMaxAbsCorrelation && p.rho <= kMaxAbsCorrelation))
    throw ValidationError("CorrelationOutOfRange",
                          "|rho| must be <= " + std::to_string(kMaxAbsCorrelation));
  if (!(p.q1 >= 0.0) || !(p.q2 >= 0.0))
    throw ValidationError("NegativeDividend", "q1, q2 must be >= 0");
  if (!(p.strike >= 0.0))
    throw ValidationError("NegativeStrike", "strike must be >= 0");
  if (!(p.maturity > 0.0))
    throw ValidationError("NonPositiveMaturity", "maturity must be > 0");
  return p;
}

inline SvParams validate(const SvParams& p) {
  validate(p.base);
  if (!(p.kappa > 0.0))
    throw ValidationError("NonPositiveKappa", "kappa must be > 0");
  if (!(p.nu > 0.0)) throw ValidationError("NonPositiveNu", "nu must be > 0");
  if (!(p.v0 > 0.0)) throw ValidationError("NonPositiveV0", "v0 must be > 0");
  if (p.n_steps < 1)
    throw ValidationError("ZeroSteps", "n_steps must be >= 1");
  return p;
}

}  // namespace spreadmc
