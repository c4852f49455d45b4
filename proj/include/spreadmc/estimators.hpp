#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "spreadmc/oracles.hpp"
#include "spreadmc/path_engine.hpp"
#include "spreadmc/payoff.hpp"
#include "spreadmc/rng.hpp"
#include "spreadmc/stats.hpp"
#include "spreadmc/types.hpp"
#include "spreadmc/weights.hpp"

namespace spreadmc {

/// Relative bump sizes for the finite-difference estimators, chosen so FD
/// noise under common random numbers stays below the Malliavin standard
/// error at 1e6 paths.
struct FdBumps {
  double delta = 1e-2;
  double gamma = 5e-2;
  double vega = 1e-2;
};

using ModelParams = std::variant<MarketParams, SvParams>;

/// One Monte Carlo experiment: model, sample count, seeding, variance
/// reduction switches and finite-difference bumps. n_paths counts
/// statistical samples; in antithetic mode each sample averages a (Z, -Z)
/// pair of paths.
struct RunSpec {
  ModelParams model;
  std::uint64_t n_paths = 100000;
  SeedSpec seed;
  bool antithetic = false;
  std::optional<LocalizationSpec> localization;
  FdBumps fd_bumps;
  int n_threads = 1;  ///< <= 0 selects the available hardware parallelism

  ModelKind kind() const {
    return std::holds_alternative<SvParams>(model) ? ModelKind::sv
                                                   : ModelKind::gbm;
  }

  const MarketParams& market() const {
    if (const auto* sv = std::get_if<SvParams>(&model)) return sv->base;
    return std::get<MarketParams>(model);
  }
};

inline RunSpec validate(const RunSpec& spec) {
  std::visit([](const auto& m) { validate(m); }, spec.model);
  if (spec.n_paths < 2)
    throw ValidationError("BadPathCount", "n_paths must be >= 2");
  if (spec.seed.batch_size < 1)
    throw ValidationError("BadBatchSize", "batch_size must be >= 1");
  for (double b : {spec.fd_bumps.delta, spec.fd_bumps.gamma, spec.fd_bumps.vega})
    if (!(b > 0.0 && b < 0.5))
      throw ValidationError("BumpOutOfRange", "fd bumps must lie in (0, 0.5)");
  if (spec.localization) validate(*spec.localization);
  return spec;
}

/// Payoff selection for the estimators. `unit` (constant 1) and `forward2`
/// (terminal price of asset 2) are diagnostic hooks used by the zero-mean
/// and forward-identity checks.
enum class PayoffKind { spread, unit, forward2 };

namespace detail {

inline constexpr std::size_t kMaxOutputs = 16;

struct McRunResult {
  std::vector<MomentAccumulator> acc;
  PathDiagnostics diag;
};

inline int resolve_threads(int n_threads) {
  if (n_threads > 0) return n_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Batch-parallel map-reduce over Monte Carlo units. Every batch owns a
/// private stream derived from (master_seed, batch index); partial moments
/// are merged in batch-index order, so the result is bit-identical for any
/// worker count.
///
/// UnitFn: void(DrawBuffer&, double sign, PathDiagnostics&, double* out).
template <class UnitFn>
McRunResult mc_run(const SeedSpec& seed, std::uint64_t n_units,
                   bool antithetic, int n_threads, std::size_t n_outputs,
                   const UnitFn& unit) {
  const std::uint64_t bs = std::max<std::uint32_t>(1, seed.batch_size);
  const std::uint64_t n_batches = (n_units + bs - 1) / bs;
  std::vector<std::vector<MomentAccumulator>> partial(n_batches);
  std::vector<PathDiagnostics> partial_diag(n_batches);
  std::atomic<std::uint64_t> next{0};

  auto worker = [&]() {
    std::array<double, kMaxOutputs> v{};
    std::array<double, kMaxOutputs> v_anti{};
    for (;;) {
      const std::uint64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_batches) return;
      NormalStream stream(batch_stream_seed(seed, b));
      DrawBuffer buf(stream);
      auto& acc = partial[b];
      acc.assign(n_outputs, MomentAccumulator{});
      PathDiagnostics diag;
      const std::uint64_t lo = b * bs;
      const std::uint64_t hi = std::min(n_units, lo + bs);
      for (std::uint64_t u = lo; u < hi; ++u) {
        buf.next_unit();
        unit(buf, 1.0, diag, v.data());
        if (antithetic) {
          unit(buf, -1.0, diag, v_anti.data());
          for (std::size_t i = 0; i < n_outputs; ++i)
            v[i] = 0.5 * (v[i] + v_anti[i]);
        }
        for (std::size_t i = 0; i < n_outputs; ++i) acc[i].add(v[i]);
      }
      partial_diag[b] = diag;
    }
  };

  const int workers = std::min<std::uint64_t>(
      static_cast<std::uint64_t>(resolve_threads(n_threads)),
      std::max<std::uint64_t>(1, n_batches));
  std::vector<std::thread> pool;
  pool.reserve(workers > 1 ? workers - 1 : 0);
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  McRunResult res;
  res.acc.assign(n_outputs, MomentAccumulator{});
  for (std::uint64_t b = 0; b < n_batches; ++b) {
    for (std::size_t i = 0; i < n_outputs; ++i) res.acc[i].merge(partial[b][i]);
    res.diag.merge(partial_diag[b]);
  }
  return res;
}

inline DriverSummary sample_path(const ModelParams& model,
                                 DrawBuffer::Cursor cur,
                                 PathDiagnostics& diag) {
  if (const auto* sv = std::get_if<SvParams>(&model))
    return sv_path(*sv, cur, &diag);
  return gbm_terminal(std::get<MarketParams>(model), cur);
}

inline double payoff_value(const DriverSummary& s, const MarketParams& m,
                           PayoffKind kind) {
  switch (kind) {
    case PayoffKind::spread: return spread_call(s.s1T, s.s2T, m.strike);
    case PayoffKind::unit: return 1.0;
    case PayoffKind::forward2: return s.s2T;
  }
  return 0.0;
}

inline ModelParams with_market(const ModelParams& model,
                               const MarketParams& m) {
  if (const auto* sv = std::get_if<SvParams>(&model)) {
    SvParams out = *sv;
    out.base = m;
    return out;
  }
  return m;
}

inline void check_finite(const GreekEstimate& e, const char* what) {
  if (!std::isfinite(e.value) || !std::isfinite(e.std_err))
    throw NumericalError("NonFiniteEstimate", what);
}

}  // namespace detail

/// Discounted mean of the spread payoff over n_paths samples.
inline GreekEstimate estimate_price(const RunSpec& spec,
                                    PayoffKind payoff = PayoffKind::spread) {
  const MarketParams& m = spec.market();
  const double df = std::exp(-m.r * m.maturity);
  auto res = detail::mc_run(
      spec.seed, spec.n_paths, spec.antithetic, spec.n_threads, 1,
      [&](DrawBuffer& buf, double sign, PathDiagnostics& diag, double* out) {
        const DriverSummary s =
            detail::sample_path(spec.model, buf.draws(sign), diag);
        out[0] = df * detail::payoff_value(s, m, payoff);
      });
  auto est = make_estimate(res.acc[0], EstimatorTag::price);
  detail::check_finite(est, "price");
  return est;
}

/// Global Malliavin estimator: mean of e^{-rT} Phi(S1(T), S2(T)) w, with w
/// the selected weight.
inline GreekEstimate estimate_greek_malliavin(
    const RunSpec& spec, Greek which, PayoffKind payoff = PayoffKind::spread) {
  const MarketParams& m = spec.market();
  const double df = std::exp(-m.r * m.maturity);
  auto res = detail::mc_run(
      spec.seed, spec.n_paths, spec.antithetic, spec.n_threads, 1,
      [&](DrawBuffer& buf, double sign, PathDiagnostics& diag, double* out) {
        const DriverSummary s =
            detail::sample_path(spec.model, buf.draws(sign), diag);
        const WeightSet w = weights_from_summary(s, m);
        out[0] = df * detail::payoff_value(s, m, payoff) * weight(w, which);
      });
  auto est = make_estimate(res.acc[0], EstimatorTag::malliavin);
  detail::check_finite(est, "malliavin greek");
  return est;
}

namespace detail {

/// Direct (smooth) term of the localized estimator. The payoff band h_a
/// depends on s2 - s1, so the chain rule carries a minus sign for the
/// asset-1 spot derivative.
inline double localized_direct_term(const DriverSummary& s,
                                    const MarketParams& m,
                                    const LocalizationSpec& loc, Greek which,
                                    double direct_sign = 1.0) {
  const double h = heaviside_smooth(s.s1T, s.s2T, m.strike, loc);
  const double hp = heaviside_density(s.s1T, s.s2T, m.strike, loc);
  switch (which) {
    case Greek::delta1: return direct_sign * -h * (s.s1T / m.x1);
    case Greek::delta2: return direct_sign * h * (s.s2T / m.x2);
    case Greek::gamma1: return hp * (s.s1T / m.x1) * (s.s1T / m.x1);
    case Greek::gamma2: return hp * (s.s2T / m.x2) * (s.s2T / m.x2);
    default:
      throw ValidationError("UnsupportedGreek",
                            "localized estimator covers deltas and gammas");
  }
}

}  // namespace detail

/// Localized estimator: Malliavin weight applied to the residual payoff
/// Phi_a plus direct differentiation of the smooth part, summed per path on
/// the same samples (the standard error respects the covariance of the two
/// terms).
inline GreekEstimate estimate_greek_localized(const RunSpec& spec,
                                              Greek which) {
  if (!spec.localization)
    throw ValidationError("LocalizationMissing",
                          "localized estimator requires a localization spec");
  if (which == Greek::vega1 || which == Greek::vega2)
    throw ValidationError("UnsupportedGreek",
                          "localized estimator covers deltas and gammas");
  const MarketParams& m = spec.market();
  const LocalizationSpec loc = *spec.localization;
  const double df = std::exp(-m.r * m.maturity);
  auto res = detail::mc_run(
      spec.seed, spec.n_paths, spec.antithetic, spec.n_threads, 1,
      [&](DrawBuffer& buf, double sign, PathDiagnostics& diag, double* out) {
        const DriverSummary s =
            detail::sample_path(spec.model, buf.draws(sign), diag);
        const WeightSet w = weights_from_summary(s, m);
        const double residual = residual_payoff(s.s1T, s.s2T, m.strike, loc);
        out[0] = df * (residual * weight(w, which) +
                       detail::localized_direct_term(s, m, loc, which));
      });
  auto est = make_estimate(res.acc[0], EstimatorTag::localized);
  detail::check_finite(est, "localized greek");
  return est;
}

/// Central finite differences of the price under parameter bumps with common
/// random numbers: the bumped models replay identical normals path by path,
/// and the standard error is computed from the per-path differenced samples.
inline GreekEstimate estimate_greek_fd(const RunSpec& spec, Greek which,
                                       PayoffKind payoff = PayoffKind::spread) {
  const MarketParams& base = spec.market();
  const double df = std::exp(-base.r * base.maturity);

  const bool is_gamma = which == Greek::gamma1 || which == Greek::gamma2;
  const bool is_vega = which == Greek::vega1 || which == Greek::vega2;
  const bool asset1 = which == Greek::delta1 || which == Greek::gamma1 ||
                      which == Greek::vega1;
  const double rel = is_gamma ? spec.fd_bumps.gamma
                     : is_vega ? spec.fd_bumps.vega
                               : spec.fd_bumps.delta;

  MarketParams up = base, down = base;
  double h = 0.0;  // absolute bump
  if (is_vega) {
    const double s0 = asset1 ? base.sigma1 : base.sigma2;
    h = rel * s0;
    (asset1 ? up.sigma1 : up.sigma2) = s0 + h;
    (asset1 ? down.sigma1 : down.sigma2) = s0 - h;
  } else {
    const double x0 = asset1 ? base.x1 : base.x2;
    h = rel * x0;
    (asset1 ? up.x1 : up.x2) = x0 + h;
    (asset1 ? down.x1 : down.x2) = x0 - h;
  }
  const ModelParams model_up = detail::with_market(spec.model, up);
  const ModelParams model_down = detail::with_market(spec.model, down);

  const double denom = is_gamma ? h * h : 2.0 * h;
  auto res = detail::mc_run(
      spec.seed, spec.n_paths, spec.antithetic, spec.n_threads, 1,
      [&](DrawBuffer& buf, double sign, PathDiagnostics& diag, double* out) {
        const DriverSummary su =
            detail::sample_path(model_up, buf.draws(sign), diag);
        const DriverSummary sd =
            detail::sample_path(model_down, buf.draws(sign), diag);
        const double fu = df * detail::payoff_value(su, up, payoff);
        const double fd_ = df * detail::payoff_value(sd, down, payoff);
        if (is_gamma) {
          const DriverSummary sb =
              detail::sample_path(spec.model, buf.draws(sign), diag);
          const double fb = df * detail::payoff_value(sb, base, payoff);
          out[0] = (fu - 2.0 * fb + fd_) / denom;
        } else {
          out[0] = (fu - fd_) / denom;
        }
      });
  auto est = make_estimate(res.acc[0], EstimatorTag::finite_diff);
  detail::check_finite(est, "finite-difference greek");
  if (est.value != 0.0 && est.std_err > 10.0 * std::fabs(est.value))
    throw NumericalError("BumpTooSmall",
                         "finite-difference noise dominates the estimate");
  return est;
}

/// One line of a comparison or greeks report.
struct ReportRow {
  std::string greek;
  std::string method;
  GreekEstimate est;
  double variance = 0.0;
  std::int64_t wall_ms = 0;
  std::optional<double> variance_ratio;  ///< localized / global, localized rows
  std::optional<double> oracle;          ///< analytic reference when available
};

struct CompareMetadata {
  std::string localized_direct_sign = "negative";
  /// |localized - fd| / combined SE for delta1, under the adopted (negative)
  /// and the flipped (positive) direct-term sign.
  std::optional<double> sign_check_z_negative;
  std::optional<double> sign_check_z_positive;
  std::uint64_t floor_hits = 0;
  bool feller_warning = false;
};

struct CompareReport {
  std::vector<ReportRow> rows;
  CompareMetadata metadata;
};

namespace detail {

inline std::optional<OracleResult> attach_oracle(const RunSpec& spec) {
  if (spec.kind() != ModelKind::gbm) return std::nullopt;
  const MarketParams& m = spec.market();
  if (m.strike != 0.0) return std::nullopt;
  try {
    return margrabe(m);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

inline std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

/// Runs price, the six Malliavin greeks, the localized delta/gamma variants
/// and the finite-difference cross-checks on shared seeds, and reports one
/// row per estimate. Timings are recorded only when with_timings is set so
/// that reports stay byte-identical across re-runs and worker counts.
inline CompareReport compare_report(const RunSpec& spec_in,
                                    bool with_timings = false) {
  RunSpec spec = spec_in;
  if (!spec.localization)
    spec.localization = LocalizationSpec{default_band_width(spec.market())};
  validate(spec);

  const MarketParams& m = spec.market();
  const LocalizationSpec loc = *spec.localization;
  const double df = std::exp(-m.r * m.maturity);

  // Shared pass: price, six weights, four localized estimators and the
  // flipped-sign localized delta1 used for the sign certification.
  // Output layout: [0] price, [1..6] malliavin, [7..10] localized
  // (delta1, delta2, gamma1, gamma2), [11] localized delta1, flipped sign.
  constexpr std::size_t kPrice = 0, kMal = 1, kLoc = 7, kLocFlip = 11;
  const auto t0 = std::chrono::steady_clock::now();
  auto shared = detail::mc_run(
      spec.seed, spec.n_paths, spec.antithetic, spec.n_threads, 12,
      [&](DrawBuffer& buf, double sign, PathDiagnostics& diag, double* out) {
        const DriverSummary s =
            detail::sample_path(spec.model, buf.draws(sign), diag);
        const WeightSet w = weights_from_summary(s, m);
        const double phi = spread_call(s.s1T, s.s2T, m.strike);
        const double residual = residual_payoff(s.s1T, s.s2T, m.strike, loc);
        out[kPrice] = df * phi;
        for (std::size_t i = 0; i < 6; ++i)
          out[kMal + i] = df * phi * weight(w, kAllGreeks[i]);
        for (std::size_t i = 0; i < 4; ++i) {
          const Greek g = kAllGreeks[i];
          out[kLoc + i] =
              df * (residual * weight(w, g) +
                    detail::localized_direct_term(s, m, loc, g));
        }
        out[kLocFlip] =
            df * (residual * w.delta1 +
                  detail::localized_direct_term(s, m, loc, Greek::delta1,
                                                -1.0));
      });
  const std::int64_t shared_ms = with_timings ? detail::elapsed_ms(t0) : 0;

  const auto oracle = detail::attach_oracle(spec);
  CompareReport report;
  report.metadata.floor_hits = shared.diag.floor_hits;
  if (const auto* sv = std::get_if<SvParams>(&spec.model))
    report.metadata.feller_warning = sv->feller_warning();

  auto push_row = [&](const std::string& greek, const MomentAccumulator& acc,
                      EstimatorTag tag, std::int64_t ms,
                      std::optional<double> ratio,
                      std::optional<double> oracle_val) {
    ReportRow row;
    row.greek = greek;
    row.method = to_string(tag);
    row.est = make_estimate(acc, tag);
    detail::check_finite(row.est, "compare row");
    row.variance = acc.variance();
    row.wall_ms = ms;
    row.variance_ratio = ratio;
    row.oracle = oracle_val;
    report.rows.push_back(std::move(row));
  };

  push_row("price", shared.acc[kPrice], EstimatorTag::price, shared_ms,
           std::nullopt, oracle ? oracle->price : std::nullopt);

  std::array<GreekEstimate, 6> fd_est;
  std::array<std::int64_t, 6> fd_ms{};
  for (std::size_t i = 0; i < 6; ++i) {
    const auto tf = std::chrono::steady_clock::now();
    fd_est[i] = estimate_greek_fd(spec, kAllGreeks[i]);
    fd_ms[i] = with_timings ? detail::elapsed_ms(tf) : 0;
  }

  for (std::size_t i = 0; i < 6; ++i) {
    const Greek g = kAllGreeks[i];
    const std::optional<double> oracle_val =
        oracle ? oracle->greek(g) : std::nullopt;
    push_row(to_string(g), shared.acc[kMal + i], EstimatorTag::malliavin,
             shared_ms, std::nullopt, oracle_val);
    if (i < 4) {
      const double var_global = shared.acc[kMal + i].variance();
      const double var_local = shared.acc[kLoc + i].variance();
      const std::optional<double> ratio =
          var_global > 0.0 ? std::optional<double>(var_local / var_global)
                           : std::nullopt;
      push_row(to_string(g), shared.acc[kLoc + i], EstimatorTag::localized,
               shared_ms, ratio, oracle_val);
    }
    ReportRow row;
    row.greek = to_string(g);
    row.method = to_string(EstimatorTag::finite_diff);
    row.est = fd_est[i];
    // variance of the differenced per-path samples
    row.variance = fd_est[i].std_err * fd_est[i].std_err *
                   static_cast<double>(fd_est[i].n_paths);
    row.wall_ms = fd_ms[i];
    row.oracle = oracle_val;
    report.rows.push_back(std::move(row));
  }

  // Certify the localized direct-term sign for delta1 against the FD oracle.
  const auto loc_neg = make_estimate(shared.acc[kLoc], EstimatorTag::localized);
  const auto loc_pos =
      make_estimate(shared.acc[kLocFlip], EstimatorTag::localized);
  const auto& fd_d1 = fd_est[0];
  const double comb_neg = std::sqrt(loc_neg.std_err * loc_neg.std_err +
                                    fd_d1.std_err * fd_d1.std_err);
  const double comb_pos = std::sqrt(loc_pos.std_err * loc_pos.std_err +
                                    fd_d1.std_err * fd_d1.std_err);
  if (comb_neg > 0.0)
    report.metadata.sign_check_z_negative =
        std::fabs(loc_neg.value - fd_d1.value) / comb_neg;
  if (comb_pos > 0.0)
    report.metadata.sign_check_z_positive =
        std::fabs(loc_pos.value - fd_d1.value) / comb_pos;
  return report;
}

/// Writes the DriverSummary records the estimators would consume, in batch
/// order, as flat little-endian doubles (13 per record, spec fields first).
/// In antithetic mode both paths of each pair are written in order.
inline void dump_driver_summaries(const RunSpec& spec, std::ostream& os) {
  static_assert(std::endian::native == std::endian::little,
                "binary dump assumes a little-endian host");
  validate(spec);
  const std::uint64_t bs = std::max<std::uint32_t>(1, spec.seed.batch_size);
  const std::uint64_t n_batches = (spec.n_paths + bs - 1) / bs;
  PathDiagnostics diag;
  auto write_record = [&os](const DriverSummary& s) {
    const double fields[kDriverSummaryFields] = {
        s.w1T, s.w2T, s.s1T, s.s2T, s.int_dW1_over_sqrtV,
        s.int_dW2_over_sqrtV, s.int_dt_over_V, s.int_sqrtV_dt,
        s.int_dt_over_sqrtV, s.int_sqrtV_dW1, s.int_sqrtV_dW2, s.int_V_dt,
        s.vT};
    os.write(reinterpret_cast<const char*>(fields), sizeof(fields));
  };
  for (std::uint64_t b = 0; b < n_batches; ++b) {
    NormalStream stream(batch_stream_seed(spec.seed, b));
    DrawBuffer buf(stream);
    const std::uint64_t lo = b * bs;
    const std::uint64_t hi = std::min(spec.n_paths, lo + bs);
    for (std::uint64_t u = lo; u < hi; ++u) {
      buf.next_unit();
      write_record(detail::sample_path(spec.model, buf.draws(1.0), diag));
      if (spec.antithetic)
        write_record(detail::sample_path(spec.model, buf.draws(-1.0), diag));
    }
  }
}

}  // namespace spreadmc
