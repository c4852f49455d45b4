#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spreadmc/path_engine.hpp"
#include "spreadmc/rng.hpp"

using namespace spreadmc;

namespace {

struct ScriptedSource {
  std::vector<double> values;
  std::size_t i = 0;
  double operator()() { return values.at(i++); }
};

MarketParams market() {
  MarketParams p;
  p.x1 = 100.0;
  p.x2 = 110.0;
  p.sigma1 = 0.2;
  p.sigma2 = 0.3;
  p.rho = 0.5;
  p.r = 0.05;
  p.q1 = 0.01;
  p.q2 = 0.02;
  p.strike = 10.0;
  p.maturity = 1.0;
  return p;
}

}  // namespace

TEST_CASE("path grid: uniform spacing from 0 to T") {
  const PathGrid g(4, 2.0);
  CHECK(g.time(0) == 0.0);
  CHECK_THAT(g.dt, Catch::Matchers::WithinRel(0.5, 1e-15));
  CHECK_THAT(g.time(4), Catch::Matchers::WithinRel(2.0, 1e-15));
}

TEST_CASE("gbm terminal: zero-noise path hits the drifted forward") {
  const MarketParams p = market();
  ScriptedSource z{{0.0, 0.0}};
  const DriverSummary s = gbm_terminal(p, z);
  CHECK_THAT(s.s1T, Catch::Matchers::WithinRel(
                        p.x1 * std::exp((p.r - p.q1 - 0.02) * p.maturity),
                        1e-14));
  CHECK_THAT(s.s2T, Catch::Matchers::WithinRel(
                        p.x2 * std::exp((p.r - p.q2 - 0.045) * p.maturity),
                        1e-14));
  // constant-variance reductions
  CHECK(s.int_dW1_over_sqrtV == s.w1T);
  CHECK(s.int_dW2_over_sqrtV == s.w2T);
  CHECK(s.int_dt_over_V == p.maturity);
  CHECK(s.int_sqrtV_dt == p.maturity);
  CHECK(s.int_dt_over_sqrtV == p.maturity);
  CHECK(s.int_V_dt == p.maturity);
  CHECK(s.vT == 1.0);
}

TEST_CASE("gbm terminal: with rho = 0, asset 2 ignores the first driver") {
  MarketParams p = market();
  p.rho = 0.0;
  ScriptedSource za{{1.7, 0.0}};
  ScriptedSource zb{{-0.4, 0.0}};
  const DriverSummary a = gbm_terminal(p, za);
  const DriverSummary b = gbm_terminal(p, zb);
  CHECK(a.s2T == b.s2T);
  CHECK(a.s1T != b.s1T);
}

TEST_CASE("gbm terminal: discounted price is a martingale") {
  MarketParams p = market();
  p.q1 = 0.0;
  const std::uint64_t n = 1000000;
  NormalStream stream(batch_stream_seed(SeedSpec{11, 1}, 0));
  double sum = 0.0, sum2 = 0.0;
  const double df = std::exp(-p.r * p.maturity);
  for (std::uint64_t i = 0; i < n; ++i) {
    const DriverSummary s = gbm_terminal(p, stream);
    const double v = df * s.s1T;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / double(n);
  const double se =
      std::sqrt((sum2 / double(n) - mean * mean) / double(n - 1));
  CHECK(std::fabs(mean - p.x1) <= 3.0 * se);
}

TEST_CASE("gbm terminal: correlation of the asset drivers is recovered") {
  const MarketParams p = market();
  const std::uint64_t n = 200000;
  NormalStream stream(batch_stream_seed(SeedSpec{5, 1}, 0));
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const DriverSummary s = gbm_terminal(p, stream);
    const double a1 = s.w1T;
    const double a2 = p.rho * s.w1T + std::sqrt(1.0 - p.rho * p.rho) * s.w2T;
    s11 += a1 * a1;
    s22 += a2 * a2;
    s12 += a1 * a2;
  }
  const double corr = s12 / std::sqrt(s11 * s22);
  CHECK(std::fabs(corr - p.rho) <= 3.0 / std::sqrt(double(n)));
}

TEST_CASE("sv path: zero increments with v0 = 1 sit at the fixed point") {
  SvParams p;
  p.base = market();
  p.v0 = 1.0;
  p.n_steps = 16;
  struct {
    double operator()() { return 0.0; }
  } zero;
  const DriverSummary s = sv_path(p, zero);
  CHECK_THAT(s.vT, Catch::Matchers::WithinAbs(1.0, 1e-15));
  CHECK_THAT(s.int_dt_over_V,
             Catch::Matchers::WithinRel(p.base.maturity, 1e-12));
  CHECK_THAT(s.int_sqrtV_dt,
             Catch::Matchers::WithinRel(p.base.maturity, 1e-12));
  CHECK_THAT(s.int_V_dt, Catch::Matchers::WithinRel(p.base.maturity, 1e-12));
  CHECK(s.w1T == 0.0);
  CHECK(s.int_dW1_over_sqrtV == 0.0);
}

TEST_CASE("sv path: degenerate variance reproduces gbm on the same normals") {
  SvParams p;
  p.base = market();
  p.nu = 1e-12;
  p.v0 = 1.0;
  p.n_steps = 1;  // one step makes the increment sums coincide exactly
  const double z1 = 0.83, z2 = -1.21;
  ScriptedSource zsv{{z1, z2, 0.4}};  // third draw feeds the variance factor
  ScriptedSource zgbm{{z1, z2}};
  const DriverSummary sv = sv_path(p, zsv);
  const DriverSummary gbm = gbm_terminal(p.base, zgbm);

  CHECK_THAT(sv.w1T, Catch::Matchers::WithinRel(gbm.w1T, 1e-12));
  CHECK_THAT(sv.w2T, Catch::Matchers::WithinRel(gbm.w2T, 1e-12));
  CHECK_THAT(sv.int_dW1_over_sqrtV,
             Catch::Matchers::WithinRel(gbm.int_dW1_over_sqrtV, 1e-9));
  CHECK_THAT(sv.int_dt_over_V,
             Catch::Matchers::WithinRel(gbm.int_dt_over_V, 1e-9));
  CHECK_THAT(sv.int_sqrtV_dt,
             Catch::Matchers::WithinRel(gbm.int_sqrtV_dt, 1e-9));
  CHECK_THAT(sv.s1T, Catch::Matchers::WithinRel(gbm.s1T, 1e-9));
  CHECK_THAT(sv.s2T, Catch::Matchers::WithinRel(gbm.s2T, 1e-9));
}

TEST_CASE("sv path: integrated variance matches the mean-reversion closed form") {
  SvParams p;
  p.base = market();
  p.kappa = 1.0;
  p.nu = 0.3;
  p.v0 = 1.0;
  p.n_steps = 252;
  const double T = p.base.maturity;
  // E[V(t)] = 1 + (v0 - 1) e^{-kappa t}, integrated over [0, T]
  const double target =
      T * (1.0 + (p.v0 - 1.0) * (1.0 - std::exp(-p.kappa * T)) / (p.kappa * T));

  const std::uint64_t n = 50000;
  NormalStream stream(batch_stream_seed(SeedSpec{17, 1}, 0));
  double sum = 0.0, sum2 = 0.0, sum_sqrt = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const DriverSummary s = sv_path(p, stream);
    sum += s.int_V_dt;
    sum2 += s.int_V_dt * s.int_V_dt;
    sum_sqrt += s.int_sqrtV_dt;
  }
  const double mean = sum / double(n);
  const double se =
      std::sqrt((sum2 / double(n) - mean * mean) / double(n - 1));
  CHECK(std::fabs(mean - target) <= 3.0 * se + 1e-3);  // O(dt) Euler slack
  // Jensen: E[int sqrt(V) dt] <= T for v0 = 1 (E[V] = 1 along the path)
  CHECK(sum_sqrt / double(n) <= T);
}

TEST_CASE("sv path: terminal variance mean matches the CIR moment") {
  SvParams p;
  p.base = market();
  p.kappa = 1.0;
  p.nu = 0.3;
  p.v0 = 1.5;
  p.n_steps = 128;
  const double target =
      1.0 + (p.v0 - 1.0) * std::exp(-p.kappa * p.base.maturity);
  const std::uint64_t n = 40000;
  NormalStream stream(batch_stream_seed(SeedSpec{23, 1}, 0));
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const DriverSummary s = sv_path(p, stream);
    sum += s.vT;
    sum2 += s.vT * s.vT;
  }
  const double mean = sum / double(n);
  const double se =
      std::sqrt((sum2 / double(n) - mean * mean) / double(n - 1));
  CHECK(std::fabs(mean - target) <= 3.0 * se + 2e-3);
}

TEST_CASE("sv path: flooring engages under a violated Feller condition") {
  SvParams p;
  p.base = market();
  p.kappa = 0.05;
  p.nu = 3.0;
  p.v0 = 0.02;
  p.n_steps = 64;
  REQUIRE(p.feller_warning());
  PathDiagnostics diag;
  NormalStream stream(batch_stream_seed(SeedSpec{31, 1}, 0));
  bool all_finite = true;
  for (int i = 0; i < 2000; ++i) {
    const DriverSummary s = sv_path(p, stream, &diag);
    all_finite = all_finite && std::isfinite(s.s1T) && std::isfinite(s.s2T) &&
                 std::isfinite(s.int_dt_over_V) &&
                 std::isfinite(s.int_dt_over_sqrtV);
  }
  CHECK(all_finite);
  CHECK(diag.floor_hits > 0);
}

TEST_CASE("engine determinism: identical seeds give identical paths") {
  const MarketParams p = market();
  NormalStream a(batch_stream_seed(SeedSpec{77, 1}, 3));
  NormalStream b(batch_stream_seed(SeedSpec{77, 1}, 3));
  for (int i = 0; i < 50; ++i) {
    const DriverSummary sa = gbm_terminal(p, a);
    const DriverSummary sb = gbm_terminal(p, b);
    REQUIRE(sa.s1T == sb.s1T);
    REQUIRE(sa.s2T == sb.s2T);
    REQUIRE(sa.w1T == sb.w1T);
  }
}
