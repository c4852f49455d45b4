#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spreadmc/oracles.hpp"

using namespace spreadmc;

namespace {

MarketParams anchor_params() {
  MarketParams p;
  p.x1 = 100.0;
  p.x2 = 110.0;
  p.sigma1 = 0.2;
  p.sigma2 = 0.3;
  p.rho = 0.5;
  p.r = 0.05;
  p.strike = 0.0;
  p.maturity = 1.0;
  return p;
}

// Exchange-option price by 1d quadrature: condition on the driver of asset 1,
// integrate the conditional lognormal call on asset 2 in closed form. This
// route never touches the margrabe() implementation.
double exchange_price_quadrature(const MarketParams& p) {
  const double T = p.maturity;
  const double sT = std::sqrt(T);
  const double rc = std::sqrt(1.0 - p.rho * p.rho);
  auto integrand = [&](double z1) {
    const double s1 = p.x1 * std::exp((p.r - p.q1 - 0.5 * p.sigma1 * p.sigma1) * T +
                                      p.sigma1 * sT * z1);
    // conditional on z1, log S2 ~ N(mu2, v2)
    const double mu2 = std::log(p.x2) +
                       (p.r - p.q2 - 0.5 * p.sigma2 * p.sigma2) * T +
                       p.sigma2 * sT * p.rho * z1;
    const double v2 = p.sigma2 * p.sigma2 * T * rc * rc;
    const double sd2 = std::sqrt(v2);
    const double k = s1;  // conditional strike (K = 0 exchange)
    const double d1 = (mu2 + v2 - std::log(k)) / sd2;
    const double d2 = d1 - sd2;
    const double call = std::exp(mu2 + 0.5 * v2) * norm_cdf(d1) -
                        k * norm_cdf(d2);
    return call * norm_pdf(z1);
  };
  // Simpson over z1 in [-12, 12]
  const int n = 4000;  // even
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / n;
  double acc = integrand(lo) + integrand(hi);
  for (int i = 1; i < n; ++i)
    acc += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return std::exp(-p.r * T) * acc * h / 3.0;
}

// Lognormal call by quadrature from the at-the-money point upward (the
// integrand is smooth there), independent of black_scholes_call().
double bs_call_quadrature(double x, double sigma, double r, double q,
                          double strike, double T) {
  const double sT = sigma * std::sqrt(T);
  const double mu = std::log(x) + (r - q) * T - 0.5 * sT * sT;
  const double zstar = (std::log(strike) - mu) / sT;
  auto integrand = [&](double z) {
    return (std::exp(mu + sT * z) - strike) * norm_pdf(z);
  };
  const double lo = zstar, hi = zstar + 14.0;
  const int n = 4000;
  const double h = (hi - lo) / n;
  double acc = integrand(lo) + integrand(hi);
  for (int i = 1; i < n; ++i)
    acc += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return std::exp(-r * T) * acc * h / 3.0;
}

}  // namespace

TEST_CASE("margrabe: anchor value against independent quadrature") {
  const MarketParams p = anchor_params();
  const OracleResult res = margrabe(p);
  REQUIRE(res.price.has_value());
  // reference evaluated independently before wiring: 16.755106743888796
  CHECK_THAT(*res.price,
             Catch::Matchers::WithinAbs(16.755106743888796, 1e-8));
  CHECK_THAT(*res.price,
             Catch::Matchers::WithinAbs(exchange_price_quadrature(p), 1e-6));
}

TEST_CASE("margrabe: frozen greeks at the anchor") {
  const OracleResult res = margrabe(anchor_params());
  CHECK_THAT(*res.delta1,
             Catch::Matchers::WithinAbs(-0.5901578537165937, 1e-12));
  CHECK_THAT(*res.delta2,
             Catch::Matchers::WithinAbs(0.6888262919595287, 1e-12));
  CHECK_THAT(*res.gamma1,
             Catch::Matchers::WithinAbs(0.014691891411172114, 1e-14));
  CHECK_THAT(*res.gamma2,
             Catch::Matchers::WithinAbs(0.012142059017497615, 1e-14));
  CHECK_THAT(*res.vega1, Catch::Matchers::WithinAbs(7.34594570558606, 1e-10));
  CHECK_THAT(*res.vega2,
             Catch::Matchers::WithinAbs(29.383782822344227, 1e-10));
}

TEST_CASE("margrabe: homogeneity in the spots") {
  const MarketParams p = anchor_params();
  for (double lam : {0.5, 2.0}) {
    MarketParams q = p;
    q.x1 *= lam;
    q.x2 *= lam;
    CHECK_THAT(*margrabe(q).price,
               Catch::Matchers::WithinRel(lam * *margrabe(p).price, 1e-10));
  }
}

TEST_CASE("margrabe: analytic greeks match finite differences of the closed form") {
  MarketParams p = anchor_params();
  p.q1 = 0.01;
  p.q2 = 0.03;
  const OracleResult res = margrabe(p);
  const double h = 1e-6;

  auto bump = [&](double MarketParams::*field, double rel) {
    MarketParams q = p;
    q.*field *= (1.0 + rel);
    return *margrabe(q).price;
  };

  const double d1_fd = (bump(&MarketParams::x1, h) - bump(&MarketParams::x1, -h)) /
                       (2.0 * h * p.x1);
  const double d2_fd = (bump(&MarketParams::x2, h) - bump(&MarketParams::x2, -h)) /
                       (2.0 * h * p.x2);
  CHECK_THAT(*res.delta1, Catch::Matchers::WithinAbs(d1_fd, 1e-6));
  CHECK_THAT(*res.delta2, Catch::Matchers::WithinAbs(d2_fd, 1e-6));

  const double hg = 1e-4;
  const double g1_fd = (bump(&MarketParams::x1, hg) - 2.0 * *res.price +
                        bump(&MarketParams::x1, -hg)) /
                       (hg * p.x1 * hg * p.x1);
  const double g2_fd = (bump(&MarketParams::x2, hg) - 2.0 * *res.price +
                        bump(&MarketParams::x2, -hg)) /
                       (hg * p.x2 * hg * p.x2);
  CHECK_THAT(*res.gamma1, Catch::Matchers::WithinAbs(g1_fd, 1e-6));
  CHECK_THAT(*res.gamma2, Catch::Matchers::WithinAbs(g2_fd, 1e-6));

  const double v1_fd = (bump(&MarketParams::sigma1, h) -
                        bump(&MarketParams::sigma1, -h)) /
                       (2.0 * h * p.sigma1);
  const double v2_fd = (bump(&MarketParams::sigma2, h) -
                        bump(&MarketParams::sigma2, -h)) /
                       (2.0 * h * p.sigma2);
  CHECK_THAT(*res.vega1, Catch::Matchers::WithinAbs(v1_fd, 1e-6));
  CHECK_THAT(*res.vega2, Catch::Matchers::WithinAbs(v2_fd, 1e-6));
}

TEST_CASE("margrabe: deep in the money") {
  MarketParams p = anchor_params();
  p.x1 = 1.0;
  p.x2 = 1000.0;
  const OracleResult res = margrabe(p);
  CHECK_THAT(*res.price, Catch::Matchers::WithinRel(p.x2 - p.x1, 1e-6));
  CHECK_THAT(*res.delta2, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("margrabe: rejects nonzero strike and degenerate volatility") {
  MarketParams p = anchor_params();
  p.strike = 5.0;
  CHECK_THROWS_AS(margrabe(p), ValidationError);

  MarketParams d = anchor_params();
  d.x1 = d.x2 = 100.0;
  d.sigma1 = d.sigma2 = 0.2;
  d.rho = 1.0;  // sigma_spread = 0
  try {
    margrabe(d);
    FAIL("expected DegenerateVol");
  } catch (const ValidationError& e) {
    CHECK(e.name() == "DegenerateVol");
  }
}

TEST_CASE("black-scholes call: value against quadrature of the lognormal") {
  const double value = *black_scholes_call(110.0, 0.3, 0.05, 0.0, 10.0, 1.0).price;
  // reference evaluated independently before wiring: 100.48770575499286
  CHECK_THAT(value, Catch::Matchers::WithinAbs(100.48770575499286, 1e-8));
  CHECK_THAT(value, Catch::Matchers::WithinAbs(
                        bs_call_quadrature(110.0, 0.3, 0.05, 0.0, 10.0, 1.0),
                        1e-6));
}

TEST_CASE("black-scholes call: limits") {
  // K -> 0 gives the dividend-discounted forward
  CHECK_THAT(*black_scholes_call(110.0, 0.3, 0.05, 0.02, 0.0, 1.0).price,
             Catch::Matchers::WithinRel(110.0 * std::exp(-0.02), 1e-12));
  // vanishing volatility, in the money: discounted forward minus strike
  const double fwd = 110.0 * std::exp(0.05);
  CHECK_THAT(*black_scholes_call(110.0, 1e-9, 0.05, 0.0, 50.0, 1.0).price,
             Catch::Matchers::WithinRel(std::exp(-0.05) * (fwd - 50.0), 1e-9));
}

TEST_CASE("black-scholes call: greeks match finite differences") {
  const double x = 110.0, sig = 0.3, r = 0.05, q = 0.01, K = 90.0, T = 2.0;
  const OracleResult res = black_scholes_call(x, sig, r, q, K, T);
  const double h = 1e-5;
  auto price = [&](double xx, double ss) {
    return *black_scholes_call(xx, ss, r, q, K, T).price;
  };
  CHECK_THAT(*res.delta2,
             Catch::Matchers::WithinAbs(
                 (price(x + h, sig) - price(x - h, sig)) / (2.0 * h), 1e-6));
  const double hg = 1e-3;  // wider step: the second difference amplifies
                           // rounding noise by 1/h^2
  CHECK_THAT(*res.gamma2,
             Catch::Matchers::WithinAbs(
                 (price(x + hg, sig) - 2.0 * price(x, sig) +
                  price(x - hg, sig)) /
                     (hg * hg),
                 1e-6));
  CHECK_THAT(*res.vega2,
             Catch::Matchers::WithinAbs(
                 (price(x, sig + h) - price(x, sig - h)) / (2.0 * h), 1e-6));
}

TEST_CASE("kirk: reduces to margrabe at zero strike") {
  const MarketParams p = anchor_params();
  CHECK_THAT(*kirk_approx(p).price,
             Catch::Matchers::WithinAbs(*margrabe(p).price, 1e-12));
}

TEST_CASE("kirk: single-vol limit is a call on the second asset") {
  MarketParams p = anchor_params();
  p.strike = 10.0;
  p.sigma1 = 1e-14;
  const double kirk = *kirk_approx(p).price;
  const double strike_eff =
      p.x1 * std::exp((p.r - p.q1) * p.maturity) + p.strike;
  const double bs = *black_scholes_call(p.x2, p.sigma2, p.r, p.q2, strike_eff,
                                        p.maturity)
                         .price;
  CHECK_THAT(kirk, Catch::Matchers::WithinRel(bs, 1e-9));
}

TEST_CASE("kirk: price only") {
  MarketParams p = anchor_params();
  p.strike = 10.0;
  const OracleResult res = kirk_approx(p);
  CHECK(res.price.has_value());
  CHECK_FALSE(res.delta1.has_value());
  CHECK_FALSE(res.vega2.has_value());
}
