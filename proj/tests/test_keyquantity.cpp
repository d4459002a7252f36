#include "catch_amalgamated.hpp"

#include <cmath>

#include "deriloss/error.hpp"
#include "deriloss/keyquantity.hpp"
#include "deriloss/moduli.hpp"

using namespace deriloss;
using namespace deriloss::keyquantity;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {
moduli::ClassParams params(const std::string& om, const std::string& th) {
  moduli::ClassParams p;
  p.omega = moduli::parse_modulus(om);
  p.theta = moduli::parse_theta(th);
  return p;
}

// Independent oracle: dense grid minimization of A s + integral_s^T0 theta.
double brute_m(const moduli::ClassParams& p, double lambda, int n) {
  const double A = lambda * p.omega(1.0 / lambda);
  double best = A * p.T0;
  for (int i = 0; i < n; ++i) {
    const double s = p.T0 * std::pow(10.0, -12.0 + 12.0 * i / (n - 1));
    best = std::min(best, A * s + moduli::theta_integral(*p.theta, s, p.T0));
  }
  return best;
}
}  // namespace

TEST_CASE("linear omega with 1/t has its minimizer at T0") {
  const auto r = compute_m(params("linear", "power:1:1"), 1e6);
  CHECK_THAT(r.m, WithinRel(1.0, 1e-12));
  CHECK_THAT(r.s_star, WithinRel(1.0, 1e-12));
  CHECK_THAT(brute_m(params("linear", "power:1:1"), 1e6, 1000000), WithinRel(r.m, 1e-9));
}

TEST_CASE("holder 1/2 with 1/t at lambda 1e4") {
  const auto r = compute_m(params("holder:0.5", "power:1:1"), 1e4);
  CHECK_THAT(r.m, WithinRel(1.0 + 0.5 * std::log(1e4), 1e-10));
  CHECK_THAT(r.s_star, WithinRel(1e-2, 1e-10));
  CHECK_THAT(brute_m(params("holder:0.5", "power:1:1"), 1e4, 100000), WithinRel(r.m, 1e-6));
}

TEST_CASE("boundary minimum when theta never reaches A") {
  // bounded theta = 100 exceeds A = 1 everywhere: the minimizer sits at T0.
  const auto r = compute_m(params("linear", "bounded:100"), 1e3);
  CHECK(r.s_star == 1.0);
  CHECK(r.second_term == 0.0);
  CHECK_THAT(r.m, WithinRel(1.0, 1e-14));
}

TEST_CASE("result invariants over the catalog") {
  for (const auto& cp : moduli::catalog_pairs()) {
    const auto p = params(cp.omega_key, cp.theta_key);
    double prev = 0.0;
    for (double lambda : geometric_grid(1e2, 1e10, 17)) {
      const auto r = compute_m(p, lambda);
      INFO(cp.omega_key << "/" << cp.theta_key << " lambda=" << lambda);
      CHECK_THAT(r.first_term + r.second_term, WithinRel(r.m, 1e-10));
      CHECK(r.m <= r.A * p.T0 * (1 + 1e-12));
      CHECK((r.branch == Branch::Omega) == (r.first_term >= r.m / 2));
      CHECK(r.m >= prev * (1 - 1e-12));  // nondecreasing in lambda
      prev = r.m;
      if (r.branch == Branch::Theta) {
        REQUIRE(r.s_hat.has_value());
        const double I_star = moduli::theta_integral(*p.theta, r.s_star, p.T0);
        CHECK_THAT(moduli::theta_integral(*p.theta, *r.s_hat, p.T0), WithinRel(0.5 * I_star, 1e-8));
      }
    }
  }
}

TEST_CASE("non-finite A is a divergent objective") {
  moduli::ClassParams p;
  p.omega = moduli::ModulusSpec::custom([](double s) { return s > 0 ? std::numeric_limits<double>::infinity() : 0.0; },
                                        "inf");
  p.theta = moduli::ThetaSpec::power_law(1.0);
  CHECK_THROWS_MATCHES(compute_m(p, 10.0), Error, Catch::Matchers::Predicate<const Error&>([](const Error& e) {
                         return e.kind() == ErrorKind::DivergentObjective;
                       }));
}

TEST_CASE("regime examples") {
  const auto grid = geometric_grid(1e2, 1e9, 71);
  CHECK(classify_regime(params("linear", "bounded:1"), grid).regime == Regime::NoLoss);

  const auto f = classify_regime(params("holder:0.5", "power:1:1"), grid);
  CHECK(f.regime == Regime::Finite);
  REQUIRE(f.loss_bound.has_value());
  // m / log(lambda) tends to (1 - alpha) K = 1/2 from above.
  CHECK(f.ratio_liminf_est > 0.5);
  CHECK(f.ratio_limsup_est < 0.6);

  CHECK(classify_regime(params("logpower:2", "power:2:1"), grid).regime == Regime::Finite);
  // m = L^{2/3} + (L^{2/3} - 1)/2 with L = log(lambda): unbounded but o(L).
  CHECK(classify_regime(params("loglip", "power:3:1"), grid).regime == Regime::ArbitrarilySmall);
  CHECK(classify_regime(params("holder:0.5", "power:2:1"), grid).regime == Regime::Infinite);
}

TEST_CASE("classification grid validation") {
  const auto p = params("holder:0.5", "power:1:1");
  CHECK_THROWS_AS(classify_regime(p, geometric_grid(1e2, 1e9, 5)), Error);
  CHECK_THROWS_AS(classify_regime(p, geometric_grid(1e2, 1e5, 20)), Error);
  CHECK_THROWS_AS(classify_regime(p, {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 2e9, 3e9}), Error);
}

TEST_CASE("growth exponents") {
  const auto g = fit_growth_exponent(params("holder:0.5", "power:2:1"), geometric_grid(1e3, 1e9, 61));
  CHECK_THAT(g.slope, WithinAbs(0.25, 0.01));

  // Without theta, m = lambda omega(1/lambda) T0, slope 1 - alpha.
  const auto h = fit_growth_exponent(params("holder:0.3", "none"), geometric_grid(1e3, 1e9, 61));
  CHECK_THAT(h.slope, WithinAbs(0.7, 1e-9));

  // Bounded m: either a poor fit or a flat slope.
  try {
    const auto b = fit_growth_exponent(params("linear", "power:1:1"), geometric_grid(1e3, 1e9, 61));
    CHECK_THAT(b.slope, WithinAbs(0.0, 1e-6));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoorFit);
  }
}

TEST_CASE("geometric grid hits decades exactly") {
  const auto g = geometric_grid(1e3, 1e6, 4);
  CHECK(g[0] == 1e3);
  CHECK(g[1] == 1e4);
  CHECK(g[2] == 1e5);
  CHECK(g[3] == 1e6);
}

TEST_CASE("csv has the documented header") {
  const auto rows = compute_m_grid(params("holder:0.5", "power:1:1"), {1e2, 1e3});
  const auto csv = key_quantity_csv(rows);
  CHECK(csv.rfind("lambda,m,s_star,first_term,second_term,branch,m_over_loglambda\n", 0) == 0);
}
