#include "catch_amalgamated.hpp"

#include <cmath>

#include "deriloss/error.hpp"
#include "deriloss/moduli.hpp"
#include "deriloss/quadrature.hpp"

using namespace deriloss;
using namespace deriloss::moduli;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

TEST_CASE("holder modulus satisfies the three axioms") {
  const auto r = check_modulus_axioms(ModulusSpec::holder(0.5), 20);
  CHECK(r.all_pass());
  CHECK_FALSE(r.limit_case);
}

TEST_CASE("sigma squared fails the ratio axiom with an adjacent witness") {
  const auto r = check_modulus_axioms(ModulusSpec::custom([](double s) { return s * s; }, "square"), 20);
  CHECK_FALSE(r.all_pass());
  const auto* a = r.find("ratio_nondecreasing");
  REQUIRE(a != nullptr);
  CHECK_FALSE(a->pass);
  CHECK(a->witness_next != a->witness);
  CHECK(r.find("nondecreasing")->pass);
}

TEST_CASE("log power 3 passes at depth 30 against a direct scan") {
  const auto om = ModulusSpec::log_power(3.0);
  CHECK(check_modulus_axioms(om, 30).all_pass());
  // Independent scan of sigma |log sigma|^3 below the knee.
  for (int k = 30; k > 2; --k) {
    const double s = std::ldexp(1.0, -k);
    const double direct = s * std::pow(-std::log(s), 3.0);
    if (s < om.knee()) CHECK_THAT(om(s), WithinRel(direct, 1e-14));
  }
}

TEST_CASE("every catalog modulus and theta passes its axioms") {
  for (const auto& p : catalog_pairs()) {
    INFO(p.omega_key << " / " << p.theta_key);
    CHECK(check_modulus_axioms(parse_modulus(p.omega_key), 30).all_pass());
    const auto th = parse_theta(p.theta_key);
    if (th) CHECK(check_theta_axioms(*th, 1.0, 30).all_pass());
  }
}

TEST_CASE("constant modulus is flagged as a limit case") {
  const auto r = check_modulus_axioms(ModulusSpec::constant(1.0), 20);
  CHECK(r.limit_case);
  CHECK(r.all_pass());
}

TEST_CASE("moduli grow linearly beyond the knee") {
  const auto om = ModulusSpec::log_lipschitz();
  const double k = om.knee();
  REQUIRE(k > 0.0);
  CHECK_THAT(om(4.0 * k), WithinRel(4.0 * om(k), 1e-14));
  CHECK_THAT(om(100.0) / 100.0, WithinRel(om(k) / k, 1e-14));
}

TEST_CASE("theta power law integrals") {
  const auto t1 = ThetaSpec::power_law(1.0, 1.0);
  CHECK(check_theta_axioms(t1, 1.0, 20).all_pass());
  CHECK_THAT(theta_integral(t1, 0.3, 1.0), WithinRel(-std::log(0.3), 1e-14));
  CHECK_THAT(theta_integral(t1, std::exp(-1.0), 1.0), WithinRel(1.0, 1e-14));

  const auto t2 = ThetaSpec::power_law(2.0, 1.0);
  CHECK(check_theta_axioms(t2, 1.0, 20).all_pass());
  CHECK_THAT(theta_integral(t2, 0.25, 1.0), WithinRel(3.0, 1e-14));
}

TEST_CASE("log over t integral matches an independent Simpson rule") {
  const auto th = ThetaSpec::log_over_t(1.0);
  // Composite Simpson on |log t| / t over [0.1, 1] in the variable u = log t.
  const int n = 2000;
  const double a = std::log(0.1), b = 0.0, h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::abs(u);  // |log t| / t dt = |u| du
  }
  acc *= h / 3.0;
  CHECK_THAT(theta_integral(th, 0.1, 1.0), WithinRel(acc, 1e-10));
  CHECK_THAT(theta_integral(th, 0.1, 1.0), WithinRel(0.5 * std::pow(std::log(10.0), 2), 1e-12));
  CHECK(th(1.0) == 0.0);  // exact |log t| / t, zero at t = 1
}

TEST_CASE("closed forms agree with quadrature") {
  for (const auto& key : {"power:1:1", "power:2:3", "power:1.5:1", "logovert:2", "expinv:1", "powexpinv:1:1",
                          "powexpinv:2:1", "bounded:4"}) {
    const auto th = *parse_theta(key);
    for (double s : {0.05, 0.2, 0.5, 0.9}) {
      INFO(key << " s=" << s);
      CHECK_THAT(theta_integral(th, s, 1.0), WithinRel(theta_integral_quadrature(th, s, 1.0), 1e-9));
    }
  }
}

TEST_CASE("integral over an empty interval is zero") {
  for (const auto& p : catalog_pairs()) {
    const auto th = parse_theta(p.theta_key);
    if (th) CHECK(theta_integral(*th, 1.0, 1.0) == 0.0);
  }
}

TEST_CASE("increasing theta fails monotonicity") {
  const auto th = ThetaSpec::custom([](double t) { return t; }, "t", [](double s, double T0) { return 0.5 * (T0 * T0 - s * s); },
                                    true);
  const auto r = check_theta_axioms(th, 1.0, 20);
  CHECK_FALSE(r.all_pass());
  CHECK_FALSE(r.find("nonincreasing")->pass);
}

TEST_CASE("a wrong closed-form integral is reported as a mismatch") {
  const auto th = ThetaSpec::custom([](double t) { return 1.0 / t; }, "bad",
                                    [](double s, double T0) { return 2.0 * std::log(T0 / s); });
  CHECK_THROWS_MATCHES(check_theta_axioms(th, 1.0, 20), Error,
                       Catch::Matchers::Predicate<const Error&>(
                           [](const Error& e) { return e.kind() == ErrorKind::IntegralMismatch; }));
}

TEST_CASE("parsing keys") {
  CHECK(parse_modulus("holder:0.3").kind() == ModulusKind::Holder);
  const auto weak = parse_modulus("weak:logpower:2");
  CHECK(weak.kind() == ModulusKind::LogPower);
  CHECK(weak.param() == 3.0);
  CHECK_FALSE(parse_theta("none").has_value());
  CHECK(parse_theta("power:3:1")->beta() == 3.0);
  for (const auto& bad : {"holder", "holder:x", "holder:1.5", "nosuch", "logpower:-1"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_modulus(bad), Error);
  }
  CHECK_THROWS_AS(parse_theta("power:1"), Error);
}

TEST_CASE("class parameters are validated") {
  ClassParams p;
  p.mu1 = 2.0;
  p.mu2 = 1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.mu1 = 1.0;
  p.mu2 = 2.0;
  p.T0 = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("weakening multiplies by a growing logarithm") {
  for (const auto& key : {"holder:0.5", "logpower:2", "logloglip", "rootexp:1", "linear"}) {
    const auto om = parse_modulus(key);
    const auto w = weaken_by_log(om);
    INFO(key);
    CHECK(check_modulus_axioms(w, 30).all_pass());
    // ratio omega_weak / omega grows without bound as sigma -> 0
    CHECK(w(1e-12) / om(1e-12) > w(1e-4) / om(1e-4));
  }
}
