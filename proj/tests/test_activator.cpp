#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "deriloss/activator.hpp"
#include "deriloss/error.hpp"
#include "deriloss/keyquantity.hpp"
#include "deriloss/quadrature.hpp"

using namespace deriloss;
using namespace deriloss::activator;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kPi = std::numbers::pi;

moduli::ClassParams params(const std::string& om, const std::string& th) {
  moduli::ClassParams p;
  p.omega = moduli::parse_modulus(om);
  p.theta = moduli::parse_theta(th);
  return p;
}

bool has_kind(const Error& e, ErrorKind k) { return e.kind() == k; }

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}
}  // namespace

TEST_CASE("block parameters enforce the amplitude hypothesis and lattice endpoints") {
  CHECK_NOTHROW(BlockParams::make(8.0, 1.0, 1.0, 0, 1));
  CHECK(kind_of([] { BlockParams::make(8.0 + 1e-9, 1.0, 1.0, 0, 1); }) == ErrorKind::InvalidArgument);
  const double P = 2.0 * kPi / (1.0 * 100.0);
  CHECK_NOTHROW(BlockParams::from_endpoints(1.0, 1.0, 100.0, 3 * P, 7 * P));
  CHECK_THROWS_AS(BlockParams::from_endpoints(1.0, 1.0, 100.0, 3.1 * P, 7 * P), Error);
}

TEST_CASE("phi vanishes at lattice points and matches the quarter-period value") {
  const double lambda = 2.0 * kPi * 100.0;
  const auto b = BlockParams::make(1.0, 1.0, lambda, 0, 100);
  CHECK(b.a == 0.0);
  CHECK_THAT(b.b, WithinRel(1.0, 1e-15));
  CHECK(block_phi(b, b.a) == 0.0);
  // Independent evaluation: sin(pi) term vanishes, sin^4(pi/2) = 1.
  const double t = kPi / (2.0 * lambda);
  CHECK_THAT(block_phi(b, t), WithinRel(1.0 / (64.0 * lambda * lambda), 1e-6));
}

TEST_CASE("w has the documented initial and final data") {
  const auto b = BlockParams::make(3.0, 1.3, 500.0, 4, 40);
  const auto wa = block_w(b, b.a);
  CHECK(wa.value == 0.0);
  CHECK(wa.derivative == 1.0);
  const auto wb = block_w(b, b.b);
  CHECK(wb.value == 0.0);
  CHECK_THAT(wb.derivative, WithinRel(std::exp(3.0 * (b.b - b.a) / (16.0 * 1.3 * 1.3)), 1e-12));
  CHECK_THAT(b.log_endpoint_growth(), WithinRel(3.0 * (b.b - b.a) / (16.0 * 1.3 * 1.3), 1e-14));
}

TEST_CASE("w solves the block equation (5-point finite differences)") {
  const auto b = BlockParams::make(20.0, 0.8, 300.0, 2, 12);
  const double h = 1e-3 / b.frequency();
  double maxw = 0.0, maxres = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = b.a + 2 * h + (b.b - b.a - 4 * h) * (i + 0.5) / 10000.0;
    auto w = [&](double x) { return block_w(b, x).value; };
    const double d2 = (-w(t + 2 * h) + 16 * w(t + h) - 30 * w(t) + 16 * w(t - h) - w(t - 2 * h)) / (12 * h * h);
    const double c = b.gamma * b.gamma - block_phi(b, t);
    maxw = std::max(maxw, std::abs(w(t)));
    maxres = std::max(maxres, std::abs(d2 + b.lambda * b.lambda * c * w(t)));
  }
  CHECK(maxres <= 1e-6 * b.lambda * b.lambda * maxw);
}

TEST_CASE("phi derivative matches a central difference and the integral matches quadrature") {
  const auto b = BlockParams::make(5.0, 1.1, 50.0, 1, 6);
  for (int i = 1; i < 50; ++i) {
    const double t = b.a + (b.b - b.a) * i / 50.0;
    const double h = 1e-6 / b.frequency();
    const double fd = (block_phi(b, t + h) - block_phi(b, t - h)) / (2 * h);
    CHECK_THAT(block_phi_prime(b, t), WithinAbs(fd, 1e-6 * b.eps));
  }
  const double x = b.a + 0.1 * (b.b - b.a), y = b.a + 0.77 * (b.b - b.a);
  const double q = quad::integrate([&](double t) { return block_phi(b, t); }, x, y, 1e-13);
  CHECK_THAT(block_phi_integral(b, x, y), WithinAbs(q, 1e-14 * b.eps));
}

TEST_CASE("omega construction stays close to the seed and inside the class") {
  const auto p = params("holder:0.25", "power:2:1");
  const auto seed = SeedCoefficient::standard(p);
  const auto k = ActivatorConstants::compute(p, seed.T1());
  for (double lambda : {1e3, 1e5}) {
    const auto act = build_activator(seed, lambda);
    REQUIRE(act.key.branch == keyquantity::Branch::Omega);
    const double dev = uniform_distance(act.coefficient, PiecewiseCoefficient::from_seed(seed), 100000);
    CHECK(dev <= k.nu1 / (2 * seed.gamma()) * p.omega(1.0 / lambda) * (1 + 1e-12));
    CHECK(check_class_membership(act.coefficient, p, 100000).pass());
  }
}

TEST_CASE("theta construction: junctions, per-segment derivative bound, membership") {
  const auto p = params("holder:0.5", "power:1:1");
  const auto seed = SeedCoefficient::standard(p);
  const auto act = build_activator(seed, 1e5);
  REQUIRE(act.key.branch == keyquantity::Branch::Theta);
  const auto& c = act.coefficient;
  REQUIRE(c.subdivision.size() == c.amplitudes.size() + 1);
  const double g2 = seed.gamma() * seed.gamma();
  for (double t : c.subdivision) CHECK(c.value(t) == g2);
  for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
    const double t0 = c.subdivision[i], t1 = c.subdivision[i + 1];
    CHECK(c.amplitudes[i] <= (*p.theta)(t1) * (1 + 1e-12));
    for (int j = 0; j <= 16; ++j) {
      const double t = t0 + (t1 - t0) * j / 16.0;
      CHECK(std::abs(c.derivative(t)) <= c.amplitudes[i] * (1 + 1e-12));
    }
  }
  CHECK(check_class_membership(c, p, 100000).pass());
}

TEST_CASE("b_lambda decreases along a geometric grid") {
  const auto seed = SeedCoefficient::standard(params("holder:0.5", "power:1:1"));
  double prev = 1.0;
  for (double lambda : keyquantity::geometric_grid(1e3, 1e7, 9)) {
    const auto act = build_activator(seed, lambda);
    CHECK(act.guarantee.b_lambda < prev);
    prev = act.guarantee.b_lambda;
  }
}

TEST_CASE("small lambda violates named hypotheses") {
  const auto seed = SeedCoefficient::standard(params("holder:0.25", "power:2:1"));
  try {
    build_activator(seed, 3.0);
    FAIL("expected HypothesisViolated");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::HypothesisViolated || e.kind() == ErrorKind::EmptySubdivision));
    if (e.kind() == ErrorKind::HypothesisViolated) CHECK_FALSE(e.failed_conditions().empty());
  }
}

TEST_CASE("bounded m has no activator") {
  const auto seed = SeedCoefficient::standard(params("linear", "bounded:1"));
  try {
    build_activator(seed, 1e4);
    FAIL("expected HypothesisViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HypothesisViolated);
    CHECK(e.failed_conditions() == std::vector<std::string>{"unbounded_key_quantity"});
  }
}

TEST_CASE("seed from a class member") {
  const auto p = params("holder:0.5", "power:1:1");
  const auto K = TailFunction::constant(1.2);
  const auto s = seed_from_class_member(K, p, 0.1, 10000);
  CHECK_THAT(s.gamma() * s.gamma(), WithinRel(0.9 * 1.2 + 0.1 * 1.5, 1e-14));
  CHECK(s.tail_is_constant());

  CHECK(kind_of([&] { seed_from_class_member(TailFunction::constant(3.0), p, 0.1, 10000); }) ==
        ErrorKind::NotClassMember);

  TailFunction wavy;
  wavy.value = [](double t) { return 1.5 + 0.1 * std::sin(t); };
  wavy.derivative = [](double t) { return 0.1 * std::cos(t); };
  double prev = 1.0;
  for (double eps : {0.1, 0.01, 0.001}) {
    const auto se = seed_from_class_member(wavy, p, eps, 10000);
    const auto c = PiecewiseCoefficient::from_seed(se);
    const auto orig = PiecewiseCoefficient::from_function(wavy, p.T0);
    const double d = uniform_distance(c, orig, 10000);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("membership flags an oversized block") {
  const auto p = params("holder:0.5", "power:1:1");
  const double gamma = std::sqrt(1.5), lambda = 100.0;
  const auto blk = BlockParams::unchecked(16 * gamma * gamma * gamma * lambda, gamma, lambda, 10, 12);
  std::vector<Segment> segs(3);
  segs[0].kind = SegmentKind::Constant;
  segs[0].t0 = 0.0;
  segs[0].t1 = blk.a;
  segs[0].value = gamma * gamma;
  segs[1].kind = SegmentKind::Block;
  segs[1].t0 = blk.a;
  segs[1].t1 = blk.b;
  segs[1].block = blk;
  segs[2].kind = SegmentKind::Constant;
  segs[2].t0 = blk.b;
  segs[2].t1 = 1.0;
  segs[2].value = gamma * gamma;
  const auto c = PiecewiseCoefficient::from_segments(segs, 1.0);
  const auto r = check_class_membership(c, p, 100000);
  CHECK_FALSE(r.pass());
  bool derivative = false;
  for (const auto& v : r.violations) derivative = derivative || v.kind == "derivative";
  CHECK(derivative);
}

TEST_CASE("segments must tile the interval") {
  std::vector<Segment> segs(2);
  segs[0].t0 = 0.0;
  segs[0].t1 = 0.4;
  segs[0].value = 1.5;
  segs[1].t0 = 0.5;
  segs[1].t1 = 1.0;
  segs[1].value = 1.5;
  CHECK_THROWS_AS(PiecewiseCoefficient::from_segments(segs, 1.0), Error);
  segs[1].t0 = 0.4;
  segs[1].value = 1.6;  // jump
  CHECK_THROWS_AS(PiecewiseCoefficient::from_segments(segs, 1.0), Error);
}

TEST_CASE("coefficient csv starts with a segment header") {
  const auto seed = SeedCoefficient::standard(params("holder:0.5", "power:1:1"));
  const auto act = build_activator(seed, 1e3);
  const auto csv = coefficient_csv(act.coefficient, 200);
  CHECK(csv[0] == '#');
  CHECK(csv.find("t,c,c_prime\n") != std::string::npos);
}
