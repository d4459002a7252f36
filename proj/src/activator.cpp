#include "deriloss/activator.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "deriloss/csv.hpp"
#include "deriloss/error.hpp"

namespace deriloss::activator {

using keyquantity::Branch;
using moduli::ClassParams;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Additive-recurrence (R2) sequence: deterministic, well spread in [0,1)^2.
struct R2 {
  static constexpr double g1 = 0.7548776662466927;
  static constexpr double g2 = 0.5698402909980532;
  static double x(std::size_t k) { return frac(0.5 + g1 * static_cast<double>(k)); }
  static double y(std::size_t k) { return frac(0.5 + g2 * static_cast<double>(k)); }
  static double frac(double v) { return v - std::floor(v); }
};

struct Phase {
  double s1, c1;  // sin, cos of tau
  double s2, c2;  // sin, cos of 2 tau
};

// Phase relative to the block start, tau = gamma lambda (t - a). At t = b the
// exact value 2 pi k is used.
Phase phase(const BlockParams& p, double t) {
  if (t == p.b || t == p.a) return {0.0, 1.0, 0.0, 1.0};
  const double tau = p.frequency() * (t - p.a);
  return {std::sin(tau), std::cos(tau), std::sin(2.0 * tau), std::cos(2.0 * tau)};
}

void check_in_block(const BlockParams& p, double t) {
  if (!(t >= p.a && t <= p.b))
    throw Error(ErrorKind::OutOfInterval, "t = " + io::num(t) + " outside [" + io::num(p.a) + ", " + io::num(p.b) + "]");
}

BlockParams assemble(double eps, double gamma, double lambda, std::int64_t n_a, std::int64_t n_b) {
  if (!(eps > 0.0) || !(gamma > 0.0) || !(lambda > 0.0))
    throw Error(ErrorKind::InvalidArgument, "block needs eps, gamma, lambda > 0");
  if (n_a < 0 || n_b <= n_a) throw Error(ErrorKind::InvalidArgument, "block needs 0 <= n_a < n_b");
  BlockParams p;
  p.eps = eps;
  p.gamma = gamma;
  p.lambda = lambda;
  p.n_a = n_a;
  p.n_b = n_b;
  p.a = lattice_point(gamma, lambda, n_a);
  p.b = lattice_point(gamma, lambda, n_b);
  return p;
}

std::int64_t to_index(double v, const char* what) {
  if (!(std::abs(v) < 9.0e15)) throw Error(ErrorKind::HypothesisViolated, "lattice index out of range", {what});
  return static_cast<std::int64_t>(v);
}

double segment_value(const Segment& s, double t) {
  switch (s.kind) {
    case SegmentKind::Constant: return s.value;
    case SegmentKind::Block: return s.block.gamma * s.block.gamma - block_phi(s.block, t);
    case SegmentKind::Baseline: return s.tail->value(t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double segment_derivative(const Segment& s, double t) {
  switch (s.kind) {
    case SegmentKind::Constant: return 0.0;
    case SegmentKind::Block: return -block_phi_prime(s.block, t);
    case SegmentKind::Baseline: return s.tail->derivative(t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Segment constant_segment(double t0, double t1, double v, std::optional<std::int64_t> n0,
                         std::optional<std::int64_t> n1) {
  Segment s;
  s.kind = SegmentKind::Constant;
  s.t0 = t0;
  s.t1 = t1;
  s.value = v;
  s.n0 = n0;
  s.n1 = n1;
  return s;
}

Segment block_segment(const BlockParams& p) {
  Segment s;
  s.kind = SegmentKind::Block;
  s.t0 = p.a;
  s.t1 = p.b;
  s.block = p;
  s.n0 = p.n_a;
  s.n1 = p.n_b;
  return s;
}

Segment baseline_segment(double t0, double t1, std::shared_ptr<const TailFunction> tail) {
  Segment s;
  s.kind = SegmentKind::Baseline;
  s.t0 = t0;
  s.t1 = t1;
  s.tail = std::move(tail);
  return s;
}

// Appends the part of the seed that lies on [from, T0], where `from` is a
// lattice point with index n_from and from <= T1.
void append_seed_rest(std::vector<Segment>& segs, const SeedCoefficient& seed, double from, std::int64_t n_from) {
  const double T1 = seed.T1();
  const double T0 = seed.params().T0;
  if (from < T1) segs.push_back(constant_segment(from, T1, seed.value(0.0), n_from, std::nullopt));
  segs.push_back(baseline_segment(T1, T0, seed.tail()));
}

struct HypothesisList {
  std::vector<std::string> failed;
  void check(bool ok, const std::string& name) {
    if (!ok) failed.push_back(name);
  }
  void raise_if_any(const std::string& context) const {
    if (!failed.empty()) throw Error(ErrorKind::HypothesisViolated, context, failed);
  }
};

// Shared hypotheses on lambda for both constructions with amplitude factor nu.
void check_lambda(HypothesisList& h, const SeedCoefficient& seed, double lambda, double nu) {
  const auto& P = seed.params();
  const double g = seed.gamma();
  const double w = P.omega(1.0 / lambda);
  const double g2 = g * g;
  h.check(nu * w <= 8.0 * g * g * g, "amplitude_bound: nu*omega(1/lambda) <= 8*gamma^3");
  h.check(nu / (2.0 * g) * w <= std::min(g2 - P.mu1, P.mu2 - g2),
          "hyperbolicity_margin: nu/(2*gamma)*omega(1/lambda) <= min(gamma^2-mu1, mu2-gamma^2)");
}

void check_window(HypothesisList& h, const SeedCoefficient& seed, double a, double b, const Window& w) {
  h.check(w.n_a >= 0 && w.n_b > w.n_a, "window_order: 0 <= a < b");
  h.check(b <= seed.T1(), "window_inside_constant_part: b <= T1");
  if (b < seed.T1()) {
    const auto& om = seed.params().omega;
    h.check(om(b) <= seed.eta() * om(seed.T1() - b), "modulus_slack: omega(b) <= eta*omega(T1-b)");
  }
  (void)a;
}

}  // namespace

// ----------------------------------------------------------------- the block

double lattice_point(double gamma, double lambda, std::int64_t n) {
  const long double f = static_cast<long double>(gamma * lambda);
  return static_cast<double>(2.0L * std::numbers::pi_v<long double> * static_cast<long double>(n) / f);
}

BlockParams BlockParams::make(double eps, double gamma, double lambda, std::int64_t n_a, std::int64_t n_b) {
  BlockParams p = assemble(eps, gamma, lambda, n_a, n_b);
  if (eps > 8.0 * gamma * gamma * gamma * lambda)
    throw Error(ErrorKind::InvalidArgument, "block amplitude exceeds 8 gamma^3 lambda");
  return p;
}

BlockParams BlockParams::unchecked(double eps, double gamma, double lambda, std::int64_t n_a, std::int64_t n_b) {
  return assemble(eps, gamma, lambda, n_a, n_b);
}

BlockParams BlockParams::from_endpoints(double eps, double gamma, double lambda, double a, double b) {
  const double f = gamma * lambda;
  const double xa = a * f / kTwoPi;
  const double xb = b * f / kTwoPi;
  const double ra = std::round(xa);
  const double rb = std::round(xb);
  if (std::abs(xa - ra) > 1e-9 || std::abs(xb - rb) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "block endpoints are not multiples of 2 pi / (gamma lambda)");
  return make(eps, gamma, lambda, to_index(ra, "a"), to_index(rb, "b"));
}

double BlockParams::period() const { return kTwoPi / frequency(); }

double BlockParams::log_endpoint_growth() const {
  const double len = static_cast<double>(2.0L * std::numbers::pi_v<long double> * periods() /
                                         static_cast<long double>(frequency()));
  return eps * len / (16.0 * gamma * gamma);
}

double BlockParams::endpoint_growth() const { return std::exp(log_endpoint_growth()); }

double block_phi(const BlockParams& p, double t) {
  check_in_block(p, t);
  const Phase ph = phase(p, t);
  const double f = p.frequency();
  const double q = p.eps / (8.0 * p.gamma * p.gamma * p.lambda);
  const double s2 = ph.s1 * ph.s1;
  return p.eps / (4.0 * f) * ph.s2 + q * q * s2 * s2;
}

double block_phi_prime(const BlockParams& p, double t) {
  check_in_block(p, t);
  const Phase ph = phase(p, t);
  const double g3l = p.gamma * p.gamma * p.gamma * p.lambda;
  return 0.5 * p.eps * ph.c2 + p.eps * p.eps / (16.0 * g3l) * ph.s1 * ph.s1 * ph.s1 * ph.c1;
}

WValue block_w(const BlockParams& p, double t) {
  check_in_block(p, t);
  const double g2 = p.gamma * p.gamma;
  if (t == p.b) return {0.0, p.endpoint_growth()};
  const Phase ph = phase(p, t);
  const double f = p.frequency();
  const double g = p.eps / (16.0 * g2) * (t - p.a) - p.eps / (32.0 * g2 * f) * ph.s2;
  const double e = std::exp(g);
  const double gp = p.eps / (8.0 * g2) * ph.s1 * ph.s1;
  return {ph.s1 / f * e, (ph.c1 + ph.s1 / f * gp) * e};
}

double block_phi_integral(const BlockParams& p, double x, double y) {
  check_in_block(p, x);
  check_in_block(p, y);
  const double f = p.frequency();
  const double tx = f * (x - p.a);
  const double d = f * (y - x);  // tau_y - tau_x
  const double sum = 2.0 * tx + d;  // tau_x + tau_y
  const double q = p.eps / (8.0 * p.gamma * p.gamma * p.lambda);
  // (eps / 4f) sin(2 tau): antiderivative -eps cos(2 tau) / (8 f^2).
  const double lin = p.eps / (8.0 * f * f) * 2.0 * std::sin(sum) * std::sin(d);
  // q^2 sin^4(tau): antiderivative (q^2 / f)(3 tau/8 - sin 2tau/4 + sin 4tau/32).
  const double ds2 = 2.0 * std::cos(sum) * std::sin(d);
  const double ds4 = 2.0 * std::cos(2.0 * sum) * std::sin(2.0 * d);
  const double quart = q * q / f * (3.0 * d / 8.0 - ds2 / 4.0 + ds4 / 32.0);
  return lin + quart;
}

// -------------------------------------------------------------- TailFunction

TailFunction TailFunction::constant(double v) {
  TailFunction t;
  t.value = [v](double) { return v; };
  t.derivative = [](double) { return 0.0; };
  t.constant_value = v;
  t.integral = [v](double x, double y) { return v * (y - x); };
  return t;
}

TailFunction TailFunction::from_uniform_samples(double t0, double dt, std::vector<double> values) {
  if (values.size() < 4 || !(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "need >= 4 samples and dt > 0");
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  auto spline = std::make_shared<Spline>(values.begin(), values.end(), t0, dt);
  TailFunction t;
  t.value = [spline](double x) { return (*spline)(x); };
  t.derivative = [spline](double x) { return spline->prime(x); };
  return t;
}

// ----------------------------------------------------------- SeedCoefficient

SeedCoefficient SeedCoefficient::make(const ClassParams& params, double T1, double gamma, double eta,
                                      TailFunction tail) {
  params.validate();
  if (!(T1 > 0.0 && T1 < params.T0)) throw Error(ErrorKind::InvalidArgument, "seed needs T1 in (0, T0)");
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorKind::InvalidArgument, "seed needs eta in (0, 1)");
  const double g2 = gamma * gamma;
  if (!(gamma > 0.0 && g2 > params.mu1 && g2 < params.mu2))
    throw Error(ErrorKind::InvalidArgument, "seed needs gamma^2 in (mu1, mu2)");
  if (!tail.value || !tail.derivative) throw Error(ErrorKind::InvalidArgument, "seed tail needs value and derivative");
  if (std::abs(tail.value(T1) - g2) > 1e-10 * std::max(1.0, g2))
    throw Error(ErrorKind::InvalidArgument, "seed tail does not start at gamma^2");

  SeedCoefficient s;
  s.params_ = params;
  s.T1_ = T1;
  s.gamma_ = gamma;
  s.eta_ = eta;
  s.tail_ = std::make_shared<const TailFunction>(std::move(tail));

  if (!s.tail_is_constant()) {
    // Sampled checks of the tail: bounds, derivative, and omega-continuity
    // with slack factor (1 - eta) over the whole interval.
    const std::size_t n = 20000;
    const double T0 = params.T0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = T1 + (T0 - T1) * static_cast<double>(i) / n;
      const double v = s.value(t);
      if (v < params.mu1 || v > params.mu2)
        throw Error(ErrorKind::InvalidArgument, "seed tail leaves [mu1, mu2] at t = " + io::num(t));
      if (params.theta && t > T1 && std::abs(s.derivative(t)) > (*params.theta)(t) * (1.0 + 1e-9))
        throw Error(ErrorKind::InvalidArgument, "seed tail derivative exceeds theta at t = " + io::num(t));
    }
    const int scales = 30;
    for (int j = 0; j < scales; ++j) {
      for (std::size_t k = 0; k < 1000; ++k) {
        const double sigma = std::min(T0, T0 * std::exp2(-scales + j + R2::x(k)));
        const double a = (T0 - sigma) * R2::y(k);
        const double b = a + sigma;
        const double lhs = std::abs(s.value(b) - s.value(a));
        if (lhs > (1.0 - eta) * params.omega(b - a) * (1.0 + 1e-9) + 1e-15)
          throw Error(ErrorKind::InvalidArgument, "seed is not omega-continuous with slack eta near t = " + io::num(a));
      }
    }
  }
  return s;
}

SeedCoefficient SeedCoefficient::constant(const ClassParams& params, double T1, double gamma, double eta) {
  return make(params, T1, gamma, eta, TailFunction::constant(gamma * gamma));
}

SeedCoefficient SeedCoefficient::standard(const ClassParams& params) {
  params.validate();
  return constant(params, 0.9 * params.T0, std::sqrt(0.5 * (params.mu1 + params.mu2)), 0.9);
}

double SeedCoefficient::value(double t) const { return t < T1_ ? gamma_ * gamma_ : tail_->value(t); }

double SeedCoefficient::derivative(double t) const { return t < T1_ ? 0.0 : tail_->derivative(t); }

// ------------------------------------------------------ PiecewiseCoefficient

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::OmegaConstruction: return "omega_construction";
    case Provenance::ThetaConstruction: return "theta_construction";
    case Provenance::Seed: return "seed";
    case Provenance::Function: return "function";
    case Provenance::Manual: return "manual";
  }
  return "?";
}

PiecewiseCoefficient PiecewiseCoefficient::from_segments(std::vector<Segment> segments, double T0,
                                                         Provenance provenance) {
  if (segments.empty()) throw Error(ErrorKind::InvalidArgument, "no segments");
  if (segments.front().t0 != 0.0 || segments.back().t1 != T0)
    throw Error(ErrorKind::InvalidArgument, "segments must cover [0, T0]");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!(s.t0 < s.t1)) throw Error(ErrorKind::InvalidArgument, "empty or reversed segment " + std::to_string(i));
    if (s.kind == SegmentKind::Baseline && !s.tail) throw Error(ErrorKind::InvalidArgument, "baseline without tail");
    if (i + 1 < segments.size()) {
      const Segment& n = segments[i + 1];
      if (n.t0 != s.t1) throw Error(ErrorKind::InvalidArgument, "gap or overlap after segment " + std::to_string(i));
      const double l = segment_value(s, s.t1);
      const double r = segment_value(n, n.t0);
      if (std::abs(l - r) > 1e-10 * std::max(1.0, std::abs(l)))
        throw Error(ErrorKind::InvalidArgument, "discontinuity at t = " + io::num(s.t1));
    }
  }
  PiecewiseCoefficient c;
  c.segments_ = std::move(segments);
  c.T0_ = T0;
  c.provenance_ = provenance;
  c.starts_.reserve(c.segments_.size());
  for (const auto& s : c.segments_) c.starts_.push_back(s.t0);
  return c;
}

PiecewiseCoefficient PiecewiseCoefficient::from_function(TailFunction fn, double T0) {
  auto tail = std::make_shared<const TailFunction>(std::move(fn));
  return from_segments({baseline_segment(0.0, T0, tail)}, T0, Provenance::Function);
}

PiecewiseCoefficient PiecewiseCoefficient::from_seed(const SeedCoefficient& seed) {
  std::vector<Segment> segs;
  segs.push_back(constant_segment(0.0, seed.T1(), seed.value(0.0), 0, std::nullopt));
  segs.push_back(baseline_segment(seed.T1(), seed.params().T0, seed.tail()));
  return from_segments(std::move(segs), seed.params().T0, Provenance::Seed);
}

std::size_t PiecewiseCoefficient::segment_index(double t) const {
  if (!(t >= 0.0 && t <= T0_)) throw Error(ErrorKind::OutOfInterval, "t = " + io::num(t) + " outside [0, T0]");
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
}

double PiecewiseCoefficient::value(double t) const { return segment_value(segments_[segment_index(t)], t); }

double PiecewiseCoefficient::derivative(double t) const {
  return segment_derivative(segments_[segment_index(t)], t);
}

// ------------------------------------------------------------------ constants

ActivatorConstants ActivatorConstants::compute(const ClassParams& P, double T1) {
  P.validate();
  ActivatorConstants k;
  k.nu1 = std::min(1.0, std::sqrt(P.mu1) / kPi);
  k.nu2 = 0.5 * k.nu1;
  const double r = std::max(1.0, P.mu2) / std::min(1.0, P.mu1);
  k.M1 = r * r;
  k.M2 = 1.0 / P.mu1 + 1.0 / std::sqrt(P.mu1);
  k.M3 = k.nu1 / (128.0 * P.mu2);
  k.tail_theta_integral = P.theta ? moduli::theta_integral(*P.theta, T1, P.T0) : 0.0;
  k.M4 = std::min(1.0, 1.0 / P.mu2) *
         std::exp(-k.tail_theta_integral / P.mu1 - kTwoPi - P.omega(1.0) / (8.0 * P.mu2));
  return k;
}

// -------------------------------------------------------------- constructions

Window omega_window(double gamma, double lambda, double s_star) {
  const double x = gamma * lambda * s_star / (4.0 * kPi);
  return {to_index(std::floor(x - 2.0), "a"), 2 * to_index(std::floor(x), "b")};
}

Window theta_window(double gamma, double lambda, double s_star, double s_hat) {
  const double f = gamma * lambda / kTwoPi;
  return {to_index(std::ceil(f * s_star), "a"), to_index(std::ceil(f * s_hat), "b")};
}

PiecewiseCoefficient omega_construction(const SeedCoefficient& seed, double lambda, const Window& window) {
  const auto& P = seed.params();
  const double g = seed.gamma();
  const auto k = ActivatorConstants::compute(P, seed.T1());
  const double A = lambda * P.omega(1.0 / lambda);
  const double eps = k.nu1 * A;
  const double a = lattice_point(g, lambda, window.n_a);
  const double b = lattice_point(g, lambda, window.n_b);

  HypothesisList h;
  check_lambda(h, seed, lambda, k.nu1);
  check_window(h, seed, a, b, window);
  if (P.theta && window.n_b > window.n_a)
    h.check(eps <= (*P.theta)(b), "derivative_budget: nu1*lambda*omega(1/lambda) <= theta(b)");
  h.raise_if_any("omega construction at lambda = " + io::num(lambda));

  const BlockParams blk = BlockParams::make(eps, g, lambda, window.n_a, window.n_b);
  std::vector<Segment> segs;
  if (blk.n_a > 0) segs.push_back(constant_segment(0.0, blk.a, seed.value(0.0), 0, blk.n_a));
  segs.push_back(block_segment(blk));
  append_seed_rest(segs, seed, blk.b, blk.n_b);

  auto c = PiecewiseCoefficient::from_segments(std::move(segs), P.T0, Provenance::OmegaConstruction);
  c.a_lambda = blk.a;
  c.b_lambda = blk.b;
  c.amplitudes = {eps};
  c.lattice_frequency = blk.frequency();
  return c;
}

PiecewiseCoefficient theta_construction(const SeedCoefficient& seed, double lambda, const Window& window) {
  const auto& P = seed.params();
  if (!P.theta) throw Error(ErrorKind::HypothesisViolated, "theta construction needs theta", {"theta_present"});
  const auto& theta = *P.theta;
  const double g = seed.gamma();
  const auto k = ActivatorConstants::compute(P, seed.T1());
  const double A = lambda * P.omega(1.0 / lambda);
  const double a = lattice_point(g, lambda, window.n_a);
  const double b = lattice_point(g, lambda, window.n_b);

  if (window.n_b == window.n_a) throw Error(ErrorKind::EmptySubdivision, "theta construction window is empty");
  HypothesisList h;
  check_lambda(h, seed, lambda, k.nu2);
  check_window(h, seed, a, b, window);
  h.check(A >= theta(a), "derivative_budget: lambda*omega(1/lambda) >= theta(a)");
  h.raise_if_any("theta construction at lambda = " + io::num(lambda));

  std::vector<Segment> segs;
  if (window.n_a > 0) segs.push_back(constant_segment(0.0, a, seed.value(0.0), 0, window.n_a));
  std::vector<double> pts{a};
  std::vector<double> amps;
  const std::int64_t count = window.n_b - window.n_a;
  segs.reserve(static_cast<std::size_t>(count) + 3);
  for (std::int64_t i = 1; i <= count; ++i) {
    const std::int64_t n1 = window.n_a + i;
    const double eps_i = k.nu2 * theta(lattice_point(g, lambda, n1));
    const BlockParams blk = BlockParams::make(eps_i, g, lambda, n1 - 1, n1);
    segs.push_back(block_segment(blk));
    pts.push_back(blk.b);
    amps.push_back(eps_i);
  }
  append_seed_rest(segs, seed, b, window.n_b);

  auto c = PiecewiseCoefficient::from_segments(std::move(segs), P.T0, Provenance::ThetaConstruction);
  c.a_lambda = a;
  c.b_lambda = b;
  c.subdivision = std::move(pts);
  c.amplitudes = std::move(amps);
  c.lattice_frequency = g * lambda;
  return c;
}

Activator build_activator(const SeedCoefficient& seed, double lambda, const BuildOptions& options) {
  const auto& P = seed.params();
  const auto key = keyquantity::compute_m(P, lambda);
  if (options.check_growth) {
    double prev = key.m;
    for (int j = 1; j <= 6; ++j) {
      const double mj = keyquantity::compute_m(P, lambda * std::pow(10.0, j)).m;
      if (!(mj > prev))
        throw Error(ErrorKind::HypothesisViolated, "m(lambda) does not grow along the companion grid",
                    {"unbounded_key_quantity"});
      prev = mj;
    }
  }
  const double g = seed.gamma();
  Activator out{key.branch == Branch::Omega
                    ? omega_construction(seed, lambda, omega_window(g, lambda, key.s_star))
                    : theta_construction(seed, lambda, theta_window(g, lambda, key.s_star, *key.s_hat)),
                key, {}, ActivatorConstants::compute(P, seed.T1())};
  out.guarantee.b_lambda = *out.coefficient.b_lambda;
  out.guarantee.m = key.m;
  out.guarantee.M3 = out.constants.M3;
  out.guarantee.M4 = out.constants.M4;
  out.guarantee.log_bound = std::log(out.constants.M4) + 2.0 * out.constants.M3 * key.m;
  return out;
}

// ------------------------------------------------------------------- density

SeedCoefficient seed_from_class_member(const TailFunction& c, const ClassParams& params, double epsilon,
                                       std::size_t samples) {
  params.validate();
  if (!(epsilon > 0.0 && epsilon < std::min(1.0, params.T0)))
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, min(1, T0))");
  const auto report = check_class_membership(PiecewiseCoefficient::from_function(c, params.T0), params, samples);
  if (!report.pass()) {
    const auto& v = report.violations.front();
    throw Error(ErrorKind::NotClassMember, v.kind + " violated at t = " + io::num(v.t));
  }
  const double mid = 0.5 * (params.mu1 + params.mu2);
  const double e = epsilon;
  TailFunction tail;
  auto cv = c.value;
  auto cd = c.derivative;
  tail.value = [cv, e, mid](double t) { return (1.0 - e) * cv(t) + e * mid; };
  tail.derivative = [cd, e](double t) { return (1.0 - e) * cd(t); };
  if (c.constant_value) tail.constant_value = (1.0 - e) * *c.constant_value + e * mid;
  const double g2 = tail.value(epsilon);
  return SeedCoefficient::make(params, epsilon, std::sqrt(g2), epsilon, std::move(tail));
}

// ---------------------------------------------------------------- membership

MembershipReport check_class_membership(const PiecewiseCoefficient& c, const ClassParams& params,
                                        std::size_t samples) {
  params.validate();
  if (samples < 1000) throw Error(ErrorKind::InvalidArgument, "membership check needs at least 1000 samples");
  MembershipReport rep;
  const double T0 = params.T0;
  const double slack = 1e-12 * params.mu2;
  auto record = [&rep](Violation v) {
    ++rep.violation_count;
    if (rep.violations.size() < 20) rep.violations.push_back(v);
  };

  const bool has_hull = c.a_lambda && c.b_lambda;
  auto check_point = [&](double t) {
    ++rep.points_checked;
    const double v = c.value(t);
    if (std::isnan(v)) throw Error(ErrorKind::NonFiniteEvaluation, "coefficient is NaN at t = " + io::num(t));
    if (v < params.mu1 - slack) record({"lower", t, t, v, params.mu1});
    if (v > params.mu2 + slack) record({"upper", t, t, v, params.mu2});
    if (params.theta && t > 0.0) {
      const double d = std::abs(c.derivative(t));
      const double th = (*params.theta)(t);
      if (d > th * (1.0 + 1e-9)) record({"derivative", t, t, d, th});
    }
  };
  for (std::size_t i = 0; i <= samples; ++i) check_point(T0 * static_cast<double>(i) / samples);
  for (const auto& s : c.segments()) check_point(s.t0);
  if (has_hull) {
    const double a = *c.a_lambda;
    const double b = *c.b_lambda;
    for (std::size_t i = 0; i <= samples; ++i) check_point(a + (b - a) * static_cast<double>(i) / samples);
  }

  // Pairs stratified by dyadic separation, from an eighth of the oscillation
  // period (or T0 2^-30) up to T0. Half of each stratum is placed around the
  // modified interval, where violations would concentrate.
  const double sigma_min = c.lattice_frequency ? (kTwoPi / *c.lattice_frequency) / 8.0 : T0 * std::exp2(-30.0);
  const int scales = std::max(1, static_cast<int>(std::ceil(std::log2(T0 / sigma_min))));
  const std::size_t per = std::max<std::size_t>(1, samples / static_cast<std::size_t>(scales));
  std::size_t k = 0;
  for (int j = 0; j < scales; ++j) {
    for (std::size_t i = 0; i < per; ++i, ++k) {
      const double sigma = std::min(T0, sigma_min * std::exp2(j + R2::x(k)));
      double lo = 0.0;
      double hi = T0 - sigma;
      if (has_hull && (i % 2 == 1)) {
        lo = std::max(0.0, *c.a_lambda - sigma);
        hi = std::min(*c.b_lambda, T0 - sigma);
        if (hi < lo) {
          lo = 0.0;
          hi = T0 - sigma;
        }
      }
      const double s = lo + (hi - lo) * R2::y(k);
      const double t = std::min(T0, s + sigma);
      if (!(t > s)) continue;
      ++rep.pairs_checked;
      const double lhs = std::abs(c.value(t) - c.value(s));
      const double rhs = params.omega(t - s);
      if (lhs > rhs * (1.0 + 1e-9) + slack) record({"continuity", t, s, lhs, rhs});
    }
  }
  return rep;
}

double uniform_distance(const PiecewiseCoefficient& c1, const PiecewiseCoefficient& c2, std::size_t samples) {
  const double T0 = std::min(c1.T0(), c2.T0());
  double d = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = T0 * static_cast<double>(i) / samples;
    d = std::max(d, std::abs(c1.value(t) - c2.value(t)));
  }
  return d;
}

std::string coefficient_csv(const PiecewiseCoefficient& c, std::size_t resolution) {
  std::ostringstream os;
  os << "# provenance " << to_string(c.provenance()) << "\n";
  os << "# T0 " << io::num(c.T0()) << "\n";
  if (c.a_lambda) os << "# a_lambda " << io::num(*c.a_lambda) << "\n# b_lambda " << io::num(*c.b_lambda) << "\n";
  os << "# segments " << c.segments().size() << "\n";
  std::size_t blocks = 0;
  for (const auto& s : c.segments()) {
    if (s.kind == SegmentKind::Block) {
      // Runs of blocks are summarized to keep the header readable.
      if (blocks++ < 8)
        os << "# block [" << io::num(s.t0) << ", " << io::num(s.t1) << "] eps " << io::num(s.block.eps) << " gamma "
           << io::num(s.block.gamma) << " lambda " << io::num(s.block.lambda) << "\n";
    } else if (s.kind == SegmentKind::Constant) {
      os << "# constant [" << io::num(s.t0) << ", " << io::num(s.t1) << "] value " << io::num(s.value) << "\n";
    } else {
      os << "# baseline [" << io::num(s.t0) << ", " << io::num(s.t1) << "]\n";
    }
  }
  if (blocks > 8) os << "# ... " << blocks - 8 << " more blocks\n";
  os << "t,c,c_prime\n";
  std::string body = os.str();
  for (std::size_t i = 0; i <= resolution; ++i) {
    const double t = c.T0() * static_cast<double>(i) / resolution;
    body += io::csv_row({io::num(t), io::num(c.value(t)), io::num(c.derivative(t))});
  }
  return body;
}

}  // namespace deriloss::activator
