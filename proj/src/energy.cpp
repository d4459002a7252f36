#include "deriloss/energy.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "deriloss/csv.hpp"
#include "deriloss/error.hpp"
#include "deriloss/parallel.hpp"
#include "deriloss/quadrature.hpp"

namespace deriloss::energy {

using activator::ActivatorConstants;
using activator::Segment;
using activator::SegmentKind;
using moduli::ClassParams;

namespace {

namespace odeint = boost::numeric::odeint;
using Vec2 = std::array<double, 2>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double clamp_to(const Segment& seg, double t) { return std::min(seg.t1, std::max(seg.t0, t)); }

double seg_value(const Segment& seg, double t) {
  switch (seg.kind) {
    case SegmentKind::Constant: return seg.value;
    case SegmentKind::Block: return seg.block.gamma * seg.block.gamma - activator::block_phi(seg.block, t);
    case SegmentKind::Baseline: return seg.tail->value(t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Constant value of the segment, if it has one.
std::optional<double> constant_of(const Segment& seg) {
  if (seg.kind == SegmentKind::Constant) return seg.value;
  if (seg.kind == SegmentKind::Baseline && seg.tail->constant_value) return *seg.tail->constant_value;
  return std::nullopt;
}

double segment_cmax(const Segment& seg) {
  switch (seg.kind) {
    case SegmentKind::Constant: return seg.value;
    case SegmentKind::Block: {
      const auto& b = seg.block;
      return b.gamma * b.gamma + b.eps / (2.0 * b.gamma * b.lambda);
    }
    case SegmentKind::Baseline: {
      double m = 0.0;
      for (int i = 0; i <= 64; ++i) m = std::max(m, seg.tail->value(seg.t0 + (seg.t1 - seg.t0) * i / 64.0));
      return 1.05 * m;
    }
  }
  return 1.0;
}

State rotate(State s, double omega, double dt) {
  const double th = omega * dt;
  const double c = std::cos(th);
  const double sn = std::sin(th);
  return {s.u * c + s.v / omega * sn, -s.u * omega * sn + s.v * c};
}

void check_state(const State& s, double t) {
  if (!std::isfinite(s.u) || !std::isfinite(s.v))
    throw Error(ErrorKind::NonFiniteState, "solution left the double range near t = " + io::num(t));
}

// Moves `s` across one segment from x to y (either direction), filling the
// states at `targets` (ordered from x towards y) and returning the state at y.
State run_segment(const PiecewiseCoefficient& c, const Segment& seg, double lambda, State s, double x, double y,
                  const std::vector<double>& targets, std::vector<State>& out, const SolveOptions& opt) {
  out.clear();
  if (x == y) {
    out.assign(targets.size(), s);
    return s;
  }
  const bool forward = y > x;

  if (opt.prefer_closed_form) {
    if (auto v = constant_of(seg)) {
      const double omega = lambda * std::sqrt(*v);
      for (double t : targets) out.push_back(rotate(s, omega, t - x));
      // A Constant(gamma^2) segment spanning whole lattice periods maps the
      // state to itself.
      const bool whole = seg.n0 && seg.n1 && c.lattice_frequency &&
                         std::abs(omega - *c.lattice_frequency) <= 1e-12 * omega &&
                         ((x == seg.t0 && y == seg.t1) || (x == seg.t1 && y == seg.t0));
      return whole ? s : rotate(s, omega, y - x);
    }
    if (seg.kind == SegmentKind::Block && seg.block.lambda == lambda && s.u == 0.0) {
      const auto& b = seg.block;
      double alpha = 0.0;
      bool aligned = false;
      if (forward && x == b.a) {
        alpha = s.v;
        aligned = true;
      } else if (!forward && x == b.b) {
        alpha = s.v / b.endpoint_growth();
        aligned = true;
      }
      if (aligned) {
        auto at = [&](double t) {
          const auto w = activator::block_w(b, t);
          return State{alpha * w.value, alpha * w.derivative};
        };
        for (double t : targets) out.push_back(at(t));
        return at(y);
      }
    }
  }

  // Adaptive Runge-Kutta-Fehlberg 7(8) on the scaled state (lambda u, u').
  const double max_dt = kTwoPi / (lambda * std::sqrt(segment_cmax(seg))) / 20.0;
  // Backward runs use reversed time r = -t: the step limiter in older Boost
  // clamps negative steps to +max_dt.
  const double sgn = forward ? 1.0 : -1.0;
  auto rhs = [&seg, lambda, sgn](const Vec2& q, Vec2& dq, double r) {
    const double cv = seg_value(seg, clamp_to(seg, sgn * r));
    dq[0] = sgn * lambda * q[1];
    dq[1] = -sgn * lambda * cv * q[0];
  };
  Vec2 q{lambda * s.u, s.v};
  const double scale = std::max(std::abs(q[0]), std::abs(q[1]));
  const double abs_tol = std::max(opt.rel_tol * 1e-2 * scale, 1e-300);
  auto stepper = odeint::make_controlled(abs_tol, opt.rel_tol, max_dt, odeint::runge_kutta_fehlberg78<Vec2>());
  double t = x;
  auto advance = [&](double to) {
    if (to == t) return;
    try {
      odeint::integrate_adaptive(stepper, rhs, q, sgn * t, sgn * to, max_dt);
    } catch (const odeint::step_adjustment_error& e) {
      throw Error(ErrorKind::StepSizeUnderflow, std::string("integrator could not adjust its step: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
      throw Error(ErrorKind::StepSizeUnderflow, std::string("integrator made no progress: ") + e.what());
    }
    t = to;
    if (!std::isfinite(q[0]) || !std::isfinite(q[1]))
      throw Error(ErrorKind::NonFiniteState, "solution left the double range near t = " + io::num(t));
  };
  for (double tt : targets) {
    advance(tt);
    out.push_back({q[0] / lambda, q[1]});
  }
  advance(y);
  return {q[0] / lambda, q[1]};
}

}  // namespace

// --------------------------------------------------------------- mollifier

MollifiedCoefficient::MollifiedCoefficient(PiecewiseCoefficient base, double eps) : base_(std::move(base)), eps_(eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "mollifier scale must be positive");
}

double MollifiedCoefficient::extended(double t) const {
  return t >= base_.T0() ? base_.value(base_.T0()) : base_.value(t);
}

double MollifiedCoefficient::integral(double x, double y) const {
  const double T0 = base_.T0();
  double acc = 0.0;
  if (y > T0) {
    acc += base_.value(T0) * (y - std::max(x, T0));
    y = T0;
  }
  if (x >= y) return acc;
  const auto& segs = base_.segments();
  for (std::size_t i = base_.segment_index(x); i < segs.size() && segs[i].t0 < y; ++i) {
    const Segment& s = segs[i];
    const double lo = std::max(x, s.t0);
    const double hi = std::min(y, s.t1);
    if (!(hi > lo)) continue;
    switch (s.kind) {
      case SegmentKind::Constant: acc += s.value * (hi - lo); break;
      case SegmentKind::Block: {
        const auto& b = s.block;
        acc += b.gamma * b.gamma * (hi - lo) - activator::block_phi_integral(b, lo, hi);
        break;
      }
      case SegmentKind::Baseline:
        if (s.tail->integral)
          acc += s.tail->integral(lo, hi);
        else
          acc += quad::integrate(s.tail->value, lo, hi, 1e-13);
        break;
    }
  }
  return acc;
}

double MollifiedCoefficient::value(double t) const {
  const double T0 = base_.T0();
  const double y = t + eps_;
  if (t >= T0) return base_.value(T0);
  // Windows inside one constant piece average to that constant exactly.
  const Segment& s = base_.segments()[base_.segment_index(t)];
  if (auto v = constant_of(s); v && y <= s.t1) return *v;
  return integral(t, y) / (y - t);
}

double MollifiedCoefficient::derivative(double t) const { return (extended(t + eps_) - extended(t)) / eps_; }

MollifiedCoefficient mollify(const PiecewiseCoefficient& c, double eps) { return MollifiedCoefficient(c, eps); }

MollifierCheck check_mollifier(const MollifiedCoefficient& m, const ClassParams& params, std::size_t samples) {
  MollifierCheck r;
  r.omega_eps = params.omega(m.eps());
  r.min_value = std::numeric_limits<double>::infinity();
  r.max_value = -r.min_value;
  const double T0 = m.base().T0();
  const double slack = 1e-12 * params.mu2;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = T0 * static_cast<double>(i) / samples;
    const double v = m.value(t);
    r.min_value = std::min(r.min_value, v);
    r.max_value = std::max(r.max_value, v);
    r.max_distance = std::max(r.max_distance, std::abs(v - m.base().value(t)));
    r.max_derivative = std::max(r.max_derivative, std::abs(m.derivative(t)));
  }
  r.bounds_ok = r.min_value >= params.mu1 - slack && r.max_value <= params.mu2 + slack;
  r.distance_ok = r.max_distance <= r.omega_eps * (1.0 + 1e-9) + slack;
  r.derivative_ok = r.max_derivative <= r.omega_eps / m.eps() * (1.0 + 1e-9) + slack / m.eps();
  return r;
}

// ------------------------------------------------------------------ solver

std::size_t EnergyTrace::index_at_or_after(double t) const {
  return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
}

namespace {

// Walks the segments between `from` and `to`; `after` runs on the state at
// each segment boundary.
template <class After>
State walk(const PiecewiseCoefficient& c, double lambda, State s, double from, double to, const SolveOptions& options,
           After&& after) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const auto& segs = c.segments();
  std::vector<State> scratch;
  const std::vector<double> none;
  double cur = from;
  if (to >= from) {
    for (std::size_t i = c.segment_index(from); cur < to; ++i) {
      const double end = std::min(to, segs[i].t1);
      s = run_segment(c, segs[i], lambda, s, cur, end, none, scratch, options);
      check_state(s, end);
      after(s);
      cur = end;
    }
  } else {
    std::size_t i = c.segment_index(from);
    if (i > 0 && segs[i].t0 == from) --i;
    for (;; --i) {
      const double end = std::max(to, segs[i].t0);
      s = run_segment(c, segs[i], lambda, s, cur, end, none, scratch, options);
      check_state(s, end);
      after(s);
      cur = end;
      if (cur <= to || i == 0) break;
    }
  }
  return s;
}

}  // namespace

State propagate(const PiecewiseCoefficient& c, double lambda, State s, double from, double to,
                const SolveOptions& options) {
  return walk(c, lambda, s, from, to, options, [](State&) {});
}

double ScaledState::log_E(double lambda) const {
  return std::log(s.v * s.v + lambda * lambda * s.u * s.u) + 2.0 * log_scale;
}

ScaledState propagate_scaled(const PiecewiseCoefficient& c, double lambda, ScaledState s, double from, double to,
                             const SolveOptions& options) {
  double log_scale = s.log_scale;
  // Rescaling by a power of two is exact, so closed-form checks such as
  // u == 0 at lattice points still see the same state.
  auto renorm = [&](State& st) {
    const double mag = std::max(std::abs(lambda * st.u), std::abs(st.v));
    if (mag > 0x1p64 || (mag > 0.0 && mag < 0x1p-64)) {
      const int e = std::ilogb(mag);
      st.u = std::scalbn(st.u, -e);
      st.v = std::scalbn(st.v, -e);
      log_scale += e * std::numbers::ln2;
    }
  };
  State out = walk(c, lambda, s.s, from, to, options, renorm);
  return {out, log_scale};
}

EnergyTrace solve_ode(const PiecewiseCoefficient& c, double lambda, double u0, double u1, std::size_t sample_count,
                      const SolveOptions& options) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (sample_count < 100) throw Error(ErrorKind::InvalidArgument, "sample_count must be at least 100");
  const double T0 = c.T0();

  std::vector<double> times;
  times.reserve(sample_count + 1 + (options.include_breakpoints ? c.segments().size() + 1 : 0) +
                options.extra_times.size());
  for (std::size_t i = 0; i <= sample_count; ++i) times.push_back(T0 * static_cast<double>(i) / sample_count);
  times.back() = T0;
  if (options.include_breakpoints) {
    for (const auto& s : c.segments()) times.push_back(s.t0);
  }
  for (double t : options.extra_times)
    if (t >= 0.0 && t <= T0) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<State> states(times.size());
  states[0] = {u0, u1};
  State cur{u0, u1};
  double x = 0.0;
  std::size_t k = 1;
  std::vector<double> targets;
  std::vector<State> got;
  for (const auto& seg : c.segments()) {
    targets.clear();
    const std::size_t first = k;
    while (k < times.size() && times[k] <= seg.t1) targets.push_back(times[k++]);
    cur = run_segment(c, seg, lambda, cur, x, seg.t1, targets, got, options);
    check_state(cur, seg.t1);
    for (std::size_t j = 0; j < got.size(); ++j) states[first + j] = got[j];
    x = seg.t1;
  }

  EnergyTrace tr;
  tr.lambda = lambda;
  tr.times = std::move(times);
  const std::size_t n = tr.times.size();
  tr.u.resize(n);
  tr.u_prime.resize(n);
  tr.E.resize(n);
  tr.F.resize(n);
  std::optional<MollifiedCoefficient> moll;
  if (options.mollify_eps) {
    moll.emplace(c, *options.mollify_eps);
    tr.F_eps.emplace(n);
    tr.eps = *options.mollify_eps;
  }
  const double l2 = lambda * lambda;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = tr.times[i];
    const State& s = states[i];
    tr.u[i] = s.u;
    tr.u_prime[i] = s.v;
    const double u2 = s.u * s.u;
    const double v2 = s.v * s.v;
    tr.E[i] = v2 + l2 * u2;
    tr.F[i] = v2 + l2 * c.value(t) * u2;
    if (moll) (*tr.F_eps)[i] = v2 + l2 * moll->value(t) * u2;
  }
  return tr;
}

std::string trace_csv(const EnergyTrace& tr) {
  std::string out = "t,u,u_prime,E,F\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    out += io::csv_row({io::num(tr.times[i]), io::num(tr.u[i]), io::num(tr.u_prime[i]), io::num(tr.E[i]),
                        io::num(tr.F[i])});
  return out;
}

// ------------------------------------------------------------ upper bound

bool UpperBoundReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const UpperBoundRow& r) { return r.pass; });
}

UpperBoundReport verify_upper_bound(const PiecewiseCoefficient& c, const ClassParams& params,
                                    const std::vector<double>& lambda_grid, const UpperBoundOptions& options) {
  params.validate();
  const auto k = ActivatorConstants::compute(params, params.T0);
  UpperBoundReport rep;
  rep.rows.resize(lambda_grid.size());
  parallel_for(lambda_grid.size(), [&](std::size_t idx) {
    const double lambda = lambda_grid[idx];
    const auto key = keyquantity::compute_m(params, lambda);
    const double s = key.s_star;
    const double eps = options.eps_override.value_or(1.0 / lambda);
    SolveOptions so = options.solver;
    so.extra_times.push_back(s);
    so.mollify_eps = eps;

    UpperBoundRow row;
    row.lambda = lambda;
    row.m = key.m;
    row.s_split = s;
    row.log_bound = std::log(k.M1) + k.M2 * key.m;
    const double w = params.omega(eps);
    const double kappa = w / (params.mu1 * eps) + lambda * w / std::sqrt(params.mu1);
    row.phase1_log_factor = kappa * s;
    const double I_s = params.theta ? moduli::theta_integral(*params.theta, s, params.T0) : 0.0;
    row.phase2_log_factor = I_s / params.mu1;
    row.log_ratio_max = -std::numeric_limits<double>::infinity();
    row.phase1_log_measured = -std::numeric_limits<double>::infinity();
    row.phase2_log_measured = -std::numeric_limits<double>::infinity();

    for (const State d : {State{0.0, 1.0}, State{1.0, 0.0}}) {
      const auto tr = solve_ode(c, lambda, d.u, d.v, options.sample_count, so);
      const double logE0 = std::log(tr.E[0]);
      const double logFe0 = std::log((*tr.F_eps)[0]);
      const std::size_t is = tr.index_at_or_after(s);
      const double logFs = std::log(tr.F[is]);
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        const double lr = std::log(tr.E[i]) - logE0;
        if (lr > row.log_ratio_max) row.log_ratio_max = lr;
        if (lr > row.log_bound + std::log1p(1e-6) && !row.violation_t) row.violation_t = t;
        if (t <= s) {
          const double excess = std::log((*tr.F_eps)[i]) - logFe0 - kappa * t;
          row.phase1_log_measured = std::max(row.phase1_log_measured, excess);
        }
        if (t >= s) {
          const double I_t = params.theta ? moduli::theta_integral(*params.theta, t, params.T0) : 0.0;
          const double excess = std::log(tr.F[i]) - logFs - (I_s - I_t) / params.mu1;
          row.phase2_log_measured = std::max(row.phase2_log_measured, excess);
        }
      }
    }
    const double tol = 1e-9;
    row.phases_ok = row.phase1_log_measured <= tol && row.phase2_log_measured <= tol;
    row.pass = !row.violation_t && row.phases_ok;
    rep.rows[idx] = row;
  });
  return rep;
}

// ------------------------------------------------------------ lower bound

bool LowerBoundReport::all_pass() const {
  const bool rows_ok = std::all_of(rows.begin(), rows.end(), [](const LowerBoundRow& r) { return r.pass; });
  const bool preds_ok =
      std::all_of(predicates.begin(), predicates.end(), [](const ActivatorPredicate& p) { return p.certified; });
  return rows_ok && preds_ok;
}

LowerBoundReport verify_lower_bound(const activator::SeedCoefficient& seed, const std::vector<double>& lambda_grid,
                                    const LowerBoundOptions& options) {
  const auto& P = seed.params();
  const double T0 = P.T0;
  const std::array<double, 2> deltas{T0 / 10.0, T0 / 100.0};
  const auto k = ActivatorConstants::compute(P, seed.T1());
  LowerBoundReport rep;
  rep.log_M4 = std::log(k.M4);
  rep.rows.resize(lambda_grid.size());
  // Per row, min over sampled t >= delta of log E(t) - 2 M3 m.
  std::vector<std::array<double, 2>> min_after(lambda_grid.size());

  parallel_for(lambda_grid.size(), [&](std::size_t idx) {
    const double lambda = lambda_grid[idx];
    const auto act = activator::build_activator(seed, lambda, options.build);
    const auto& coef = act.coefficient;
    const double a = *coef.a_lambda;
    const double b = *coef.b_lambda;
    SolveOptions so = options.solver;
    so.extra_times.push_back(b);
    for (double d : deltas) so.extra_times.push_back(d);
    const auto tr = solve_ode(coef, lambda, 0.0, 1.0, options.sample_count, so);

    LowerBoundRow row;
    row.lambda = lambda;
    row.m = act.key.m;
    row.branch = act.key.branch;
    row.b_lambda = b;
    row.log_bound = std::log(act.guarantee.M4) + 2.0 * options.m3_scale * act.guarantee.M3 * act.key.m;
    row.blocks = coef.amplitudes.size();

    const double g2 = seed.gamma() * seed.gamma();
    if (act.key.branch == keyquantity::Branch::Omega) {
      row.log_E_at_b_expected = k.nu1 / (8.0 * g2) * act.key.A * (b - a);
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < coef.amplitudes.size(); ++i)
        sum += coef.amplitudes[i] * (coef.subdivision[i + 1] - coef.subdivision[i]);
      row.log_E_at_b_expected = sum / (8.0 * g2);  // amplitudes already carry nu2
    }

    const std::size_t ib = tr.index_at_or_after(b);
    row.log_E_at_b = std::log(tr.E[ib]);
    row.endpoint_ok = std::abs(row.log_E_at_b - row.log_E_at_b_expected) <= 1e-8 * std::max(1.0, row.log_E_at_b_expected) &&
                      row.log_E_at_b >= row.log_bound;

    const double logFb = std::log(tr.F[ib]);
    const double decay = k.tail_theta_integral / P.mu1;
    row.min_log_E_after_b = std::numeric_limits<double>::infinity();
    std::array<double, 2> mins{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    const double growth = 2.0 * options.m3_scale * k.M3 * act.key.m;
    for (std::size_t i = ib; i < tr.times.size(); ++i) {
      const double lE = std::log(tr.E[i]);
      row.min_log_E_after_b = std::min(row.min_log_E_after_b, lE);
      if (std::log(tr.F[i]) < logFb - decay - 1e-9) row.decay_ok = false;
    }
    for (std::size_t j = 0; j < deltas.size(); ++j)
      for (std::size_t i = tr.index_at_or_after(deltas[j]); i < tr.times.size(); ++i)
        mins[j] = std::min(mins[j], std::log(tr.E[i]) - growth);
    min_after[idx] = mins;
    row.pass = row.min_log_E_after_b >= row.log_bound - 1e-12 * std::abs(row.log_bound) && row.endpoint_ok && row.decay_ok;
    rep.rows[idx] = row;
  });

  // Asymptotic activator predicate along the grid (sorted by lambda).
  std::vector<std::size_t> order(lambda_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return lambda_grid[x] < lambda_grid[y]; });
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    ActivatorPredicate pred;
    pred.delta = deltas[j];
    // Smallest grid lambda beyond which every b_lambda stays below delta.
    std::optional<std::size_t> start;
    for (std::size_t p = order.size(); p-- > 0;) {
      if (rep.rows[order[p]].b_lambda <= deltas[j])
        start = p;
      else
        break;
    }
    if (start) {
      pred.lambda_delta = lambda_grid[order[*start]];
      pred.log_M_delta = std::numeric_limits<double>::infinity();
      for (std::size_t p = *start; p < order.size(); ++p)
        pred.log_M_delta = std::min(pred.log_M_delta, min_after[order[p]][j]);
      pred.certified = pred.log_M_delta >= rep.log_M4 - 1e-9;
    }
    rep.predicates.push_back(pred);
  }
  return rep;
}

// ----------------------------------------------------------------- reports

std::string format_upper_report(const UpperBoundReport& r) {
  std::ostringstream os;
  for (const auto& row : r.rows) {
    os << "upper lambda=" << io::num(row.lambda) << " m=" << io::num(row.m) << " s=" << io::num(row.s_split)
       << " log_ratio_max=" << io::num(row.log_ratio_max) << " log_bound=" << io::num(row.log_bound)
       << " phase1_excess=" << io::num(row.phase1_log_measured) << " phase1_factor=" << io::num(row.phase1_log_factor)
       << " phase2_excess=" << io::num(row.phase2_log_measured) << " phase2_factor=" << io::num(row.phase2_log_factor)
       << " " << (row.pass ? "PASS" : "FAIL") << "\n";
  }
  return os.str();
}

std::string format_lower_report(const LowerBoundReport& r) {
  std::ostringstream os;
  for (const auto& row : r.rows) {
    os << "lower lambda=" << io::num(row.lambda) << " m=" << io::num(row.m)
       << " branch=" << keyquantity::to_string(row.branch) << " blocks=" << row.blocks
       << " b=" << io::num(row.b_lambda) << " log_bound=" << io::num(row.log_bound)
       << " min_log_E_after_b=" << io::num(row.min_log_E_after_b) << " log_E_b=" << io::num(row.log_E_at_b)
       << " log_E_b_expected=" << io::num(row.log_E_at_b_expected) << " endpoint=" << (row.endpoint_ok ? "ok" : "bad")
       << " decay=" << (row.decay_ok ? "ok" : "bad") << " " << (row.pass ? "PASS" : "FAIL") << "\n";
  }
  for (const auto& p : r.predicates) {
    os << "activator delta=" << io::num(p.delta);
    if (p.lambda_delta)
      os << " lambda_delta=" << io::num(*p.lambda_delta) << " log_M_delta=" << io::num(p.log_M_delta);
    else
      os << " lambda_delta=none";
    os << " log_M4=" << io::num(r.log_M4) << " " << (p.certified ? "PASS" : "FAIL") << "\n";
  }
  return os.str();
}

}  // namespace deriloss::energy
