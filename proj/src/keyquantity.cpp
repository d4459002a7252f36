#include "deriloss/keyquantity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deriloss/csv.hpp"
#include "deriloss/error.hpp"
#include "deriloss/parallel.hpp"

namespace deriloss::keyquantity {

using moduli::ClassParams;
using moduli::ThetaSpec;

std::string to_string(Branch b) { return b == Branch::Omega ? "omega" : "theta"; }

std::string to_string(Regime r) {
  switch (r) {
    case Regime::NoLoss: return "NoLoss";
    case Regime::ArbitrarilySmall: return "ArbitrarilySmall";
    case Regime::Finite: return "Finite";
    case Regime::Infinite: return "Infinite";
  }
  return "?";
}

namespace {

// Next point of a bracketing search on (lo, hi): geometric while the bracket
// spans more than a factor of two, arithmetic afterwards.
double midpoint(double lo, double hi) {
  if (lo > 0.0 && hi > 2.0 * lo) return std::sqrt(lo) * std::sqrt(hi);
  if (lo == 0.0 && hi > 1e-300) return 0.5 * hi;
  return lo + 0.5 * (hi - lo);
}

// Largest s with theta(s) >= A, assuming theta(T0) < A <= theta(lo) for some
// lo > 0. Returns 0 if theta never reaches A above the double range floor.
double solve_theta_equals(const ThetaSpec& theta, double A, double T0) {
  double hi = T0;
  double lo = 0.5 * T0;
  while (theta(lo) < A) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  for (;;) {
    const double mid = midpoint(lo, hi);
    if (!(mid > lo && mid < hi)) break;
    const double v = theta(mid);
    if (std::isnan(v)) throw Error(ErrorKind::NonFiniteEvaluation, "theta is NaN during the minimizer search");
    if (v >= A)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// s in [s0, T0] with integral_s^T0 theta = target, where target is at most
// the integral from s0.
double solve_half_integral(const ThetaSpec& theta, double s0, double T0, double target) {
  double lo = s0;
  double hi = T0;
  for (;;) {
    const double mid = midpoint(lo, hi);
    if (!(mid > lo && mid < hi)) break;
    if (moduli::theta_integral(theta, mid, T0) >= target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line l;
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (l.intercept + l.slope * x[i]);
    ss_res += r * r;
  }
  // A constant series is fitted exactly by a flat line.
  const double scale = std::max(1.0, my * my) * n;
  if (syy <= 1e-24 * scale)
    l.r_squared = 1.0;
  else
    l.r_squared = 1.0 - ss_res / syy;
  return l;
}

void validate_grid(const std::vector<double>& grid) {
  if (grid.size() < 8) throw Error(ErrorKind::GridTooSmall, "grid needs at least 8 points");
  if (!(grid.front() > 1.0)) throw Error(ErrorKind::GridTooSmall, "grid must start above 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::GridTooSmall, "grid must be strictly increasing");
  if (grid.back() / grid.front() < 1e6 * (1.0 - 1e-12))
    throw Error(ErrorKind::GridTooSmall, "grid must span at least six decades");
  const double step = std::log(grid[1] / grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = std::log(grid[i] / grid[i - 1]);
    if (std::abs(s - step) > 1e-6 * step) throw Error(ErrorKind::GridTooSmall, "grid must be geometric");
  }
}

std::size_t tail_start(std::size_t n) { return n - std::max<std::size_t>(3, (n + 2) / 3); }

}  // namespace

KeyQuantityResult compute_m(const ClassParams& params, double lambda) {
  params.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const double T0 = params.T0;
  KeyQuantityResult r;
  r.lambda = lambda;
  r.A = lambda * params.omega(1.0 / lambda);
  if (!std::isfinite(r.A)) throw Error(ErrorKind::DivergentObjective, "lambda * omega(1/lambda) is not finite");

  double s = T0;
  if (params.theta) {
    const ThetaSpec& th = *params.theta;
    const double at_end = th(T0);
    if (std::isnan(at_end)) throw Error(ErrorKind::NonFiniteEvaluation, "theta(T0) is NaN");
    if (at_end < r.A) s = solve_theta_equals(th, r.A, T0);
  }

  r.s_star = s;
  r.first_term = r.A * s;
  r.second_term = params.theta ? moduli::theta_integral(*params.theta, s, T0) : 0.0;
  r.m = r.first_term + r.second_term;
  if (!std::isfinite(r.m)) throw Error(ErrorKind::NonFiniteEvaluation, "m(lambda) is not finite");
  r.branch = r.first_term >= 0.5 * r.m ? Branch::Omega : Branch::Theta;
  if (r.branch == Branch::Theta)
    r.s_hat = solve_half_integral(*params.theta, s, T0, 0.5 * r.second_term);
  return r;
}

std::vector<KeyQuantityResult> compute_m_grid(const ClassParams& params, const std::vector<double>& grid) {
  std::vector<KeyQuantityResult> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { out[i] = compute_m(params, grid[i]); });
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw Error(ErrorKind::InvalidArgument, "bad geometric grid");
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  // Base 10 so that decade grids land on exact powers of ten.
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    const double e = (a * (points - 1 - i) + b * i) / (points - 1);
    g[static_cast<std::size_t>(i)] = std::pow(10.0, e);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

RegimeClassification classify_regime(const ClassParams& params, const std::vector<double>& lambda_grid,
                                     const ClassifyOptions& options) {
  validate_grid(lambda_grid);
  RegimeClassification out;
  out.lambda_grid = lambda_grid;
  const auto rows = compute_m_grid(params, lambda_grid);
  for (const auto& r : rows) out.m_values.push_back(r.m);

  const std::size_t n = lambda_grid.size();
  const std::size_t t0 = tail_start(n);
  std::vector<double> L, m, ratio;
  for (std::size_t i = t0; i < n; ++i) {
    L.push_back(std::log(lambda_grid[i]));
    m.push_back(out.m_values[i]);
    ratio.push_back(out.m_values[i] / L.back());
  }
  out.ratio_liminf_est = *std::min_element(ratio.begin(), ratio.end());
  out.ratio_limsup_est = *std::max_element(ratio.begin(), ratio.end());
  out.tail_variation = (out.ratio_limsup_est - out.ratio_liminf_est) / std::max(out.ratio_liminf_est, 1e-300);
  out.tail_slope = least_squares(L, m).slope;

  // Elasticity of the increments dm/dL on the tail.
  std::vector<double> lx, ly;
  bool increments_positive = true;
  for (std::size_t i = 0; i + 1 < L.size(); ++i) {
    const double d = (m[i + 1] - m[i]) / (L[i + 1] - L[i]);
    if (!(d > 0.0)) {
      increments_positive = false;
      break;
    }
    lx.push_back(std::log(0.5 * (L[i] + L[i + 1])));
    ly.push_back(std::log(d));
  }
  out.elasticity = increments_positive ? least_squares(lx, ly).slope : 0.0;

  const double max_m = *std::max_element(out.m_values.begin(), out.m_values.end());
  const double t = options.elasticity_threshold;
  if (out.tail_slope < options.slope_threshold && max_m <= options.c0_factor * out.m_values.front()) {
    out.regime = Regime::NoLoss;
  } else if (out.tail_slope < options.slope_threshold || (increments_positive && out.elasticity < -t)) {
    out.regime = Regime::ArbitrarilySmall;
  } else if (increments_positive && out.elasticity > t) {
    out.regime = Regime::Infinite;
  } else if (out.tail_variation < options.variation_threshold) {
    out.regime = Regime::Finite;
    out.loss_bound = out.ratio_limsup_est;
  } else {
    out.regime = Regime::Infinite;
  }
  return out;
}

GrowthFit fit_growth_exponent(const ClassParams& params, const std::vector<double>& lambda_grid) {
  if (lambda_grid.size() < 3) throw Error(ErrorKind::GridTooSmall, "growth fit needs at least 3 points");
  const auto rows = compute_m_grid(params, lambda_grid);
  const std::size_t n = lambda_grid.size();
  const std::size_t t0 = n >= 9 ? tail_start(n) : 0;
  std::vector<double> x, y;
  for (std::size_t i = t0; i < n; ++i) {
    if (!(rows[i].m > 0.0)) throw Error(ErrorKind::PoorFit, "m(lambda) is not positive on the tail");
    x.push_back(std::log(lambda_grid[i]));
    y.push_back(std::log(rows[i].m));
  }
  const Line l = least_squares(x, y);
  if (l.r_squared < 0.99) throw Error(ErrorKind::PoorFit, "tail R^2 = " + io::num(l.r_squared));
  return {l.slope, l.intercept, l.r_squared};
}

std::string key_quantity_csv(const std::vector<KeyQuantityResult>& rows) {
  std::string out = "lambda,m,s_star,first_term,second_term,branch,m_over_loglambda\n";
  for (const auto& r : rows) {
    const double L = std::log(r.lambda);
    out += io::csv_row({io::num(r.lambda), io::num(r.m), io::num(r.s_star), io::num(r.first_term),
                        io::num(r.second_term), to_string(r.branch), L > 0.0 ? io::num(r.m / L) : "nan"});
  }
  return out;
}

}  // namespace deriloss::keyquantity
