#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deriloss/activator.hpp"
#include "deriloss/keyquantity.hpp"
#include "deriloss/moduli.hpp"

namespace deriloss::energy {

using activator::PiecewiseCoefficient;

/// c_eps(t) = (1/eps) * integral of c over [t, t + eps], with c continued
/// by c(T0) beyond T0.
class MollifiedCoefficient {
public:
  MollifiedCoefficient(PiecewiseCoefficient base, double eps);

  double value(double t) const;
  double derivative(double t) const;
  double eps() const { return eps_; }
  const PiecewiseCoefficient& base() const { return base_; }

private:
  double extended(double t) const;
  double integral(double x, double y) const;

  PiecewiseCoefficient base_;
  double eps_;
};

MollifiedCoefficient mollify(const PiecewiseCoefficient& c, double eps);

struct MollifierCheck {
  double min_value = 0.0;
  double max_value = 0.0;
  double max_distance = 0.0;    // max |c_eps - c|
  double max_derivative = 0.0;  // max |c_eps'|
  double omega_eps = 0.0;       // omega(eps)
  bool bounds_ok = true;
  bool distance_ok = true;
  bool derivative_ok = true;
  bool pass() const { return bounds_ok && distance_ok && derivative_ok; }
};

/// Samples the three mollifier estimates on a uniform grid of [0, T0].
MollifierCheck check_mollifier(const MollifiedCoefficient& m, const moduli::ClassParams& params,
                               std::size_t samples);

struct State {
  double u = 0.0;
  double v = 0.0;  // u'
};

struct SolveOptions {
  /// Extra sample times, merged into the grid.
  std::vector<double> extra_times;
  /// Add every segment endpoint to the grid.
  bool include_breakpoints = true;
  /// Use exact propagators where a segment admits one; otherwise everything
  /// goes through the adaptive integrator.
  bool prefer_closed_form = true;
  double rel_tol = 1e-13;
  /// Also record F with the mollified coefficient for this eps.
  std::optional<double> mollify_eps;
};

struct EnergyTrace {
  double lambda = 0.0;
  std::vector<double> times;
  std::vector<double> u;
  std::vector<double> u_prime;
  std::vector<double> E;  // u'^2 + lambda^2 u^2
  std::vector<double> F;  // u'^2 + lambda^2 c u^2
  std::optional<std::vector<double>> F_eps;
  double eps = 0.0;

  /// Index of the first sample with time >= t.
  std::size_t index_at_or_after(double t) const;
};

/// Solves u'' + lambda^2 c(t) u = 0 on [0, T0] with u(0) = u0, u'(0) = u1.
/// Samples: sample_count uniform points plus breakpoints and extra times.
EnergyTrace solve_ode(const PiecewiseCoefficient& c, double lambda, double u0, double u1, std::size_t sample_count,
                      const SolveOptions& options = {});

/// Moves a state from time `from` to time `to` (either direction).
State propagate(const PiecewiseCoefficient& c, double lambda, State s, double from, double to,
                const SolveOptions& options = {});

/// State times exp(log_scale); keeps huge growth inside the double range.
struct ScaledState {
  State s;
  double log_scale = 0.0;
  double log_E(double lambda) const;  // log(u'^2 + lambda^2 u^2)
};

/// Like propagate, renormalizing after every segment.
ScaledState propagate_scaled(const PiecewiseCoefficient& c, double lambda, ScaledState s, double from, double to,
                             const SolveOptions& options = {});

/// Columns t,u,u_prime,E,F.
std::string trace_csv(const EnergyTrace& tr);

struct UpperBoundRow {
  double lambda = 0.0;
  double m = 0.0;
  double s_split = 0.0;
  double log_ratio_max = 0.0;  // log max_t E(t)/E(0) over both data sets
  double log_bound = 0.0;      // log(M1) + M2 m
  double phase1_log_measured = 0.0;  // max over [0, s] of log F_eps(t)/F_eps(0) - allowed(t)
  double phase1_log_factor = 0.0;    // allowed exponent at t = s
  double phase2_log_measured = 0.0;  // max over [s, T0] of log F(t)/F(s) - allowed(t)
  double phase2_log_factor = 0.0;    // (1/mu1) integral_s^T0 theta
  bool phases_ok = true;
  bool pass = true;
  std::optional<double> violation_t;
};

struct UpperBoundOptions {
  std::size_t sample_count = 2000;
  /// Mollification scale for the first phase; defaults to 1/lambda.
  std::optional<double> eps_override;
  SolveOptions solver;
};

struct UpperBoundReport {
  std::vector<UpperBoundRow> rows;
  bool all_pass() const;
};

/// For each lambda solves with data (0,1) and (1,0) and checks
/// max E(t)/E(0) <= M1 exp(M2 m(lambda)) (1 + 1e-6), replaying the two-phase
/// argument with the split at s_lambda.
UpperBoundReport verify_upper_bound(const PiecewiseCoefficient& c, const moduli::ClassParams& params,
                                    const std::vector<double>& lambda_grid, const UpperBoundOptions& options = {});

struct LowerBoundRow {
  double lambda = 0.0;
  double m = 0.0;
  keyquantity::Branch branch = keyquantity::Branch::Omega;
  double b_lambda = 0.0;
  double log_bound = 0.0;          // log(M4) + 2 M3 m
  double min_log_E_after_b = 0.0;  // min over sampled t >= b of log E(t)
  double log_E_at_b = 0.0;
  double log_E_at_b_expected = 0.0;  // closed-form growth across the modified interval
  bool endpoint_ok = true;
  bool decay_ok = true;
  bool pass = true;
  std::size_t blocks = 0;
};

struct ActivatorPredicate {
  double delta = 0.0;
  std::optional<double> lambda_delta;
  double log_M_delta = 0.0;
  bool certified = false;
};

struct LowerBoundOptions {
  std::size_t sample_count = 2000;
  activator::BuildOptions build;
  SolveOptions solver;
  /// Multiplies M3 in the claimed bound. Only the self-test changes it.
  double m3_scale = 1.0;
};

struct LowerBoundReport {
  std::vector<LowerBoundRow> rows;
  std::vector<ActivatorPredicate> predicates;
  double log_M4 = 0.0;
  bool all_pass() const;
};

/// Builds the activator per lambda, solves with data (0,1), and checks the
/// exponential lower bound on [b_lambda, T0], the closed-form growth at
/// b_lambda, the decay control on [b_lambda, T0], and the asymptotic
/// activator predicate for delta in {T0/10, T0/100}.
LowerBoundReport verify_lower_bound(const activator::SeedCoefficient& seed, const std::vector<double>& lambda_grid,
                                    const LowerBoundOptions& options = {});

std::string format_upper_report(const UpperBoundReport& r);
std::string format_lower_report(const LowerBoundReport& r);

}  // namespace deriloss::energy
