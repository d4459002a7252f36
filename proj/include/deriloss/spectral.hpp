#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deriloss/activator.hpp"
#include "deriloss/moduli.hpp"

namespace deriloss::spectral {

struct LambdaSequenceOptions {
  double lambda_min = 10.0;
  double lambda_max = 1e12;
  int points_per_decade = 100;
  /// When set, every lambda_n must also pass build_activator for this seed;
  /// failing grid points are skipped.
  std::optional<activator::SeedCoefficient> seed;
};

struct LambdaSequence {
  std::vector<double> lambdas;
  std::vector<double> phis;  // M3 m(lambda_n)
  /// Set when the rate could not reach some n below lambda_max; the
  /// sequence is truncated before that n.
  bool rate_too_slow = false;
  std::optional<int> first_unreached;
};

/// lambda_n = smallest grid lambda with M3 m(lambda) >= n, strictly
/// increasing in n.
LambdaSequence pick_lambda_sequence(const moduli::ClassParams& params, int n_max,
                                    const LambdaSequenceOptions& options = {});

/// min over the last half of phi_n / log lambda_n (a liminf estimate).
double rate_delta(const LambdaSequence& seq);

/// Monotone-acceleration statistics for a partial-sum sequence kept in log form.
struct TrendWitness {
  bool strictly_increasing = false;
  double first_quartile_log_increment = 0.0;  // log of mean increment over the first quarter
  double last_quartile_log_increment = 0.0;   // same over the last quarter
  bool holds = false;  // strictly increasing and last quarter increments exceed the first
};

/// Decides the witness from log-terms log x_1..log x_N.
TrendWitness trend_witness(const std::vector<double>& log_terms);

struct ProbeSeries {
  double t = 0.0;
  std::vector<double> log_E;               // per n
  std::vector<double> log_solution_partial;  // per N
  TrendWitness trend;
};

struct SpectralDemo {
  std::vector<double> lambdas;
  std::vector<double> phis;
  std::vector<double> log_a;  // -phi/4
  double beta = 0.0;
  double gamma_reg = 0.0;
  /// min over the last half of phi_n / log lambda_n.
  double delta = 0.0;
  std::vector<double> log_data_partial;
  /// Index N (1-based) after which every data term is below 1e-8, if any
  /// such N lies inside the last quarter.
  std::optional<std::size_t> data_converged_after;
  double data_last_term = 0.0;
  std::vector<ProbeSeries> probes;
  bool rate_too_slow = false;
};

/// Truncated series check with the per-n activator for lambda_n standing in
/// for the single coefficient of the model case.
SpectralDemo demo_loss(const moduli::ClassParams& params, const activator::SeedCoefficient& seed,
                       const LambdaSequence& seq, double beta, double gamma_reg, const std::vector<double>& t_probe);

/// Columns n, lambda_n, phi_n, a_n, E_at_<t>..., data_partial, solution_partial_<t>...,
/// then log_E_at_<t>... and log_solution_partial_<t>...
std::string demo_csv(const SpectralDemo& d);
std::string format_demo(const SpectralDemo& d);

/// log(sum exp(x_i)) for a running sum, safe for huge exponents.
double log_add(double a, double b);

}  // namespace deriloss::spectral
