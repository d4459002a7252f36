#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "deriloss/moduli.hpp"

namespace deriloss::keyquantity {

enum class Branch { Omega, Theta };
std::string to_string(Branch b);

/// m(lambda) = min over s in [0, T0] of A s + integral_s^T0 theta,
/// with A = lambda omega(1/lambda).
struct KeyQuantityResult {
  double lambda = 0.0;
  double A = 0.0;
  double m = 0.0;
  double s_star = 0.0;
  double first_term = 0.0;
  double second_term = 0.0;
  Branch branch = Branch::Omega;
  /// Point where the integral from s_star has reached half its total;
  /// theta branch only.
  std::optional<double> s_hat;
};

KeyQuantityResult compute_m(const moduli::ClassParams& params, double lambda);

/// compute_m over a grid, in parallel, results in grid order.
std::vector<KeyQuantityResult> compute_m_grid(const moduli::ClassParams& params, const std::vector<double>& grid);

enum class Regime { NoLoss, ArbitrarilySmall, Finite, Infinite };
std::string to_string(Regime r);

struct ClassifyOptions {
  double c0_factor = 10.0;           // NoLoss needs max m <= c0_factor * m(lambda_min)
  double slope_threshold = 0.01;     // tail slope of m against log(lambda)
  double elasticity_threshold = 0.2; // |d log(dm/dL) / d log L| beyond this is decisive
  double variation_threshold = 0.25; // tail spread of m / log(lambda)
};

struct RegimeClassification {
  Regime regime = Regime::NoLoss;
  double ratio_liminf_est = 0.0;
  double ratio_limsup_est = 0.0;
  std::optional<double> loss_bound;
  std::vector<double> lambda_grid;
  std::vector<double> m_values;
  /// Diagnostics behind the verdict.
  double tail_slope = 0.0;
  double elasticity = 0.0;
  double tail_variation = 0.0;
};

/// Decision on the last third of a geometric grid (>= 8 points, span >= 1e6):
///  * NoLoss: m flat on the tail and max m <= c0_factor * m(lambda_min);
///  * otherwise let L = log(lambda) and r the log-log slope of dm/dL against L.
///    ArbitrarilySmall if the tail slope is below slope_threshold or r < -t;
///    Infinite if r > t; else Finite when m/L varies by less than
///    variation_threshold on the tail, Infinite otherwise.
RegimeClassification classify_regime(const moduli::ClassParams& params, const std::vector<double>& lambda_grid,
                                     const ClassifyOptions& options = {});

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Least-squares slope of log m against log lambda on the last third of the
/// grid. Throws PoorFit when R^2 < 0.99.
GrowthFit fit_growth_exponent(const moduli::ClassParams& params, const std::vector<double>& lambda_grid);

/// `points` values from lo to hi, equally spaced in log.
std::vector<double> geometric_grid(double lo, double hi, int points);

/// Columns: lambda, m, s_star, first_term, second_term, branch, m_over_loglambda.
std::string key_quantity_csv(const std::vector<KeyQuantityResult>& rows);

}  // namespace deriloss::keyquantity
