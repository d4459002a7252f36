#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace deriloss::moduli {

enum class ModulusKind { Linear, Holder, LogLipschitz, LogPower, RootExp, LogLogLip, Constant, Custom };

/// Modulus of continuity omega.
///
/// The catalog formulas (sigma |log sigma|^p and friends) only behave like a
/// modulus near zero, so each kind with a logarithm carries a knee sigma0
/// below which the formula is used verbatim; beyond the knee omega continues
/// linearly, omega(sigma) = omega(sigma0) sigma / sigma0. This keeps omega
/// increasing and sigma/omega nondecreasing on all of (0, inf).
class ModulusSpec {
public:
  static ModulusSpec linear();
  static ModulusSpec holder(double alpha);
  static ModulusSpec log_lipschitz();
  static ModulusSpec log_power(double p);
  static ModulusSpec root_exp(double r);
  static ModulusSpec log_log_lip();
  static ModulusSpec constant(double level);
  /// `knee` <= 0 means the function is used on the whole half-line.
  static ModulusSpec custom(std::function<double(double)> fn, std::string label, double knee = 0.0);

  double operator()(double sigma) const;

  ModulusKind kind() const { return kind_; }
  double param() const { return param_; }
  double knee() const { return knee_; }
  const std::string& label() const { return label_; }
  bool limit_case() const { return kind_ == ModulusKind::Constant; }

private:
  double raw(double sigma) const;

  ModulusKind kind_ = ModulusKind::Linear;
  double param_ = 0.0;
  double knee_ = 0.0;
  std::string label_ = "linear";
  std::function<double(double)> custom_;
};

enum class ThetaKind { PowerLaw, LogOverT, ExpInv, PowExpInv, Bounded, Custom };

/// Nonincreasing bound theta(t) on |c'(t)|, possibly blowing up at t = 0.
class ThetaSpec {
public:
  static ThetaSpec power_law(double beta, double scale = 1.0);
  static ThetaSpec log_over_t(double scale = 1.0);
  static ThetaSpec exp_inv(double scale = 1.0);
  static ThetaSpec pow_exp_inv(double beta, double scale = 1.0);
  static ThetaSpec bounded(double scale);
  /// `integral(s, T0)` may be empty, in which case quadrature is used.
  static ThetaSpec custom(std::function<double(double)> fn, std::string label,
                          std::function<double(double, double)> integral = {}, bool integrable_at_zero = false);

  double operator()(double t) const;

  ThetaKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double scale() const { return scale_; }
  const std::string& label() const { return label_; }
  bool has_closed_form() const;
  bool integrable_at_zero() const;

  /// Closed form of the integral over [s, T0]; only valid if has_closed_form().
  double closed_form_integral(double s, double T0) const;

private:
  ThetaKind kind_ = ThetaKind::PowerLaw;
  double beta_ = 1.0;
  double scale_ = 1.0;
  std::string label_;
  std::function<double(double)> custom_;
  std::function<double(double, double)> custom_integral_;
  bool custom_integrable_ = false;
};

struct ClassParams {
  double T0 = 1.0;
  double mu1 = 1.0;
  double mu2 = 2.0;
  ModulusSpec omega = ModulusSpec::linear();
  /// Empty means the limit case without a derivative bound.
  std::optional<ThetaSpec> theta;

  /// Throws InvalidArgument unless 0 < mu1 < mu2 and T0 > 0.
  void validate() const;
};

struct AxiomResult {
  std::string name;
  bool pass = true;
  /// First violating pair (or point, with witness_next == witness).
  double witness = 0.0;
  double witness_next = 0.0;
  std::string detail;
};

struct AxiomReport {
  std::vector<AxiomResult> axioms;
  bool limit_case = false;
  bool all_pass() const;
  const AxiomResult* find(const std::string& name) const;
};

AxiomReport check_modulus_axioms(const ModulusSpec& omega, int grid_depth);
AxiomReport check_theta_axioms(const ThetaSpec& theta, double T0, int grid_depth);

/// Integral of theta over [s, T0]: closed form where available, otherwise
/// adaptive quadrature. s = 0 is accepted only for integrable kinds.
double theta_integral(const ThetaSpec& theta, double s, double T0);

/// Direct quadrature of theta over [s, T0], ignoring any closed form.
double theta_integral_quadrature(const ThetaSpec& theta, double s, double T0, double rel_tol = 1e-12);

/// Catalog keys: linear, holder:A, loglip, logpower:P, rootexp:R, logloglip,
/// const:LEVEL, and weak:<key> for the same modulus times one more |log sigma|.
ModulusSpec parse_modulus(const std::string& key);
/// Catalog keys: power:BETA:K, logovert:K, expinv:K, powexpinv:BETA:K,
/// bounded:K, none (returns empty).
std::optional<ThetaSpec> parse_theta(const std::string& key);

/// omega weakened by one logarithmic factor; turns the finite-loss rows Infinite.
ModulusSpec weaken_by_log(const ModulusSpec& omega);

struct CatalogPair {
  std::string omega_key;
  std::string theta_key;
};
/// The twelve (omega, theta) pairs used for oracle comparisons.
const std::vector<CatalogPair>& catalog_pairs();

}  // namespace deriloss::moduli
