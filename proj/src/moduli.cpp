#include "deriloss/moduli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "deriloss/error.hpp"
#include "deriloss/quadrature.hpp"

namespace deriloss::moduli {

namespace {

constexpr double kSigmaFloor = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_real(const std::string& text, const std::string& key) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw Error(ErrorKind::ConfigError, "bad number '" + text + "' in key '" + key + "'");
  return v;
}

std::vector<std::string> split(const std::string& key, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : key) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

// Smallest L >= 4 with R (log L + 2) / (2 sqrt L) <= 0.9, which keeps
// sigma exp(R sqrt(L) log L) increasing for |log sigma| >= L.
double rootexp_log_knee(double r) {
  double L = 4.0;
  while (r * (std::log(L) + 2.0) / (2.0 * std::sqrt(L)) > 0.9) L *= 1.25;
  return std::exp(-L);
}

}  // namespace

// ---------------------------------------------------------------- ModulusSpec

ModulusSpec ModulusSpec::linear() { return ModulusSpec{}; }

ModulusSpec ModulusSpec::holder(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "Holder exponent must lie in (0, 1]");
  ModulusSpec m;
  m.kind_ = ModulusKind::Holder;
  m.param_ = alpha;
  m.label_ = "holder:" + fmt_num(alpha);
  return m;
}

ModulusSpec ModulusSpec::log_lipschitz() {
  ModulusSpec m;
  m.kind_ = ModulusKind::LogLipschitz;
  m.param_ = 1.0;
  m.knee_ = std::exp(-1.0);
  m.label_ = "loglip";
  return m;
}

ModulusSpec ModulusSpec::log_power(double p) {
  require(p > 0.0, "LogPower exponent must be positive");
  ModulusSpec m;
  m.kind_ = ModulusKind::LogPower;
  m.param_ = p;
  m.knee_ = std::exp(-p);
  m.label_ = "logpower:" + fmt_num(p);
  return m;
}

ModulusSpec ModulusSpec::root_exp(double r) {
  require(r > 0.0, "RootExp radius must be positive");
  ModulusSpec m;
  m.kind_ = ModulusKind::RootExp;
  m.param_ = r;
  m.knee_ = std::exp(-r * r / 4.0);
  m.label_ = "rootexp:" + fmt_num(r);
  return m;
}

ModulusSpec ModulusSpec::log_log_lip() {
  ModulusSpec m;
  m.kind_ = ModulusKind::LogLogLip;
  m.knee_ = std::exp(-std::exp(1.0));
  m.label_ = "logloglip";
  return m;
}

ModulusSpec ModulusSpec::constant(double level) {
  require(level > 0.0, "Constant modulus level must be positive");
  ModulusSpec m;
  m.kind_ = ModulusKind::Constant;
  m.param_ = level;
  m.label_ = "const:" + fmt_num(level);
  return m;
}

ModulusSpec ModulusSpec::custom(std::function<double(double)> fn, std::string label, double knee) {
  require(static_cast<bool>(fn), "custom modulus needs a function");
  ModulusSpec m;
  m.kind_ = ModulusKind::Custom;
  m.custom_ = std::move(fn);
  m.knee_ = knee > 0.0 ? knee : 0.0;
  m.label_ = std::move(label);
  return m;
}

double ModulusSpec::raw(double sigma) const {
  const double L = -std::log(sigma);
  switch (kind_) {
    case ModulusKind::Linear: return sigma;
    case ModulusKind::Holder: return std::pow(sigma, param_);
    case ModulusKind::LogLipschitz: return sigma * std::abs(L);
    case ModulusKind::LogPower: return sigma * std::pow(std::abs(L), param_);
    case ModulusKind::RootExp: return sigma * std::exp(param_ * std::sqrt(std::abs(L)));
    case ModulusKind::LogLogLip: return sigma * std::abs(L) * std::log(std::abs(L));
    case ModulusKind::Constant: return param_;
    case ModulusKind::Custom: return custom_(sigma);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ModulusSpec::operator()(double sigma) const {
  sigma = std::max(sigma, kSigmaFloor);
  if (knee_ > 0.0 && sigma > knee_) return raw(knee_) * (sigma / knee_);
  return raw(sigma);
}

// ------------------------------------------------------------------ ThetaSpec

ThetaSpec ThetaSpec::power_law(double beta, double scale) {
  require(beta > 0.0 && scale > 0.0, "PowerLaw needs beta > 0 and K > 0");
  ThetaSpec t;
  t.kind_ = ThetaKind::PowerLaw;
  t.beta_ = beta;
  t.scale_ = scale;
  t.label_ = "power:" + fmt_num(beta) + ":" + fmt_num(scale);
  return t;
}

ThetaSpec ThetaSpec::log_over_t(double scale) {
  require(scale > 0.0, "LogOverT needs K > 0");
  ThetaSpec t;
  t.kind_ = ThetaKind::LogOverT;
  t.scale_ = scale;
  t.label_ = "logovert:" + fmt_num(scale);
  return t;
}

ThetaSpec ThetaSpec::exp_inv(double scale) {
  require(scale > 0.0, "ExpInv needs K > 0");
  ThetaSpec t;
  t.kind_ = ThetaKind::ExpInv;
  t.scale_ = scale;
  t.label_ = "expinv:" + fmt_num(scale);
  return t;
}

ThetaSpec ThetaSpec::pow_exp_inv(double beta, double scale) {
  require(beta > 0.0 && scale > 0.0, "PowExpInv needs beta > 0 and K > 0");
  ThetaSpec t;
  t.kind_ = ThetaKind::PowExpInv;
  t.beta_ = beta;
  t.scale_ = scale;
  t.label_ = "powexpinv:" + fmt_num(beta) + ":" + fmt_num(scale);
  return t;
}

ThetaSpec ThetaSpec::bounded(double scale) {
  require(scale > 0.0, "Bounded needs K > 0");
  ThetaSpec t;
  t.kind_ = ThetaKind::Bounded;
  t.scale_ = scale;
  t.label_ = "bounded:" + fmt_num(scale);
  return t;
}

ThetaSpec ThetaSpec::custom(std::function<double(double)> fn, std::string label,
                            std::function<double(double, double)> integral, bool integrable_at_zero) {
  require(static_cast<bool>(fn), "custom theta needs a function");
  ThetaSpec t;
  t.kind_ = ThetaKind::Custom;
  t.custom_ = std::move(fn);
  t.custom_integral_ = std::move(integral);
  t.custom_integrable_ = integrable_at_zero;
  t.label_ = std::move(label);
  return t;
}

double ThetaSpec::operator()(double t) const {
  switch (kind_) {
    case ThetaKind::PowerLaw: return scale_ * std::pow(t, -beta_);
    case ThetaKind::LogOverT: return scale_ * std::abs(std::log(t)) / t;
    case ThetaKind::ExpInv: return scale_ * std::exp(1.0 / t);
    case ThetaKind::PowExpInv: return scale_ * std::pow(t, -beta_) * std::exp(1.0 / t);
    case ThetaKind::Bounded: return scale_;
    case ThetaKind::Custom: return custom_(t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool ThetaSpec::has_closed_form() const {
  switch (kind_) {
    case ThetaKind::PowExpInv: return beta_ == 1.0 || beta_ == 2.0;
    case ThetaKind::Custom: return static_cast<bool>(custom_integral_);
    default: return true;
  }
}

bool ThetaSpec::integrable_at_zero() const {
  switch (kind_) {
    case ThetaKind::PowerLaw: return beta_ < 1.0;
    case ThetaKind::Bounded: return true;
    case ThetaKind::Custom: return custom_integrable_;
    default: return false;
  }
}

double ThetaSpec::closed_form_integral(double s, double T0) const {
  const double K = scale_;
  switch (kind_) {
    case ThetaKind::PowerLaw:
      if (beta_ == 1.0) return K * std::log(T0 / s);
      return K * (std::pow(T0, 1.0 - beta_) - std::pow(s, 1.0 - beta_)) / (1.0 - beta_);
    case ThetaKind::LogOverT: {
      auto G = [](double t) {
        const double l = std::log(t);
        return 0.5 * l * std::abs(l);
      };
      return K * (G(T0) - G(s));
    }
    case ThetaKind::ExpInv: {
      // Antiderivative t e^{1/t} - Ei(1/t).
      if (1.0 / s > 700.0) return kInf;
      auto G = [](double t) { return t * std::exp(1.0 / t) - std::expint(1.0 / t); };
      return K * (G(T0) - G(s));
    }
    case ThetaKind::PowExpInv:
      if (1.0 / s > 700.0) return kInf;
      if (beta_ == 1.0) return K * (std::expint(1.0 / s) - std::expint(1.0 / T0));
      return K * (std::exp(1.0 / s) - std::exp(1.0 / T0));
    case ThetaKind::Bounded: return K * (T0 - s);
    case ThetaKind::Custom: return custom_integral_(s, T0);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// --------------------------------------------------------------- ClassParams

void ClassParams::validate() const {
  if (!(T0 > 0.0) || !std::isfinite(T0)) throw Error(ErrorKind::InvalidArgument, "T0 must be positive");
  if (!(mu1 > 0.0) || !(mu2 > mu1) || !std::isfinite(mu2))
    throw Error(ErrorKind::InvalidArgument, "need 0 < mu1 < mu2");
}

// -------------------------------------------------------------------- Axioms

bool AxiomReport::all_pass() const {
  return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.pass; });
}

const AxiomResult* AxiomReport::find(const std::string& name) const {
  for (const auto& a : axioms)
    if (a.name == name) return &a;
  return nullptr;
}

AxiomReport check_modulus_axioms(const ModulusSpec& omega, int grid_depth) {
  if (grid_depth < 4) throw Error(ErrorKind::InvalidArgument, "grid_depth must be at least 4");
  // Ascending grid 2^-depth, ..., 2^-1.
  std::vector<double> sig;
  std::vector<double> val;
  for (int k = grid_depth; k >= 1; --k) {
    const double s = std::ldexp(1.0, -k);
    const double w = omega(s);
    if (!std::isfinite(w))
      throw Error(ErrorKind::NonFiniteEvaluation, "omega(" + fmt_num(s) + ") = " + fmt_num(w));
    sig.push_back(s);
    val.push_back(w);
  }

  AxiomReport rep;
  rep.limit_case = omega.limit_case();

  AxiomResult positive{"positive", true, 0, 0, ""};
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (!(val[i] > 0.0)) {
      positive = {"positive", false, sig[i], sig[i], "omega <= 0"};
      break;
    }
  }
  rep.axioms.push_back(positive);

  AxiomResult vanishing{"vanishing", true, 0, 0, ""};
  if (rep.limit_case) {
    vanishing.detail = "exempt (limit case)";
  } else {
    const double w0 = omega(kSigmaFloor);
    if (!std::isfinite(w0)) throw Error(ErrorKind::NonFiniteEvaluation, "omega at the floor is not finite");
    if (!(w0 < val.front() && w0 <= 1e-2 * val.back()))
      vanishing = {"vanishing", false, kSigmaFloor, sig.front(), "omega does not tend to zero"};
  }
  rep.axioms.push_back(vanishing);

  AxiomResult monotone{"nondecreasing", true, 0, 0, ""};
  AxiomResult ratio{"ratio_nondecreasing", true, 0, 0, ""};
  for (std::size_t i = 0; i + 1 < sig.size(); ++i) {
    if (monotone.pass && val[i] > val[i + 1])
      monotone = {"nondecreasing", false, sig[i], sig[i + 1], "omega decreases"};
    // Small relative slack absorbs rounding on exactly-linear stretches.
    if (ratio.pass && sig[i] / val[i] > (sig[i + 1] / val[i + 1]) * (1.0 + 1e-12))
      ratio = {"ratio_nondecreasing", false, sig[i], sig[i + 1], "sigma/omega decreases"};
  }
  rep.axioms.push_back(monotone);
  rep.axioms.push_back(ratio);
  return rep;
}

AxiomReport check_theta_axioms(const ThetaSpec& theta, double T0, int grid_depth) {
  if (!(T0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "T0 must be positive");
  if (grid_depth < 1) throw Error(ErrorKind::InvalidArgument, "grid_depth must be positive");

  // Log-spaced points strictly inside (T0 2^-depth, T0), ascending.
  const int n = 8 * grid_depth;
  std::vector<double> ts;
  for (int j = 1; j < n; ++j) ts.push_back(T0 * std::exp2(-grid_depth * (1.0 - double(j) / n)));

  AxiomReport rep;
  AxiomResult positive{"positive", true, 0, 0, ""};
  AxiomResult monotone{"nonincreasing", true, 0, 0, ""};
  double prev = kInf;
  double prev_t = 0.0;
  for (double t : ts) {
    const double v = theta(t);
    if (std::isnan(v)) throw Error(ErrorKind::NonFiniteEvaluation, "theta(" + fmt_num(t) + ") is NaN");
    if (positive.pass && !(v > 0.0)) positive = {"positive", false, t, t, "theta <= 0"};
    if (monotone.pass && v > prev) monotone = {"nonincreasing", false, prev_t, t, "theta increases"};
    prev = v;
    prev_t = t;
  }
  rep.axioms.push_back(positive);
  rep.axioms.push_back(monotone);

  // The integral: zero at T0, nonincreasing in s, and consistent with
  // quadrature where a closed form exists.
  AxiomResult at_end{"integral_zero_at_T0", theta_integral(theta, T0, T0) == 0.0, T0, T0, ""};
  rep.axioms.push_back(at_end);

  AxiomResult integral_mono{"integral_nonincreasing", true, 0, 0, ""};
  AxiomResult consistent{"integral_consistent", true, 0, 0, ""};
  double prev_int = kInf;
  double prev_s = 0.0;
  for (int j = 0; j < 20; ++j) {
    const double s = T0 * std::exp2(-grid_depth * (1.0 - (j + 0.5) / 20.0));
    if (!std::isfinite(theta(s))) continue;
    const double I = theta_integral(theta, s, T0);
    if (!std::isfinite(I)) continue;
    if (integral_mono.pass && I > prev_int && j > 0)
      integral_mono = {"integral_nonincreasing", false, prev_s, s, "integral increases"};
    prev_int = I;
    prev_s = s;
    if (theta.has_closed_form()) {
      const double Q = theta_integral_quadrature(theta, s, T0);
      const double rel = std::abs(I - Q) / std::max(std::abs(Q), 1e-300);
      if (rel > 1e-6)
        throw Error(ErrorKind::IntegralMismatch, "closed form " + fmt_num(I) + " vs quadrature " + fmt_num(Q) +
                                                     " at s = " + fmt_num(s));
      if (consistent.pass && rel > 1e-8)
        consistent = {"integral_consistent", false, s, s, "relative gap " + fmt_num(rel)};
    }
  }
  rep.axioms.push_back(integral_mono);
  rep.axioms.push_back(consistent);
  return rep;
}

double theta_integral_quadrature(const ThetaSpec& theta, double s, double T0, double rel_tol) {
  if (s == T0) return 0.0;
  if (s == 0.0) {
    if (!theta.integrable_at_zero()) throw Error(ErrorKind::DivergentIntegral, "theta is not integrable at zero");
    return quad::integrate_from_zero([&theta](double t) { return theta(t); }, T0, rel_tol);
  }
  if (!std::isfinite(theta(s))) return kInf;
  return quad::integrate_log([&theta](double t) { return theta(t); }, s, T0, rel_tol);
}

double theta_integral(const ThetaSpec& theta, double s, double T0) {
  if (!(s >= 0.0) || s > T0) throw Error(ErrorKind::InvalidArgument, "theta_integral needs 0 <= s <= T0");
  if (s == T0) return 0.0;
  if (s == 0.0) {
    if (!theta.integrable_at_zero()) throw Error(ErrorKind::DivergentIntegral, "theta is not integrable at zero");
    switch (theta.kind()) {
      case ThetaKind::PowerLaw:
        return theta.scale() * std::pow(T0, 1.0 - theta.beta()) / (1.0 - theta.beta());
      case ThetaKind::Bounded: return theta.scale() * T0;
      default: break;
    }
    if (theta.has_closed_form()) return theta.closed_form_integral(0.0, T0);
    return theta_integral_quadrature(theta, 0.0, T0, 1e-12);
  }
  if (theta.has_closed_form()) {
    const double v = theta.closed_form_integral(s, T0);
    if (std::isnan(v)) throw Error(ErrorKind::NonFiniteEvaluation, "theta integral is NaN at s = " + fmt_num(s));
    return v;
  }
  return theta_integral_quadrature(theta, s, T0, 1e-12);
}

// ------------------------------------------------------------------- Catalog

ModulusSpec weaken_by_log(const ModulusSpec& omega) {
  switch (omega.kind()) {
    case ModulusKind::Linear: return ModulusSpec::log_lipschitz();
    case ModulusKind::LogLipschitz: return ModulusSpec::log_power(2.0);
    case ModulusKind::LogPower: return ModulusSpec::log_power(omega.param() + 1.0);
    case ModulusKind::Holder: {
      const double a = omega.param();
      return ModulusSpec::custom(
          [a](double s) { return std::pow(s, a) * -std::log(s); }, "weak:" + omega.label(), std::exp(-1.0 / a - 1.0));
    }
    case ModulusKind::LogLogLip:
      return ModulusSpec::custom(
          [](double s) {
            const double L = -std::log(s);
            return s * L * L * std::log(L);
          },
          "weak:logloglip", std::exp(-4.0));
    case ModulusKind::RootExp: {
      // A plain |log sigma| factor would be swallowed by exp(R sqrt|log sigma|)
      // with a larger R, so the extra logarithm goes into the exponent.
      const double r = omega.param();
      return ModulusSpec::custom(
          [r](double s) {
            const double L = -std::log(s);
            return s * std::exp(r * std::sqrt(L) * std::log(L));
          },
          "weak:" + omega.label(), rootexp_log_knee(r));
    }
    case ModulusKind::Constant:
    case ModulusKind::Custom: break;
  }
  throw Error(ErrorKind::InvalidArgument, "no logarithmic weakening for " + omega.label());
}

ModulusSpec parse_modulus(const std::string& key) {
  if (key.rfind("weak:", 0) == 0) return weaken_by_log(parse_modulus(key.substr(5)));
  const auto parts = split(key, ':');
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t i) {
    if (parts.size() <= i) throw Error(ErrorKind::ConfigError, "missing parameter in omega key '" + key + "'");
    return parse_real(parts[i], key);
  };
  auto arity = [&](std::size_t n) {
    if (parts.size() != n + 1) throw Error(ErrorKind::ConfigError, "wrong parameter count in omega key '" + key + "'");
  };
  try {
    if (kind == "linear") { arity(0); return ModulusSpec::linear(); }
    if (kind == "holder") { arity(1); return ModulusSpec::holder(arg(1)); }
    if (kind == "loglip") { arity(0); return ModulusSpec::log_lipschitz(); }
    if (kind == "logpower") { arity(1); return ModulusSpec::log_power(arg(1)); }
    if (kind == "rootexp") { arity(1); return ModulusSpec::root_exp(arg(1)); }
    if (kind == "logloglip") { arity(0); return ModulusSpec::log_log_lip(); }
    if (kind == "const") { arity(1); return ModulusSpec::constant(arg(1)); }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::ConfigError, e.what());
    throw;
  }
  throw Error(ErrorKind::ConfigError, "unknown omega key '" + key + "'");
}

std::optional<ThetaSpec> parse_theta(const std::string& key) {
  if (key == "none") return std::nullopt;
  const auto parts = split(key, ':');
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t i) {
    if (parts.size() <= i) throw Error(ErrorKind::ConfigError, "missing parameter in theta key '" + key + "'");
    return parse_real(parts[i], key);
  };
  auto arity = [&](std::size_t n) {
    if (parts.size() != n + 1) throw Error(ErrorKind::ConfigError, "wrong parameter count in theta key '" + key + "'");
  };
  try {
    if (kind == "power") { arity(2); return ThetaSpec::power_law(arg(1), arg(2)); }
    if (kind == "logovert") { arity(1); return ThetaSpec::log_over_t(arg(1)); }
    if (kind == "expinv") { arity(1); return ThetaSpec::exp_inv(arg(1)); }
    if (kind == "powexpinv") { arity(2); return ThetaSpec::pow_exp_inv(arg(1), arg(2)); }
    if (kind == "bounded") { arity(1); return ThetaSpec::bounded(arg(1)); }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::ConfigError, e.what());
    throw;
  }
  throw Error(ErrorKind::ConfigError, "unknown theta key '" + key + "'");
}

const std::vector<CatalogPair>& catalog_pairs() {
  static const std::vector<CatalogPair> pairs = {
      {"linear", "bounded:1"},      {"linear", "power:1:1"},         {"holder:0.5", "power:1:1"},
      {"holder:0.5", "power:2:1"},  {"holder:0.5", "power:0.5:1"},   {"loglip", "power:1:1"},
      {"loglip", "power:3:1"},      {"rootexp:1", "logovert:1"},     {"logpower:2", "power:2:1"},
      {"logloglip", "expinv:1"},    {"logloglip", "powexpinv:1:1"},  {"logpower:3", "power:3:1"},
  };
  return pairs;
}

}  // namespace deriloss::moduli
