#include "deriloss/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "deriloss/csv.hpp"
#include "deriloss/energy.hpp"
#include "deriloss/error.hpp"
#include "deriloss/keyquantity.hpp"
#include "deriloss/spectral.hpp"
#include "deriloss/svg.hpp"

namespace deriloss::cli {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  double d = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, d);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::ConfigError, "'" + key + "' expects a number, got '" + v + "'");
  return d;
}

long parse_int(const std::string& key, const std::string& v) {
  long d = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, d);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::ConfigError, "'" + key + "' expects an integer, got '" + v + "'");
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(ErrorKind::ConfigError, "'" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string cell;
  while (std::getline(is, cell, ',')) out.push_back(parse_double(key, cell));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

void print_classification(std::ostream& out, const keyquantity::RegimeClassification& c) {
  out << "regime=" << keyquantity::to_string(c.regime) << " tail_ratio=[" << io::num(c.ratio_liminf_est) << ", "
      << io::num(c.ratio_limsup_est) << "] variation=" << io::num(c.tail_variation)
      << " tail_slope=" << io::num(c.tail_slope) << " elasticity=" << io::num(c.elasticity);
  if (c.loss_bound) out << " loss_bound=" << io::num(*c.loss_bound);
}

struct Table5Row {
  const char* omega;
  const char* theta;
};

constexpr Table5Row kTable5[] = {
    {"rootexp:1", "logovert:1"},
    {"logpower:2", "power:2:1"},
    {"logloglip", "expinv:1"},
    {"logloglip", "powexpinv:1:1"},
};

}  // namespace

moduli::ClassParams RunConfig::class_params() const {
  moduli::ClassParams p;
  p.T0 = T0;
  p.mu1 = mu1;
  p.mu2 = mu2;
  p.omega = moduli::parse_modulus(omega);
  p.theta = moduli::parse_theta(theta);
  p.validate();
  return p;
}

activator::SeedCoefficient RunConfig::seed() const {
  if (!(seed_t1_frac > 0.0 && seed_t1_frac < 1.0)) throw Error(ErrorKind::ConfigError, "seed-t1-frac must lie in (0,1)");
  if (!(gamma2_frac > 0.0 && gamma2_frac < 1.0)) throw Error(ErrorKind::ConfigError, "gamma2-frac must lie in (0,1)");
  const auto p = class_params();
  const double g2 = mu1 + gamma2_frac * (mu2 - mu1);
  return activator::SeedCoefficient::constant(p, seed_t1_frac * T0, std::sqrt(g2), eta);
}

std::vector<double> RunConfig::grid(double lo, double hi, int points) const {
  const double a = lambda_min.value_or(lo);
  const double b = lambda_max.value_or(hi);
  const int n = lambda_points.value_or(points);
  if (!(a > 0.0) || !(b >= a) || n < 1) throw Error(ErrorKind::ConfigError, "bad lambda grid");
  if (n == 1) return {a};
  return keyquantity::geometric_grid(a, b, n);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(lineno) + ": expected key=value");
    kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return kv;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "omega") cfg.omega = v;
    else if (k == "theta") cfg.theta = v;
    else if (k == "t0") cfg.T0 = parse_double(k, v);
    else if (k == "mu1") cfg.mu1 = parse_double(k, v);
    else if (k == "mu2") cfg.mu2 = parse_double(k, v);
    else if (k == "lambda-min") cfg.lambda_min = parse_double(k, v);
    else if (k == "lambda-max") cfg.lambda_max = parse_double(k, v);
    else if (k == "lambda-points") cfg.lambda_points = static_cast<int>(parse_int(k, v));
    else if (k == "out") cfg.out = v;
    else if (k == "seed-t1-frac") cfg.seed_t1_frac = parse_double(k, v);
    else if (k == "eta") cfg.eta = parse_double(k, v);
    else if (k == "gamma2-frac") cfg.gamma2_frac = parse_double(k, v);
    else if (k == "lambda") cfg.lambda = parse_double(k, v);
    else if (k == "input") cfg.input = v;
    else if (k == "samples") cfg.samples = static_cast<std::size_t>(parse_int(k, v));
    else if (k == "membership-samples") cfg.membership_samples = static_cast<std::size_t>(parse_int(k, v));
    else if (k == "self-test") cfg.self_test = parse_bool(k, v);
    else if (k == "n-max") cfg.n_max = static_cast<int>(parse_int(k, v));
    else if (k == "beta") cfg.beta = parse_double(k, v);
    else if (k == "gamma-reg") cfg.gamma_reg = parse_double(k, v);
    else if (k == "probes") cfg.probes = parse_list(k, v);
    else throw Error(ErrorKind::ConfigError, "unknown config key '" + k + "'");
  }
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const auto params = cfg.class_params();
  const auto grid = cfg.grid(1e2, 1e9, 71);
  const auto rows = keyquantity::compute_m_grid(params, grid);
  out << "lambda m m_over_loglambda branch\n";
  for (const auto& r : rows)
    out << io::num(r.lambda) << " " << io::num(r.m) << " " << io::num(r.m / std::log(r.lambda)) << " "
        << keyquantity::to_string(r.branch) << "\n";
  const auto c = keyquantity::classify_regime(params, grid);
  out << "omega=" << cfg.omega << " theta=" << cfg.theta << " ";
  print_classification(out, c);
  out << "\n";
  io::write_file_atomic(out_path(cfg, "classify.csv"), keyquantity::key_quantity_csv(rows));
  return kPass;
}

int cmd_table5(const RunConfig& cfg, std::ostream& out) {
  RunConfig c = cfg;
  const auto grid = cfg.grid(1e2, 1e9, 71);
  int i = 0;
  for (const auto& row : kTable5) {
    ++i;
    for (const bool weak : {false, true}) {
      c.omega = weak ? std::string("weak:") + row.omega : row.omega;
      c.theta = row.theta;
      const auto cl = keyquantity::classify_regime(c.class_params(), grid);
      out << "row " << i << (weak ? " weakened" : "         ") << " omega=" << c.omega << " theta=" << c.theta << " ";
      print_classification(out, cl);
      out << " verdict=" << (cl.regime == keyquantity::Regime::Finite ? "Finite" : "not-Finite") << "\n";
    }
  }
  return kPass;
}

int cmd_construct(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.lambda) throw Error(ErrorKind::ConfigError, "construct needs --lambda");
  const auto params = cfg.class_params();
  const auto act = activator::build_activator(cfg.seed(), *cfg.lambda);
  const auto& coef = act.coefficient;
  const auto mem = activator::check_class_membership(coef, params, cfg.membership_samples);

  std::ostringstream g;
  g << "lambda=" << io::num(*cfg.lambda) << "\n"
    << "branch=" << keyquantity::to_string(act.key.branch) << "\n"
    << "m=" << io::num(act.key.m) << "\n"
    << "s_star=" << io::num(act.key.s_star) << "\n"
    << "a_lambda=" << io::num(coef.a_lambda.value_or(0.0)) << "\n"
    << "b_lambda=" << io::num(act.guarantee.b_lambda) << "\n"
    << "blocks=" << coef.amplitudes.size() << "\n"
    << "M3=" << io::num(act.guarantee.M3) << "\n"
    << "M4=" << io::num(act.guarantee.M4) << "\n"
    << "log_bound=" << io::num(act.guarantee.log_bound) << "\n";
  std::ostringstream mrep;
  mrep << "points_checked=" << mem.points_checked << "\npairs_checked=" << mem.pairs_checked
       << "\nviolations=" << mem.violation_count << "\n";
  for (const auto& v : mem.violations)
    mrep << v.kind << " t=" << io::num(v.t) << " s=" << io::num(v.s) << " lhs=" << io::num(v.lhs)
         << " rhs=" << io::num(v.rhs) << "\n";

  io::write_file_atomic(out_path(cfg, "coefficient.csv"), activator::coefficient_csv(coef, cfg.samples));
  io::write_file_atomic(out_path(cfg, "guarantee.txt"), g.str());
  io::write_file_atomic(out_path(cfg, "membership.txt"), mrep.str());
  out << g.str() << mrep.str();
  return mem.pass() ? kPass : kVerifyFailed;
}

std::string verify_report(const RunConfig& cfg, bool& all_pass) {
  const auto params = cfg.class_params();
  const auto seed = cfg.seed();
  const auto grid = cfg.grid(1e3, 1e6, 4);
  std::ostringstream os;
  os << "verify omega=" << cfg.omega << " theta=" << cfg.theta << " T0=" << io::num(cfg.T0)
     << " mu1=" << io::num(cfg.mu1) << " mu2=" << io::num(cfg.mu2) << " T1=" << io::num(seed.T1())
     << " gamma=" << io::num(seed.gamma()) << " eta=" << io::num(seed.eta()) << " samples=" << cfg.samples
     << (cfg.self_test ? " self-test" : "") << "\n";

  // Without growth of m no activator exists; the upper bound is still
  // meaningful and is checked on the seed coefficient instead.
  bool bounded_m = false;
  try {
    activator::build_activator(seed, grid.front());
  } catch (const Error& e) {
    const auto& f = e.failed_conditions();
    if (e.kind() != ErrorKind::HypothesisViolated ||
        std::find(f.begin(), f.end(), "unbounded_key_quantity") == f.end())
      throw;
    bounded_m = true;
  }

  energy::UpperBoundOptions uo;
  uo.sample_count = cfg.samples;
  energy::UpperBoundReport up;
  if (bounded_m) {
    up = energy::verify_upper_bound(activator::PiecewiseCoefficient::from_seed(seed), params, grid, uo);
  } else {
    for (double lambda : grid) {
      const auto act = activator::build_activator(seed, lambda);
      auto r = energy::verify_upper_bound(act.coefficient, params, {lambda}, uo);
      up.rows.push_back(r.rows.front());
    }
  }
  os << energy::format_upper_report(up);
  all_pass = up.all_pass();
  if (bounded_m) {
    os << "lower bound not applicable: m(lambda) stays bounded, no activator exists; upper bound checked on the seed\n";
  } else {
    energy::LowerBoundOptions lo;
    lo.sample_count = cfg.samples;
    if (cfg.self_test) lo.m3_scale = 10.0;
    const auto low = energy::verify_lower_bound(seed, grid, lo);
    os << energy::format_lower_report(low);
    all_pass = all_pass && low.all_pass();
  }
  os << "result " << (all_pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  bool ok = false;
  const std::string rep = verify_report(cfg, ok);
  io::write_file_atomic(out_path(cfg, "verify_report.txt"), rep);
  out << rep;
  return ok ? kPass : kVerifyFailed;
}

int cmd_plot(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.input) throw Error(ErrorKind::ConfigError, "plot needs --input");
  if (!std::filesystem::exists(*cfg.input)) throw Error(ErrorKind::Io, "no such file: " + *cfg.input);
  const std::string svg = svg::plot_csv(io::read_file(*cfg.input), {});
  const std::string path = out_path(cfg, std::filesystem::path(*cfg.input).stem().string() + ".svg");
  io::write_file_atomic(path, svg);
  out << "wrote " << path << "\n";
  return kPass;
}

int cmd_spectral(const RunConfig& cfg, std::ostream& out) {
  const auto params = cfg.class_params();
  const auto seed = cfg.seed();
  spectral::LambdaSequenceOptions so;
  so.seed = seed;
  if (cfg.lambda_min) so.lambda_min = *cfg.lambda_min;
  if (cfg.lambda_max) so.lambda_max = *cfg.lambda_max;
  const auto seq = spectral::pick_lambda_sequence(params, cfg.n_max, so);
  if (seq.lambdas.empty()) throw Error(ErrorKind::ConfigError, "no lambda reaches rate 1 in the grid");
  std::vector<double> probes;
  for (double f : cfg.probes.empty() ? std::vector<double>{0.5, 1.0} : cfg.probes) probes.push_back(f * cfg.T0);
  // Default exponents sit at delta/16, inside the predicted ranges.
  const double delta = spectral::rate_delta(seq);
  const double beta = cfg.beta.value_or(delta / 16.0);
  const double gamma = cfg.gamma_reg.value_or(delta / 16.0);
  const auto demo = spectral::demo_loss(params, seed, seq, beta, gamma, probes);
  io::write_file_atomic(out_path(cfg, "spectral.csv"), spectral::demo_csv(demo));
  out << "asymptotic demonstration with per-n activators\n" << spectral::format_demo(demo);
  return kPass;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"derivative loss toolkit for u'' + lambda^2 c(t) u = 0"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  std::optional<std::string> omega, theta, outdir, input, probes;
  std::optional<double> t0, mu1, mu2, lmin, lmax, t1frac, eta, g2frac, lambda, beta, gamma_reg;
  std::optional<int> lpoints, n_max;
  std::optional<std::size_t> samples, msamples;
  bool self_test = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--omega", omega, "modulus key, e.g. holder:0.5");
    sub->add_option("--theta", theta, "derivative bound key, e.g. power:1:1 or none");
    sub->add_option("--t0", t0);
    sub->add_option("--mu1", mu1);
    sub->add_option("--mu2", mu2);
    sub->add_option("--lambda-min", lmin);
    sub->add_option("--lambda-max", lmax);
    sub->add_option("--lambda-points", lpoints);
    sub->add_option("--out", outdir, "output directory");
    sub->add_option("--seed-t1-frac", t1frac);
    sub->add_option("--eta", eta);
    sub->add_option("--gamma2-frac", g2frac);
    sub->add_option("--samples", samples);
  };
  auto* classify = app.add_subcommand("classify", "m(lambda) curve and regime label");
  auto* table5 = app.add_subcommand("table5", "the four finite-loss rows and their weakened variants");
  auto* construct = app.add_subcommand("construct", "build the activator at one lambda");
  auto* verify = app.add_subcommand("verify", "check both energy bounds over the grid");
  auto* plot = app.add_subcommand("plot", "SVG from a CSV");
  auto* spec = app.add_subcommand("spectral", "truncated series demonstration");
  for (auto* s : {classify, table5, construct, verify, plot, spec}) add_common(s);
  construct->add_option("--lambda", lambda)->required();
  construct->add_option("--membership-samples", msamples);
  verify->add_flag("--self-test", self_test, "multiply M3 by 10; the run must fail");
  plot->add_option("--input", input)->required();
  spec->add_option("--n-max", n_max);
  spec->add_option("--beta", beta);
  spec->add_option("--gamma-reg", gamma_reg);
  spec->add_option("--probes", probes, "comma-separated fractions of T0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kPass : kConfigError;
  }

  try {
    RunConfig cfg;
    if (config_path) apply_config(cfg, read_config_file(*config_path));
    if (omega) cfg.omega = *omega;
    if (theta) cfg.theta = *theta;
    if (t0) cfg.T0 = *t0;
    if (mu1) cfg.mu1 = *mu1;
    if (mu2) cfg.mu2 = *mu2;
    if (lmin) cfg.lambda_min = lmin;
    if (lmax) cfg.lambda_max = lmax;
    if (lpoints) cfg.lambda_points = lpoints;
    if (outdir) cfg.out = *outdir;
    if (t1frac) cfg.seed_t1_frac = *t1frac;
    if (eta) cfg.eta = *eta;
    if (g2frac) cfg.gamma2_frac = *g2frac;
    if (samples) cfg.samples = *samples;
    if (msamples) cfg.membership_samples = *msamples;
    if (lambda) cfg.lambda = lambda;
    if (input) cfg.input = input;
    if (self_test) cfg.self_test = true;
    if (n_max) cfg.n_max = *n_max;
    if (beta) cfg.beta = beta;
    if (gamma_reg) cfg.gamma_reg = gamma_reg;
    if (probes) cfg.probes = parse_list("probes", *probes);
    cfg.class_params();  // validate before any work

    if (*classify) return cmd_classify(cfg, out);
    if (*table5) return cmd_table5(cfg, out);
    if (*construct) return cmd_construct(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
    if (*plot) return cmd_plot(cfg, out);
    if (*spec) return cmd_spectral(cfg, out);
    return kConfigError;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    for (const auto& f : e.failed_conditions()) err << "  failed: " << f << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidArgument:
      case ErrorKind::ConfigError:
      case ErrorKind::Io:
        return kConfigError;
      case ErrorKind::HypothesisViolated:
      case ErrorKind::EmptySubdivision:
      case ErrorKind::NotClassMember:
        return kHypothesis;
      default:
        return kVerifyFailed;
    }
  }
}

}  // namespace deriloss::cli
