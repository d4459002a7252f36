#include "deriloss/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "deriloss/csv.hpp"
#include "deriloss/energy.hpp"
#include "deriloss/error.hpp"
#include "deriloss/keyquantity.hpp"
#include "deriloss/parallel.hpp"

namespace deriloss::spectral {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

LambdaSequence pick_lambda_sequence(const moduli::ClassParams& params, int n_max,
                                    const LambdaSequenceOptions& options) {
  params.validate();
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be at least 1");
  if (!(options.lambda_min > 1.0) || !(options.lambda_max > options.lambda_min) || options.points_per_decade < 1)
    throw Error(ErrorKind::InvalidArgument, "bad lambda range for the sequence");
  const int decades = static_cast<int>(std::ceil(std::log10(options.lambda_max / options.lambda_min) - 1e-12));
  const auto grid = keyquantity::geometric_grid(options.lambda_min, options.lambda_max,
                                                decades * options.points_per_decade + 1);
  const double M3 = activator::ActivatorConstants::compute(params, params.T0).M3;

  // m is nondecreasing in lambda, so phi can be evaluated lazily and bisected.
  std::vector<double> phi(grid.size(), std::numeric_limits<double>::quiet_NaN());
  auto phi_at = [&](std::size_t i) {
    if (std::isnan(phi[i])) phi[i] = M3 * keyquantity::compute_m(params, grid[i]).m;
    return phi[i];
  };
  auto feasible = [&](std::size_t i) {
    if (!options.seed) return true;
    try {
      activator::build_activator(*options.seed, grid[i], {.check_growth = false});
      return true;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::HypothesisViolated || e.kind() == ErrorKind::EmptySubdivision) return false;
      throw;
    }
  };

  LambdaSequence seq;
  std::size_t lo_idx = 0;
  for (int n = 1; n <= n_max; ++n) {
    std::size_t lo = lo_idx;
    std::size_t hi = grid.size();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (phi_at(mid) >= n)
        hi = mid;
      else
        lo = mid + 1;
    }
    std::size_t idx = lo;
    while (idx < grid.size() && !feasible(idx)) ++idx;
    if (idx >= grid.size()) {
      seq.rate_too_slow = true;
      seq.first_unreached = n;
      break;
    }
    seq.lambdas.push_back(grid[idx]);
    seq.phis.push_back(phi_at(idx));
    lo_idx = idx + 1;
  }
  return seq;
}

double rate_delta(const LambdaSequence& seq) {
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t n = seq.lambdas.size() / 2; n < seq.lambdas.size(); ++n)
    delta = std::min(delta, seq.phis[n] / std::log(seq.lambdas[n]));
  return delta;
}

TrendWitness trend_witness(const std::vector<double>& log_terms) {
  TrendWitness w;
  const std::size_t N = log_terms.size();
  if (N < 4) return w;
  // Every increment is a positive term, so the sums increase strictly as
  // long as no term underflowed to zero.
  w.strictly_increasing =
      std::all_of(log_terms.begin(), log_terms.end(), [](double x) { return x > kNegInf && !std::isnan(x); });
  const std::size_t q = N / 4;
  double first = kNegInf;
  double last = kNegInf;
  for (std::size_t i = 0; i < q; ++i) first = log_add(first, log_terms[i]);
  for (std::size_t i = N - q; i < N; ++i) last = log_add(last, log_terms[i]);
  w.first_quartile_log_increment = first - std::log(static_cast<double>(q));
  w.last_quartile_log_increment = last - std::log(static_cast<double>(q));
  w.holds = w.strictly_increasing && w.last_quartile_log_increment > w.first_quartile_log_increment;
  return w;
}

SpectralDemo demo_loss(const moduli::ClassParams& params, const activator::SeedCoefficient& seed,
                       const LambdaSequence& seq, double beta, double gamma_reg, const std::vector<double>& t_probe) {
  for (double t : t_probe)
    if (!(t > 0.0 && t <= params.T0)) throw Error(ErrorKind::InvalidArgument, "probe times must lie in (0, T0]");
  SpectralDemo d;
  d.lambdas = seq.lambdas;
  d.phis = seq.phis;
  d.beta = beta;
  d.gamma_reg = gamma_reg;
  d.rate_too_slow = seq.rate_too_slow;
  const std::size_t N = d.lambdas.size();
  d.log_a.resize(N);
  for (std::size_t n = 0; n < N; ++n) d.log_a[n] = -d.phis[n] / 4.0;

  d.delta = rate_delta(seq);

  // Probe energies, one activator per n.
  std::vector<double> probes = t_probe;
  std::sort(probes.begin(), probes.end());
  std::vector<std::vector<double>> logE(N, std::vector<double>(probes.size()));
  parallel_for(N, [&](std::size_t n) {
    const double lambda = d.lambdas[n];
    const auto act = activator::build_activator(seed, lambda, {.check_growth = false});
    energy::ScaledState s{{0.0, 1.0}, 0.0};
    double t = 0.0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      s = energy::propagate_scaled(act.coefficient, lambda, s, t, probes[p]);
      t = probes[p];
      logE[n][p] = s.log_E(lambda);
    }
  });

  // Data sum: sum lambda_n^{4 beta} a_n^2.
  std::vector<double> data_terms(N);
  double acc = kNegInf;
  for (std::size_t n = 0; n < N; ++n) {
    data_terms[n] = 4.0 * beta * std::log(d.lambdas[n]) + 2.0 * d.log_a[n];
    acc = log_add(acc, data_terms[n]);
    d.log_data_partial.push_back(acc);
  }
  if (N > 0) {
    d.data_last_term = std::exp(data_terms.back());
    std::size_t after = N;
    while (after > 0 && data_terms[after - 1] < std::log(1e-8)) --after;
    if (after < N && after <= N - std::max<std::size_t>(1, N / 4)) d.data_converged_after = after;
  }

  // Solution sum: sum lambda_n^{-4 gamma} a_n^2 E_n(t).
  for (std::size_t p = 0; p < probes.size(); ++p) {
    ProbeSeries ps;
    ps.t = probes[p];
    std::vector<double> terms(N);
    double sacc = kNegInf;
    for (std::size_t n = 0; n < N; ++n) {
      ps.log_E.push_back(logE[n][p]);
      terms[n] = logE[n][p] - 4.0 * gamma_reg * std::log(d.lambdas[n]) + 2.0 * d.log_a[n];
      sacc = log_add(sacc, terms[n]);
      ps.log_solution_partial.push_back(sacc);
    }
    ps.trend = trend_witness(terms);
    d.probes.push_back(std::move(ps));
  }
  return d;
}

std::string demo_csv(const SpectralDemo& d) {
  std::vector<std::string> head{"n", "lambda_n", "phi_n", "a_n"};
  for (const auto& p : d.probes) head.push_back("E_at_" + io::num(p.t));
  head.push_back("data_partial");
  for (const auto& p : d.probes) head.push_back("solution_partial_" + io::num(p.t));
  // Energies can exceed the double range; the log columns stay exact.
  for (const auto& p : d.probes) head.push_back("log_E_at_" + io::num(p.t));
  for (const auto& p : d.probes) head.push_back("log_solution_partial_" + io::num(p.t));
  std::string out = io::csv_row(head);
  for (std::size_t n = 0; n < d.lambdas.size(); ++n) {
    std::vector<std::string> row{std::to_string(n + 1), io::num(d.lambdas[n]), io::num(d.phis[n]),
                                 io::num(std::exp(d.log_a[n]))};
    for (const auto& p : d.probes) row.push_back(io::num(std::exp(p.log_E[n])));
    row.push_back(io::num(std::exp(d.log_data_partial[n])));
    for (const auto& p : d.probes) row.push_back(io::num(std::exp(p.log_solution_partial[n])));
    for (const auto& p : d.probes) row.push_back(io::num(p.log_E[n]));
    for (const auto& p : d.probes) row.push_back(io::num(p.log_solution_partial[n]));
    out += io::csv_row(row);
  }
  return out;
}

std::string format_demo(const SpectralDemo& d) {
  std::ostringstream os;
  os << "spectral n=" << d.lambdas.size() << " beta=" << io::num(d.beta) << " gamma=" << io::num(d.gamma_reg)
     << " delta=" << io::num(d.delta) << (d.rate_too_slow ? " rate_too_slow" : "") << "\n";
  os << "data partial sums: ";
  if (d.data_converged_after)
    os << "increments below 1e-8 after N=" << *d.data_converged_after;
  else
    os << "no convergence evidence";
  os << " (last term " << io::num(d.data_last_term) << ")\n";
  for (const auto& p : d.probes) {
    os << "solution partial sums at t=" << io::num(p.t) << ": increment log-means first quarter "
       << io::num(p.trend.first_quartile_log_increment) << ", last quarter "
       << io::num(p.trend.last_quartile_log_increment) << ", "
       << (p.trend.holds ? "divergence trend witnessed" : "no divergence trend") << "\n";
  }
  return os.str();
}

}  // namespace deriloss::spectral
