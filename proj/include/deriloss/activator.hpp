#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deriloss/keyquantity.hpp"
#include "deriloss/moduli.hpp"

namespace deriloss::activator {

/// One oscillatory block on [a, b]. Endpoints are stored as integer
/// multiples n of the period 2 pi / (gamma lambda) and reconstructed from n.
struct BlockParams {
  double eps = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  double a = 0.0;
  double b = 0.0;

  /// Requires eps <= 8 gamma^3 lambda and 0 <= n_a < n_b.
  static BlockParams make(double eps, double gamma, double lambda, std::int64_t n_a, std::int64_t n_b);
  /// Snaps a and b to the period lattice; each must be within 1e-9 periods of it.
  static BlockParams from_endpoints(double eps, double gamma, double lambda, double a, double b);
  /// Skips the amplitude hypothesis. Only for exercising failure paths.
  static BlockParams unchecked(double eps, double gamma, double lambda, std::int64_t n_a, std::int64_t n_b);

  double period() const;
  double frequency() const { return gamma * lambda; }
  std::int64_t periods() const { return n_b - n_a; }
  /// exp(eps (b - a) / (16 gamma^2)), the growth of w' across the block.
  double endpoint_growth() const;
  double log_endpoint_growth() const;
};

/// Lattice point 2 pi n / (gamma lambda).
double lattice_point(double gamma, double lambda, std::int64_t n);

double block_phi(const BlockParams& p, double t);
double block_phi_prime(const BlockParams& p, double t);

struct WValue {
  double value = 0.0;
  double derivative = 0.0;
};
/// The growing solution of w'' + lambda^2 (gamma^2 - phi) w = 0 with
/// w(a) = 0, w'(a) = 1.
WValue block_w(const BlockParams& p, double t);

/// Integral of phi over [x, y] within the block, in closed form.
double block_phi_integral(const BlockParams& p, double x, double y);

/// Scalar function with derivative, used for seed tails and for coefficients
/// given as plain functions.
struct TailFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  /// Set when the function is constant; enables exact propagation.
  std::optional<double> constant_value;
  /// Optional closed-form integral over [x, y].
  std::function<double(double, double)> integral;

  static TailFunction constant(double v);
  /// Cubic B-spline through equally spaced samples starting at t0.
  static TailFunction from_uniform_samples(double t0, double dt, std::vector<double> values);
};

/// Coefficient constant (= gamma^2) on [0, T1], continued by a tail on [T1, T0].
class SeedCoefficient {
public:
  /// Validates gamma^2 in (mu1, mu2), T1 in (0, T0), eta in (0, 1), tail
  /// continuity at T1, and sampled bounds for the tail.
  static SeedCoefficient make(const moduli::ClassParams& params, double T1, double gamma, double eta,
                              TailFunction tail);
  static SeedCoefficient constant(const moduli::ClassParams& params, double T1, double gamma, double eta);
  /// gamma^2 = (mu1 + mu2) / 2, T1 = 0.9 T0, eta = 0.9, constant tail.
  static SeedCoefficient standard(const moduli::ClassParams& params);

  double value(double t) const;
  double derivative(double t) const;

  const moduli::ClassParams& params() const { return params_; }
  double T1() const { return T1_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  const std::shared_ptr<const TailFunction>& tail() const { return tail_; }
  bool tail_is_constant() const { return tail_->constant_value.has_value(); }

private:
  moduli::ClassParams params_;
  double T1_ = 0.0;
  double gamma_ = 0.0;
  double eta_ = 0.0;
  std::shared_ptr<const TailFunction> tail_;
};

enum class SegmentKind { Constant, Block, Baseline };

struct Segment {
  SegmentKind kind = SegmentKind::Constant;
  double t0 = 0.0;
  double t1 = 0.0;
  double value = 0.0;  // Constant
  BlockParams block;   // Block
  std::shared_ptr<const TailFunction> tail;  // Baseline
  /// Lattice indices of the endpoints when they are lattice points; used to
  /// propagate exactly over whole periods of a Constant(gamma^2) segment.
  std::optional<std::int64_t> n0;
  std::optional<std::int64_t> n1;
};

enum class Provenance { OmegaConstruction, ThetaConstruction, Seed, Function, Manual };
std::string to_string(Provenance p);

class PiecewiseCoefficient {
public:
  /// Segments must tile [0, T0] and join continuously (to 1e-10).
  static PiecewiseCoefficient from_segments(std::vector<Segment> segments, double T0,
                                            Provenance provenance = Provenance::Manual);
  static PiecewiseCoefficient from_function(TailFunction fn, double T0);
  static PiecewiseCoefficient from_seed(const SeedCoefficient& seed);

  double value(double t) const;
  /// One-sided from the right at junctions (from the left at T0).
  double derivative(double t) const;
  std::size_t segment_index(double t) const;

  const std::vector<Segment>& segments() const { return segments_; }
  double T0() const { return T0_; }
  Provenance provenance() const { return provenance_; }

  /// Modified interval [a_lambda, b_lambda]; empty for unmodified coefficients.
  std::optional<double> a_lambda;
  std::optional<double> b_lambda;
  /// Theta construction: lattice points t_0..t_k and amplitudes eps_1..eps_k.
  std::vector<double> subdivision;
  std::vector<double> amplitudes;
  /// Lattice frequency gamma * lambda when the coefficient was built for one lambda.
  std::optional<double> lattice_frequency;

private:
  std::vector<Segment> segments_;
  std::vector<double> starts_;
  double T0_ = 0.0;
  Provenance provenance_ = Provenance::Manual;
};

struct ActivatorConstants {
  double nu1 = 0.0;
  double nu2 = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
  double M3 = 0.0;
  double M4 = 0.0;
  /// Integral of theta over [T1, T0] (zero without theta).
  double tail_theta_integral = 0.0;

  static ActivatorConstants compute(const moduli::ClassParams& params, double T1);
};

/// Lattice window [n_a, n_b] for a block.
struct Window {
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
};

PiecewiseCoefficient omega_construction(const SeedCoefficient& seed, double lambda, const Window& window);
PiecewiseCoefficient theta_construction(const SeedCoefficient& seed, double lambda, const Window& window);

/// Windows used by build_activator for each branch.
Window omega_window(double gamma, double lambda, double s_star);
Window theta_window(double gamma, double lambda, double s_star, double s_hat);

struct LowerBoundGuarantee {
  double b_lambda = 0.0;
  double m = 0.0;
  double M3 = 0.0;
  double M4 = 0.0;
  /// log(M4) + 2 M3 m; the claim is E(t) >= exp(log_bound) for t >= b_lambda.
  double log_bound = 0.0;
};

struct Activator {
  PiecewiseCoefficient coefficient;
  keyquantity::KeyQuantityResult key;
  LowerBoundGuarantee guarantee;
  ActivatorConstants constants;
};

struct BuildOptions {
  /// Check that m grows along lambda * 10^j, j = 0..6.
  bool check_growth = true;
};

Activator build_activator(const SeedCoefficient& seed, double lambda, const BuildOptions& options = {});

/// Flattened-and-shrunk approximation (1 - eps) c(max(t, eps)) + eps (mu1 + mu2) / 2.
/// Throws NotClassMember unless c passes check_class_membership.
SeedCoefficient seed_from_class_member(const TailFunction& c, const moduli::ClassParams& params, double epsilon,
                                       std::size_t samples = 100000);

struct Violation {
  std::string kind;  // "lower", "upper", "derivative", "continuity"
  double t = 0.0;
  double s = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct MembershipReport {
  std::size_t points_checked = 0;
  std::size_t pairs_checked = 0;
  std::size_t violation_count = 0;
  /// First few violations, with witnesses.
  std::vector<Violation> violations;
  bool pass() const { return violation_count == 0; }
};

MembershipReport check_class_membership(const PiecewiseCoefficient& c, const moduli::ClassParams& params,
                                        std::size_t samples);

/// Max of |c1 - c2| over a uniform grid of [0, T0].
double uniform_distance(const PiecewiseCoefficient& c1, const PiecewiseCoefficient& c2, std::size_t samples);

/// Plain-text segment header (lines starting with '#') followed by t,c,c_prime.
std::string coefficient_csv(const PiecewiseCoefficient& c, std::size_t resolution);

}  // namespace deriloss::activator
