#include "catch_amalgamated.hpp"

#include <cmath>

#include "deriloss/activator.hpp"
#include "deriloss/error.hpp"
#include "deriloss/keyquantity.hpp"
#include "deriloss/spectral.hpp"

using namespace deriloss;
using namespace deriloss::spectral;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {
moduli::ClassParams params(const std::string& om, const std::string& th, double mu1 = 1.0, double mu2 = 2.0) {
  moduli::ClassParams p;
  p.mu1 = mu1;
  p.mu2 = mu2;
  p.omega = moduli::parse_modulus(om);
  p.theta = moduli::parse_theta(th);
  return p;
}
}  // namespace

TEST_CASE("log_add") {
  CHECK_THAT(log_add(std::log(2.0), std::log(3.0)), WithinRel(std::log(5.0), 1e-15));
  CHECK(log_add(-INFINITY, 1.5) == 1.5);
  CHECK_THAT(log_add(1000.0, 1000.0), WithinRel(1000.0 + std::log(2.0), 1e-15));
}

TEST_CASE("trend witness separates acceleration from plateaus") {
  std::vector<double> growing, flat, shrinking;
  for (int n = 0; n < 40; ++n) {
    growing.push_back(0.3 * n);
    flat.push_back(0.0);
    shrinking.push_back(-0.3 * n);
  }
  CHECK(trend_witness(growing).holds);
  CHECK_FALSE(trend_witness(flat).holds);
  CHECK_FALSE(trend_witness(shrinking).holds);
  growing[7] = -INFINITY;  // a vanished term breaks strict increase
  CHECK_FALSE(trend_witness(growing).holds);
}

TEST_CASE("lambda sequence for holder 1/2 with 1/t inverts m = 1 + log(lambda)/2") {
  // Small speeds make M3 of order one so that lambda_n stays below 1e12.
  const auto p = params("holder:0.5", "power:1:1", 1e-6, 2e-6);
  const double M3 = activator::ActivatorConstants::compute(p, p.T0).M3;
  const auto seq = pick_lambda_sequence(p, 40);
  REQUIRE(seq.lambdas.size() >= 10);
  CHECK(seq.rate_too_slow);  // the 1e12 ceiling is reached before n = 40
  const double step = std::pow(10.0, 0.01);
  for (std::size_t i = 0; i < seq.lambdas.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    CHECK(seq.phis[i] >= n);
    if (i) CHECK(seq.lambdas[i] > seq.lambdas[i - 1]);
    const double oracle = std::exp(2.0 * (n / M3 - 1.0));
    if (oracle > 10.0) {
      CHECK(seq.lambdas[i] >= oracle * (1 - 1e-9));
      CHECK(seq.lambdas[i] <= oracle * step * (1 + 1e-9));
    }
  }
}

TEST_CASE("n_max = 1 and the bounded regime") {
  const auto p = params("holder:0.5", "power:1:1", 1e-6, 2e-6);
  const auto one = pick_lambda_sequence(p, 1);
  REQUIRE(one.lambdas.size() == 1);
  CHECK(one.phis[0] >= 1.0);

  const auto none = pick_lambda_sequence(params("linear", "bounded:1"), 5);
  CHECK(none.rate_too_slow);
  CHECK(none.lambdas.empty());
  CHECK(none.first_unreached == 1);
}

TEST_CASE("exp(-eta phi) partial sums settle once phi is large") {
  const auto p = params("logpower:3", "power:3:1", 1e-4, 2e-4);
  const auto seq = pick_lambda_sequence(p, 120);
  // For eta = 1/4 the single term exp(-phi/4) is still 4.5e-5 at phi = 40,
  // so that threshold is only meaningful for eta >= 1/2; eta = 1/4 is
  // checked from phi >= 62 on, where the geometric tail drops below 1e-6.
  for (const auto& [eta, threshold] : {std::pair{0.25, 62.0}, std::pair{0.5, 40.0}, std::pair{1.0, 40.0}}) {
    double tail = 0.0;
    bool started = false;
    for (std::size_t n = 0; n < seq.phis.size(); ++n) {
      if (started) tail += std::exp(-eta * seq.phis[n]);
      if (seq.phis[n] >= threshold) started = true;
    }
    INFO("eta=" << eta);
    CHECK(started);
    CHECK(tail < 1e-6);
  }
}

TEST_CASE("arbitrarily small loss at beta = gamma = 0") {
  // m grows like (log lambda)^{2/3}; tiny speeds give a usable rate.
  const auto p = params("loglip", "power:3:1", 1e-8, 2e-8);
  const auto seed = activator::SeedCoefficient::standard(p);
  LambdaSequenceOptions o;
  o.seed = seed;
  const auto seq = pick_lambda_sequence(p, 60, o);
  REQUIRE(seq.lambdas.size() >= 20);
  const auto d = demo_loss(p, seed, seq, 0.0, 0.0, {0.5, 1.0});
  CHECK(d.data_converged_after.has_value());
  for (const auto& pr : d.probes) CHECK(pr.trend.holds);
  const auto csv = demo_csv(d);
  CHECK(csv.rfind("n,lambda_n,phi_n,a_n,E_at_0.5,E_at_1,data_partial,solution_partial_0.5,solution_partial_1,", 0) == 0);
  CHECK(format_demo(d).find("trend") != std::string::npos);
}

TEST_CASE("demo rejects probes outside (0, T0]") {
  const auto p = params("holder:0.5", "power:1:1");
  const auto seed = activator::SeedCoefficient::standard(p);
  CHECK_THROWS_AS(demo_loss(p, seed, {}, 0.0, 0.0, {0.0}), Error);
  CHECK_THROWS_AS(demo_loss(p, seed, {}, 0.0, 0.0, {1.5}), Error);
}
