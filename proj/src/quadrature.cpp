#include "deriloss/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

#include "deriloss/error.hpp"

namespace deriloss::quad {

namespace {
constexpr unsigned kMaxDepth = 15;

void check(double v) {
  if (std::isnan(v)) fail(ErrorKind::NonFiniteEvaluation, "quadrature produced NaN");
}
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kMaxDepth, rel_tol, &err, &l1);
  check(v);
  return v;
}

double integrate_log(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(a > 0.0) || b < a) fail(ErrorKind::InvalidArgument, "integrate_log needs 0 < a <= b");
  if (a == b) return 0.0;
  auto g = [&f](double u) {
    const double t = std::exp(u);
    return f(t) * t;
  };
  return integrate(g, std::log(a), std::log(b), rel_tol);
}

double integrate_from_zero(const std::function<double(double)>& f, double b, double rel_tol) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0;
  double l1 = 0.0;
  const double v = ts.integrate(f, 0.0, b, rel_tol, &err, &l1);
  check(v);
  return v;
}

}  // namespace deriloss::quad
