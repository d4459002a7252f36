#pragma once

#include <functional>

namespace deriloss::quad {

/// Adaptive Gauss-Kronrod (15/31) on [a, b], subdividing until the error
/// estimate drops below rel_tol times the L1 norm.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

/// Same rule after substituting t = exp(u); suited to integrands that blow up
/// at the left end. Requires 0 < a <= b.
double integrate_log(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

/// Tanh-sinh on (0, b] for integrable endpoint singularities at zero.
double integrate_from_zero(const std::function<double(double)>& f, double b, double rel_tol = 1e-12);

}  // namespace deriloss::quad
