#pragma once

#include <functional>

namespace rfts {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod-Gauss difference summed over accepted panels
  bool converged = false;
  long evaluations = 0;
};

// Adaptive Gauss-Kronrod (7/15) with recursive bisection.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                    double b, double abs_tol, double rel_tol,
                                    int max_depth = 48);

// int_0^b f(v) dv for f with an integrable singularity at 0.
//
// Integrates over the dyadic panels [b 2^-(j+1), b 2^-j] (the substitution
// v = b e^-s cut into unit-log2 pieces) and stops once the panel contributions
// are negligible, or once they decay at a stable geometric rate, in which case
// the remaining tail is summed in closed form. converged == false means the
// panels never started to decay: the integral diverges at 0.
QuadratureResult integrate_from_zero(const std::function<double(double)>& f, double b,
                                     double rel_tol = 1e-14);

}  // namespace rfts
