#include "rfts/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rfts/error.hpp"

namespace rfts {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double kronrod;
  double gauss;
};

Panel gk15(const std::function<double(double)>& f, double a, double b, long& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double s = f(center - dx) + f(center + dx);
    k += kWgk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  evals += 15;
  return {k * half, g * half};
}

void adapt(const std::function<double(double)>& f, double a, double b, double tol,
           int depth, QuadratureResult& acc) {
  const Panel p = gk15(f, a, b, acc.evaluations);
  if (!std::isfinite(p.kronrod)) {
    throw QuadratureError("non-finite integrand on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  }
  const double err = std::abs(p.kronrod - p.gauss);
  if (err <= tol || depth == 0 || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a)) {
    acc.value += p.kronrod;
    acc.error += err;
    if (err > tol) acc.converged = false;
    return;
  }
  const double mid = 0.5 * (a + b);
  adapt(f, a, mid, 0.5 * tol, depth - 1, acc);
  adapt(f, mid, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                    double b, double abs_tol, double rel_tol, int max_depth) {
  QuadratureResult acc;
  acc.converged = true;
  if (a == b) return acc;
  // The first pass sets the scale for the relative tolerance.
  long probe_evals = 0;
  const Panel probe = gk15(f, a, b, probe_evals);
  const double tol = std::max(abs_tol, rel_tol * std::abs(probe.kronrod));
  adapt(f, a, b, tol, max_depth, acc);
  acc.evaluations += probe_evals;
  return acc;
}

QuadratureResult integrate_from_zero(const std::function<double(double)>& f, double b,
                                     double rel_tol) {
  QuadratureResult out;
  if (b == 0.0) {
    out.converged = true;
    return out;
  }
  if (!(b > 0.0)) throw QuadratureError("integrate_from_zero needs b >= 0");

  double hi = b;
  double total = 0.0;
  double error = 0.0;
  double prev_panel = 0.0;
  double prev_ratio = std::numeric_limits<double>::quiet_NaN();
  int stable_count = 0;
  constexpr int kMinPanels = 8;
  for (int j = 0; hi > 1e-290; ++j) {
    const double lo = 0.5 * hi;
    QuadratureResult panel;
    try {
      panel = integrate_adaptive(f, lo, hi, 0.0, 1e-15);
    } catch (const QuadratureError&) {
      break;  // integrand overflows near 0
    }
    if (!std::isfinite(total + panel.value)) break;
    out.evaluations += panel.evaluations;
    total += panel.value;
    error += panel.error;
    hi = lo;

    if (j >= 1 && prev_panel > 0.0) {
      const double ratio = panel.value / prev_panel;
      if (std::abs(ratio - prev_ratio) <= 1e-9 * std::abs(ratio)) {
        ++stable_count;
      } else {
        stable_count = 0;
      }
      prev_ratio = ratio;
      if (j >= kMinPanels) {
        if (std::abs(panel.value) <= rel_tol * 1e-3 * std::abs(total) && ratio < 1.0) {
          out.converged = true;
          break;
        }
        // Power-law behaviour at 0: sum the geometric tail exactly.
        if (stable_count >= 4 && ratio < 1.0 - 1e-9) {
          total += panel.value * ratio / (1.0 - ratio);
          out.converged = true;
          break;
        }
      }
    }
    prev_panel = panel.value;
  }
  out.value = total;
  out.error = error;
  return out;
}

}  // namespace rfts
