#include "rfts/systems.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "rfts/defaults.hpp"
#include "rfts/error.hpp"
#include "rfts/quadrature.hpp"

namespace rfts {

SystemModel::SystemModel(std::string name, std::size_t state_dim, std::size_t noise_dim,
                         VectorField drift, VectorField gain)
    : name_(std::move(name)),
      n_(state_dim),
      l_(noise_dim),
      drift_(std::move(drift)),
      gain_(std::move(gain)) {
  if (n_ == 0 || l_ == 0) throw InvalidParameter("system dimensions must be positive");
  if (!drift_ || !gain_) throw InvalidParameter("system evaluators must be set");
}

std::vector<double> SystemModel::drift(std::span<const double> x, double t) const {
  if (x.size() != n_) throw InvalidParameter("state dimension mismatch");
  std::vector<double> out(n_, 0.0);
  drift_(x, t, out);
  return out;
}

std::vector<double> SystemModel::gain(std::span<const double> x, double t) const {
  if (x.size() != n_) throw InvalidParameter("state dimension mismatch");
  std::vector<double> out(n_ * l_, 0.0);
  gain_(x, t, out);
  return out;
}

double signed_power(double x, double p) {
  if (x == 0.0) return 0.0;
  const double m = std::pow(std::abs(x), p);
  return x < 0.0 ? -m : m;
}

double matrix_norm2(std::span<const double> m, std::size_t rows, std::size_t cols) {
  if (rows == 1 || cols == 1) {
    double s = 0.0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> mat(m.data(), static_cast<Eigen::Index>(rows),
                                       static_cast<Eigen::Index>(cols));
  const Eigen::JacobiSVD<RowMajor> svd(mat);
  return svd.singularValues()(0);
}

SystemModel make_example1() {
  auto drift = [](std::span<const double> x, double, std::span<double> out) {
    out[0] = -signed_power(x[0], 1.0 / 3.0) - 0.5 * x[0] + (2.0 / 3.0) * x[1];
    out[1] = -signed_power(x[1], 1.0 / 3.0) - x[1] + (1.0 / 3.0) * x[0];
  };
  auto gain = [](std::span<const double> x, double, std::span<double> out) {
    out[0] = signed_power(x[0], 1.0 / 3.0);
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = signed_power(x[1], 1.0 / 3.0);
  };
  return SystemModel("example1", 2, 2, drift, gain);
}

// The controller's middle term is read as (3x atan^2 - x)/(1+x^2): that term
// cancels 3x atan^2/(1+x^2) - x/(1+x^2) in the drift exactly, leaving
// -(1+x^2) atan^{1/3}, so dV/dx f = -|atan x|^{4/3} for V = atan^2 / 2.
double paper_controller(double x) {
  const double a = std::atan(x);
  const double q = 1.0 + x * x;
  return -q * signed_power(a, 1.0 / 3.0) - (3.0 * x * a * a - x) / q;
}

SystemModel make_example2(std::function<double(double)> control, double noise_gain_scale) {
  if (!control) throw InvalidParameter("example2 needs a control law");
  if (!(noise_gain_scale >= 0.0)) throw InvalidParameter("noise gain scale must be >= 0");
  auto drift = [control = std::move(control)](std::span<const double> x, double,
                                              std::span<double> out) {
    const double v = x[0];
    const double a = std::atan(v);
    const double q = 1.0 + v * v;
    out[0] = 3.0 * v * a * a / q + control(v) - v / q;
  };
  auto gain = [noise_gain_scale](std::span<const double> x, double, std::span<double> out) {
    const double v = x[0];
    out[0] = 0.5 * (1.0 + v * v) * signed_power(std::atan(v), 1.0 / 3.0) * noise_gain_scale;
  };
  return SystemModel("example2", 1, 1, std::move(drift), std::move(gain));
}

namespace {

SystemModel scalar_model(std::string name, std::function<double(double)> rhs) {
  auto drift = [rhs = std::move(rhs)](std::span<const double> x, double, std::span<double> out) {
    out[0] = rhs(x[0]);
  };
  auto gain = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
  return SystemModel(std::move(name), 1, 1, std::move(drift), std::move(gain));
}

SystemModel renamed(SystemModel m, std::string name) {
  return SystemModel(std::move(name), m.state_dim(), m.noise_dim(),
                     [m](std::span<const double> x, double t, std::span<double> o) { m.drift(x, t, o); },
                     [m](std::span<const double> x, double t, std::span<double> o) { m.gain(x, t, o); });
}

}  // namespace

std::vector<std::string> builtin_model_names() {
  return {"example1",      "example2-open",   "example2-closed", "linear-stable",
          "linear-unstable", "cubic-unstable", "sqrt-decay",      "cuberoot-decay"};
}

SystemModel make_builtin_model(const std::string& name) {
  if (name == "example1") return make_example1();
  if (name == "example2-open") {
    return renamed(make_example2([](double) { return 0.0; }), name);
  }
  if (name == "example2-closed") return renamed(make_example2(paper_controller), name);
  if (name == "linear-stable") return scalar_model(name, [](double x) { return -x; });
  if (name == "linear-unstable") return scalar_model(name, [](double x) { return x; });
  if (name == "cubic-unstable") return scalar_model(name, [](double x) { return x * x * x; });
  if (name == "sqrt-decay") {
    return scalar_model(name, [](double x) { return -signed_power(x, 0.5); });
  }
  if (name == "cuberoot-decay") {
    return scalar_model(name, [](double x) { return -signed_power(x, 1.0 / 3.0); });
  }
  throw InvalidParameter("unknown model: " + name);
}

ConditionReport check_origin(const SystemModel& model, std::span<const double> t_grid,
                             double tol) {
  if (!(tol > 0.0)) throw InvalidParameter("check_origin tolerance must be positive");
  ConditionReport report("origin", tol);
  const std::vector<double> zero(model.state_dim(), 0.0);
  for (double t : t_grid) {
    const auto f = model.drift(zero, t);
    const auto g = model.gain(zero, t);
    double fn = 0.0;
    for (double v : f) fn += v * v;
    fn = std::sqrt(fn);
    const double gn = matrix_norm2(g, model.state_dim(), model.noise_dim());
    const double worst = std::isfinite(fn) && std::isfinite(gn)
                             ? std::max(fn, gn)
                             : std::numeric_limits<double>::infinity();
    report.record(-worst, zero, t);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Moduli of continuity

namespace {

constexpr double kLogOsgoodKnee = 0.1353352832366127;  // e^-2

double term_value(const ModulusTerm& term, double u) {
  if (u <= 0.0) return 0.0;
  switch (term.family) {
    case ModulusFamily::kLinear:
      return term.coefficient * u;
    case ModulusFamily::kRoot:
      return term.coefficient * std::pow(u, term.exponent);
    case ModulusFamily::kLogOsgood:
      if (u <= kLogOsgoodKnee) return term.coefficient * u * std::log(1.0 / u);
      return term.coefficient * (u + kLogOsgoodKnee);
  }
  return 0.0;
}

}  // namespace

Modulus::Modulus(std::vector<ModulusTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw InvalidParameter("modulus needs at least one term");
  for (const auto& t : terms_) {
    if (!(t.coefficient > 0.0)) throw InvalidParameter("modulus coefficient must be positive");
    if (t.family == ModulusFamily::kRoot && !(t.exponent > 0.0 && t.exponent <= 1.0)) {
      throw InvalidParameter("root modulus exponent must be in (0, 1]");
    }
  }
  double prev = (*this)(0.0);
  for (int i = 1; i <= 400; ++i) {
    const double u = std::pow(10.0, -12.0 + 14.0 * i / 400.0);
    const double v = (*this)(u);
    if (!(v > prev)) throw InvalidParameter("modulus is not strictly increasing on the sample grid");
    prev = v;
  }
}

Modulus Modulus::linear(double coefficient) {
  return Modulus({{ModulusFamily::kLinear, coefficient, 1.0}});
}

Modulus Modulus::root(double coefficient, double exponent) {
  return Modulus({{ModulusFamily::kRoot, coefficient, exponent}});
}

Modulus Modulus::log_osgood(double coefficient) {
  return Modulus({{ModulusFamily::kLogOsgood, coefficient, 1.0}});
}

Modulus Modulus::operator+(const Modulus& other) const {
  std::vector<ModulusTerm> t = terms_;
  t.insert(t.end(), other.terms_.begin(), other.terms_.end());
  return Modulus(std::move(t));
}

double Modulus::operator()(double u) const {
  double s = 0.0;
  for (const auto& t : terms_) s += term_value(t, u);
  return s;
}

OsgoodMargins osgood_margins(const SystemModel& model, const ModulusPair& moduli,
                             std::span<const double> x1, std::span<const double> x2,
                             double t) {
  const std::size_t n = model.state_dim();
  const std::size_t l = model.noise_dim();
  const auto f1 = model.drift(x1, t);
  const auto f2 = model.drift(x2, t);
  const auto g1 = model.gain(x1, t);
  const auto g2 = model.gain(x2, t);
  double dx = 0.0;
  double df = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dx += (x1[i] - x2[i]) * (x1[i] - x2[i]);
    df += (f1[i] - f2[i]) * (f1[i] - f2[i]);
  }
  dx = std::sqrt(dx);
  df = std::sqrt(df);
  std::vector<double> dg(n * l);
  for (std::size_t i = 0; i < dg.size(); ++i) dg[i] = g1[i] - g2[i];
  const double dgn = matrix_norm2(dg, n, l);
  return {moduli.c1_t(t) * moduli.kappa(dx) - df, moduli.c2_t(t) * moduli.rho(dx) - dgn * dgn};
}

OsgoodReport check_osgood(const SystemModel& model, const ModulusPair& moduli,
                          double box_radius, std::size_t n_pairs,
                          std::span<const double> t_grid, double tol, std::uint64_t seed) {
  if (n_pairs < 1) throw InvalidParameter("check_osgood needs n_pairs >= 1");
  if (!(box_radius > 0.0)) throw InvalidParameter("box radius must be positive");
  OsgoodReport report;
  report.drift.tolerance = tol;
  report.gain.tolerance = tol;
  const std::size_t n = model.state_dim();
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> coord(-box_radius, box_radius);
  std::vector<double> x1(n), x2(n);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    for (auto& v : x1) v = coord(gen);
    for (auto& v : x2) v = coord(gen);
    for (double t : t_grid) {
      const OsgoodMargins m = osgood_margins(model, moduli, x1, x2, t);
      report.drift.record(m.drift, x1, t, x2);
      report.gain.record(m.gain, x1, t, x2);
    }
  }
  report.pass = report.drift.pass && report.gain.pass;
  return report;
}

namespace {

DivergenceFamily divergence_family(std::string name, const std::function<double(double)>& inv,
                                   double gamma_upper) {
  DivergenceFamily fam;
  fam.name = std::move(name);
  // u = e^s turns du/m(u) into e^s/m(e^s) ds, smooth on each decade.
  auto in_log = [&inv](double s) {
    const double u = std::exp(s);
    return u * inv(u);
  };
  double upper = gamma_upper;
  double running = 0.0;
  for (int k = 1; k <= 12; ++k) {
    const double delta = std::pow(10.0, -k);
    if (delta > gamma_upper) continue;
    if (delta < upper) {
      const QuadratureResult seg =
          integrate_adaptive(in_log, std::log(delta), std::log(upper), 1e-14, 1e-12);
      if (!(seg.value >= 0.0)) {
        throw QuadratureError("non-monotone Osgood integral sequence for " + fam.name);
      }
      running += seg.value;
      upper = delta;
    }
    fam.deltas.push_back(delta);
    fam.integrals.push_back(running);
  }
  for (std::size_t i = 1; i < fam.integrals.size(); ++i) {
    const double inc = fam.integrals[i] - fam.integrals[i - 1];
    if (inc < 0.0) throw QuadratureError("non-monotone Osgood integral sequence for " + fam.name);
    fam.increments.push_back(inc);
  }
  if (fam.increments.size() >= 3) {
    const auto [lo, hi] = std::minmax_element(fam.increments.begin(), fam.increments.end());
    fam.diverging = *hi > 0.0 && *lo >= defaults::kDivergenceRatio * *hi;
  }
  return fam;
}

}  // namespace

DivergenceReport check_osgood_divergence(const ModulusPair& moduli, double gamma_upper) {
  if (!(gamma_upper > 0.0)) throw InvalidParameter("gamma_upper must be positive");
  DivergenceReport r;
  r.gamma_upper = gamma_upper;
  r.rho = divergence_family("rho", [&](double u) { return 1.0 / moduli.rho(u); }, gamma_upper);
  r.sqrt_rho_kappa = divergence_family(
      "sqrt_rho_plus_kappa",
      [&](double u) { return 1.0 / (std::sqrt(moduli.rho(u)) + moduli.kappa(u)); }, gamma_upper);
  return r;
}

}  // namespace rfts
