#include "rfts/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rfts/defaults.hpp"
#include "rfts/error.hpp"
#include "rfts/quadrature.hpp"

namespace rfts {

PowerLaw::PowerLaw(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidParameter("power law a s^b needs a > 0 and b > 0");
  }
}

double PowerLaw::operator()(double s) const { return s <= 0.0 ? 0.0 : a_ * std::pow(s, b_); }

double PowerLaw::inverse(double y) const {
  return y <= 0.0 ? 0.0 : std::pow(y / a_, 1.0 / b_);
}

LyapunovFunction half_norm_squared(std::size_t dim) {
  LyapunovFunction v;
  v.name = "half-norm-squared";
  v.dim = dim;
  v.value = [](std::span<const double> x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return 0.5 * s;
  };
  v.gradient = [](std::span<const double> x, std::span<double> out) {
    std::copy(x.begin(), x.end(), out.begin());
  };
  return v;
}

LyapunovFunction half_arctan_squared() {
  LyapunovFunction v;
  v.name = "half-arctan-squared";
  v.dim = 1;
  v.value = [](std::span<const double> x) {
    const double a = std::atan(x[0]);
    return 0.5 * a * a;
  };
  v.gradient = [](std::span<const double> x, std::span<double> out) {
    out[0] = std::atan(x[0]) / (1.0 + x[0] * x[0]);
  };
  return v;
}

LyapunovFunction make_builtin_lyapunov(const std::string& name, std::size_t dim) {
  if (name == "half-norm-squared") return half_norm_squared(dim);
  if (name == "half-arctan-squared") {
    if (dim != 1) throw InvalidParameter("half-arctan-squared is defined for scalar states");
    return half_arctan_squared();
  }
  throw InvalidParameter("unknown Lyapunov function: " + name);
}

Certificate::Certificate(LyapunovFunction v, Rate rate, double c1, double c2, double k,
                         PowerLaw alpha1, PowerLaw alpha2)
    : v_(std::move(v)),
      rate_(std::move(rate)),
      c1_(c1),
      c2_(c2),
      k_(k),
      alpha1_(alpha1),
      alpha2_(alpha2) {
  if (!v_.value || !v_.gradient || v_.dim == 0) {
    throw InvalidParameter("certificate needs V and its gradient");
  }
  if (const auto* p = std::get_if<PowerRate>(&rate_)) {
    if (!(p->gamma >= 0.0 && p->gamma < 1.0)) {
      throw InvalidParameter("power-law exponent gamma must be in [0, 1)");
    }
  } else if (!std::get<GeneralRate>(rate_).r) {
    throw InvalidParameter("general rate needs an evaluator");
  }
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidParameter("c1 and c2 must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidParameter("K must be nonnegative");
  if (!(c1 > 2.0 * c2 * std::sqrt(k))) {
    throw ConstantConditionError("constant condition violated: c1 must exceed 2 c2 sqrt(K)");
  }
  for (int i = 0; i <= 240; ++i) {
    const double s = std::pow(10.0, -6.0 + 12.0 * i / 240.0);
    if (alpha1_(s) > alpha2_(s) * (1.0 + 1e-12)) {
      throw InvalidParameter("alpha1(s) exceeds alpha2(s) on the sample grid");
    }
  }
  const std::vector<double> zero(v_.dim, 0.0);
  std::vector<double> grad(v_.dim, 0.0);
  v_.gradient(zero, grad);
  if (std::abs(v_.value(zero)) > 1e-12) throw InvalidParameter("V(0) must be 0");
  for (double g : grad) {
    if (std::abs(g) > 1e-12) throw InvalidParameter("grad V(0) must be 0");
  }
}

double Certificate::gamma() const {
  if (const auto* p = std::get_if<PowerRate>(&rate_)) return p->gamma;
  throw InvalidParameter("certificate rate is not a power law");
}

double Certificate::rate(double v) const {
  if (v <= 0.0) return 0.0;
  if (const auto* p = std::get_if<PowerRate>(&rate_)) return std::pow(v, p->gamma);
  return std::get<GeneralRate>(rate_).r(v);
}

double theta(const Certificate& cert, double v) {
  if (!(v >= 0.0)) throw InvalidParameter("theta needs v >= 0");
  if (v == 0.0) return 0.0;
  if (cert.is_power_law()) {
    const double e = 1.0 - cert.gamma();
    return std::pow(v, e) / e;
  }
  const auto& r = std::get<GeneralRate>(cert.rate_form()).r;
  const QuadratureResult q = integrate_from_zero([&r](double s) { return 1.0 / r(s); }, v);
  if (!q.converged || !std::isfinite(q.value)) {
    throw RateConditionError("integral of 1/r diverges at 0");
  }
  return q.value;
}

double theta_inverse(const Certificate& cert, double y) {
  if (!(y >= 0.0)) throw InvalidParameter("theta_inverse needs y >= 0");
  if (y == 0.0) return 0.0;
  if (cert.is_power_law()) {
    const double e = 1.0 - cert.gamma();
    return std::pow(e * y, 1.0 / e);
  }
  double lo = 0.0;
  double hi = 1.0;
  while (theta(cert, hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > defaults::kThetaInverseMax) {
      throw RangeError("theta_inverse: root not bracketed below v_max");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-3 * defaults::kThetaInverseRelTol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (theta(cert, mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double settling_bound(const Certificate& cert, double v0) {
  if (!(v0 >= 0.0)) throw InvalidParameter("settling_bound needs V0 >= 0");
  return theta(cert, v0) / cert.decay_rate();
}

double extinction_time(const Certificate& cert, double x0_norm) {
  return theta(cert, cert.alpha2()(x0_norm)) / cert.decay_rate();
}

double decay_envelope(const Certificate& cert, double x0_norm, double t_minus_t0) {
  if (!(x0_norm >= 0.0) || !(t_minus_t0 >= 0.0)) {
    throw InvalidParameter("decay_envelope arguments must be nonnegative");
  }
  if (t_minus_t0 == 0.0 && cert.alpha1() == cert.alpha2()) return x0_norm;
  const double start = theta(cert, cert.alpha2()(x0_norm));
  const double t_ext = start / cert.decay_rate();
  if (t_minus_t0 >= t_ext) return 0.0;
  const double y = start - cert.decay_rate() * t_minus_t0;
  return cert.alpha1().inverse(theta_inverse(cert, std::max(y, 0.0)));
}

std::vector<std::vector<double>> sample_states(std::size_t dim, double radius, std::size_t n,
                                               std::uint64_t seed) {
  if (dim == 0) throw InvalidParameter("sample dimension must be positive");
  if (!(radius > 0.0)) throw InvalidParameter("sample radius must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(n + 4 * dim * 16 + 8);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(dim);
    double s = 0.0;
    for (auto& c : x) {
      c = normal(gen);
      s += c * c;
    }
    s = std::sqrt(s);
    const double r = radius * std::pow(unit(gen), 1.0 / static_cast<double>(dim));
    for (auto& c : x) c = s > 0.0 ? c / s * r : 0.0;
    out.push_back(std::move(x));
  }
  std::vector<double> radii;
  for (int k = 0; k <= 9; ++k) radii.push_back(radius * std::pow(10.0, -k));
  for (int j = 1; j <= 3; ++j) radii.push_back(radius * j / 4.0);
  if (radius >= 1.0) radii.push_back(1.0);
  for (std::size_t axis = 0; axis < dim; ++axis) {
    for (double r : radii) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> x(dim, 0.0);
        x[axis] = sign * r;
        out.push_back(std::move(x));
      }
    }
  }
  if (dim > 1) {
    for (double r : {radius, 0.5 * radius}) {
      const double c = r / std::sqrt(static_cast<double>(dim));
      for (double sign : {1.0, -1.0}) {
        out.push_back(std::vector<double>(dim, sign * c));
      }
    }
  }
  return out;
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

ConditionReport verify_sandwich(const Certificate& cert, double box_radius, std::size_t n,
                                double tol, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("verify_sandwich needs n >= 1");
  ConditionReport report("sandwich", tol);
  for (const auto& x : sample_states(cert.lyapunov().dim, box_radius, n, seed)) {
    const double s = norm2(x);
    const double v = cert.value(x);
    const double margin = std::min(v - cert.alpha1()(s), cert.alpha2()(s) - v);
    report.record(margin, x, 0.0);
  }
  return report;
}

namespace {

struct DirectionalTerms {
  double along_drift = 0.0;  // dV/dx f
  double gain_norm = 0.0;    // |dV/dx g|
};

class DirectionalEvaluator {
 public:
  DirectionalEvaluator(const SystemModel& model, const LyapunovFunction& v)
      : model_(model), v_(v), grad_(model.state_dim()), f_(model.state_dim()),
        g_(model.state_dim() * model.noise_dim()) {
    if (v.dim != model.state_dim()) {
      throw InvalidParameter("Lyapunov function dimension does not match the model");
    }
  }

  DirectionalTerms operator()(std::span<const double> x, double t) {
    const std::size_t n = model_.state_dim();
    const std::size_t l = model_.noise_dim();
    v_.gradient(x, grad_);
    model_.drift(x, t, f_);
    model_.gain(x, t, g_);
    DirectionalTerms d;
    for (std::size_t i = 0; i < n; ++i) d.along_drift += grad_[i] * f_[i];
    double s = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      double row = 0.0;
      for (std::size_t i = 0; i < n; ++i) row += grad_[i] * g_[i * l + j];
      s += row * row;
    }
    d.gain_norm = std::sqrt(s);
    return d;
  }

 private:
  const SystemModel& model_;
  const LyapunovFunction& v_;
  std::vector<double> grad_, f_, g_;
};

}  // namespace

DriftReport verify_drift(const Certificate& cert, const SystemModel& model, double box_radius,
                         std::size_t n, std::span<const double> t_grid, double tol,
                         std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("verify_drift needs n >= 1");
  DriftReport report;
  report.drift.tolerance = tol;
  report.gain.tolerance = tol;
  DirectionalEvaluator eval(model, cert.lyapunov());
  std::vector<std::vector<double>> points = sample_states(model.state_dim(), box_radius, n, seed);
  points.emplace_back(model.state_dim(), 0.0);
  for (const auto& x : points) {
    const double r = cert.rate(cert.value(x));
    for (double t : t_grid) {
      const DirectionalTerms d = eval(x, t);
      report.drift.record(-(d.along_drift + cert.c1() * r), x, t);
      report.gain.record(cert.c2() * r - d.gain_norm, x, t);
    }
  }
  report.pass = report.drift.pass && report.gain.pass;
  return report;
}

FitResult fit_constants(const SystemModel& model, const LyapunovFunction& v, double gamma,
                        double box_radius, std::size_t n, std::span<const double> t_grid,
                        std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("fit_constants needs n >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must be in [0, 1)");
  DirectionalEvaluator eval(model, v);
  FitResult fit;
  fit.c1 = std::numeric_limits<double>::infinity();
  fit.c2 = 0.0;
  for (const auto& x : sample_states(model.state_dim(), box_radius, n, seed)) {
    const double vx = v.value(x);
    if (!(vx > 0.0)) continue;
    const double scale = std::pow(vx, gamma);
    for (double t : t_grid) {
      const DirectionalTerms d = eval(x, t);
      const double c1 = -d.along_drift / scale;
      if (c1 < fit.c1) {
        fit.c1 = c1;
        fit.c1_argmin = x;
      }
      fit.c2 = std::max(fit.c2, d.gain_norm / scale);
      ++fit.n_samples;
    }
  }
  fit.certifiable = fit.n_samples > 0 && fit.c1 > 0.0;
  return fit;
}

nlohmann::json to_json(const Certificate& cert) {
  nlohmann::json j;
  j["gamma"] = cert.gamma();
  j["c1"] = cert.c1();
  j["c2"] = cert.c2();
  j["K"] = cert.noise_bound();
  j["alpha1"] = {{"a", cert.alpha1().a()}, {"b", cert.alpha1().b()}};
  j["alpha2"] = {{"a", cert.alpha2().a()}, {"b", cert.alpha2().b()}};
  j["V"] = cert.lyapunov().name;
  return j;
}

Certificate certificate_from_json(const nlohmann::json& j, std::size_t dim) {
  const auto power = [](const nlohmann::json& p) {
    return PowerLaw(p.at("a").get<double>(), p.at("b").get<double>());
  };
  return Certificate(make_builtin_lyapunov(j.at("V").get<std::string>(), dim),
                     PowerRate{j.at("gamma").get<double>()}, j.at("c1").get<double>(),
                     j.at("c2").get<double>(), j.at("K").get<double>(), power(j.at("alpha1")),
                     power(j.at("alpha2")));
}

}  // namespace rfts
