#pragma once

// Lyapunov finite-time certificates: sandwich bounds, drift and gain
// inequalities, the theta transform, the expected settling-time bound and the
// finite-extinction decay envelope.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rfts/report.hpp"
#include "rfts/systems.hpp"

namespace rfts {

// s -> a s^b on s >= 0.
class PowerLaw {
 public:
  PowerLaw(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  double operator()(double s) const;
  double inverse(double y) const;

  bool operator==(const PowerLaw&) const = default;

 private:
  double a_;
  double b_;
};

struct LyapunovFunction {
  std::string name;
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

LyapunovFunction half_norm_squared(std::size_t dim);  // |x|^2 / 2
LyapunovFunction half_arctan_squared();               // atan(x)^2 / 2, scalar

// "half-norm-squared" or "half-arctan-squared".
LyapunovFunction make_builtin_lyapunov(const std::string& name, std::size_t dim);

// r(v) = v^gamma with 0 <= gamma < 1 (r(0) = 0).
struct PowerRate {
  double gamma = 0.5;
};

// Arbitrary rate r. integrable_asserted records the caller's claim that
// int_0^eps dv / r(v) is finite; theta still checks it numerically.
struct GeneralRate {
  std::function<double(double)> r;
  bool integrable_asserted = false;
};

using Rate = std::variant<PowerRate, GeneralRate>;

class Certificate {
 public:
  // Throws ConstantConditionError unless c1 > 2 c2 sqrt(K), and
  // InvalidParameter for the other construction invariants.
  Certificate(LyapunovFunction v, Rate rate, double c1, double c2, double k,
              PowerLaw alpha1, PowerLaw alpha2);

  const LyapunovFunction& lyapunov() const { return v_; }
  const Rate& rate_form() const { return rate_; }
  bool is_power_law() const { return std::holds_alternative<PowerRate>(rate_); }
  double gamma() const;  // power-law form only

  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double noise_bound() const { return k_; }
  const PowerLaw& alpha1() const { return alpha1_; }
  const PowerLaw& alpha2() const { return alpha2_; }

  // c1 - 2 c2 sqrt(K) > 0.
  double decay_rate() const { return c1_ - 2.0 * c2_ * std::sqrt(k_); }

  double rate(double v) const;
  double value(std::span<const double> x) const { return v_.value(x); }

 private:
  LyapunovFunction v_;
  Rate rate_;
  double c1_;
  double c2_;
  double k_;
  PowerLaw alpha1_;
  PowerLaw alpha2_;
};

// theta(v) = int_0^v dv' / r(v').
double theta(const Certificate& cert, double v);
double theta_inverse(const Certificate& cert, double y);

// theta(V0) / (c1 - 2 c2 sqrt(K)).
double settling_bound(const Certificate& cert, double v0);

// Time after which the decay envelope is identically 0.
double extinction_time(const Certificate& cert, double x0_norm);

// alpha1^{-1}(theta^{-1}(max(theta(alpha2(|x0|)) - (c1 - 2 c2 sqrt K)(t - t0), 0))).
double decay_envelope(const Certificate& cert, double x0_norm, double t_minus_t0);

// Uniform samples in the ball of the given radius, followed by deterministic
// points on the coordinate axes (radii R 10^-k, R j/4, and 1), and the
// diagonals at R and R/2.
std::vector<std::vector<double>> sample_states(std::size_t dim, double radius, std::size_t n,
                                               std::uint64_t seed);

ConditionReport verify_sandwich(const Certificate& cert, double box_radius, std::size_t n,
                                double tol, std::uint64_t seed);

struct DriftReport {
  ConditionReport drift{"drift", 0.0};  // dV/dx f + c1 r(V) <= tol
  ConditionReport gain{"gain", 0.0};    // |dV/dx g| - c2 r(V) <= tol
  bool pass = true;
};

DriftReport verify_drift(const Certificate& cert, const SystemModel& model, double box_radius,
                         std::size_t n, std::span<const double> t_grid, double tol,
                         std::uint64_t seed);

struct FitResult {
  double c1 = 0.0;  // inf of -(dV/dx f) / V^gamma
  double c2 = 0.0;  // sup of |dV/dx g| / V^gamma
  bool certifiable = false;
  std::size_t n_samples = 0;
  std::vector<double> c1_argmin;
};

// Sampled tightest constants for the power-law drift and gain conditions.
// States with V(x) = 0 are skipped.
FitResult fit_constants(const SystemModel& model, const LyapunovFunction& v, double gamma,
                        double box_radius, std::size_t n, std::span<const double> t_grid,
                        std::uint64_t seed);

nlohmann::json to_json(const Certificate& cert);

// Reads {gamma, c1, c2, K, alpha1: {a, b}, alpha2: {a, b}, V}.
Certificate certificate_from_json(const nlohmann::json& j, std::size_t dim);

}  // namespace rfts
