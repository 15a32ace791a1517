#pragma once

// Random nonlinear systems x' = f(x, t) + g(x, t) xi(t), the two worked
// examples, and sampled checks of the structural assumptions.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rfts/report.hpp"

namespace rfts {

// out has n entries for the drift and n*l (row-major) for the gain.
using VectorField = std::function<void(std::span<const double> x, double t, std::span<double> out)>;

// Evaluators must be pure: the model is shared by concurrent integrations.
class SystemModel {
 public:
  SystemModel(std::string name, std::size_t state_dim, std::size_t noise_dim,
              VectorField drift, VectorField gain);

  const std::string& name() const { return name_; }
  std::size_t state_dim() const { return n_; }
  std::size_t noise_dim() const { return l_; }

  void drift(std::span<const double> x, double t, std::span<double> out) const {
    drift_(x, t, out);
  }
  void gain(std::span<const double> x, double t, std::span<double> out) const {
    gain_(x, t, out);
  }

  std::vector<double> drift(std::span<const double> x, double t) const;
  std::vector<double> gain(std::span<const double> x, double t) const;

 private:
  std::string name_;
  std::size_t n_;
  std::size_t l_;
  VectorField drift_;
  VectorField gain_;
};

// sign(x) |x|^p.
double signed_power(double x, double p);

// Spectral norm of a rows x cols row-major matrix.
double matrix_norm2(std::span<const double> m, std::size_t rows, std::size_t cols);

SystemModel make_example1();

double paper_controller(double x);

// Scalar system with drift 3x atan(x)^2/(1+x^2) + u(x) - x/(1+x^2) and gain
// (1+x^2)/2 * atan(x)^{1/3} * noise_gain_scale.
SystemModel make_example2(std::function<double(double)> control,
                          double noise_gain_scale = 1.0);

// Built-ins addressable by name: example1, example2-open, example2-closed,
// linear-stable, linear-unstable, cubic-unstable, sqrt-decay, cuberoot-decay.
SystemModel make_builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

ConditionReport check_origin(const SystemModel& model, std::span<const double> t_grid,
                             double tol);

// Concave modulus of continuity: a sum of terms from three families.
enum class ModulusFamily { kLinear, kRoot, kLogOsgood };

struct ModulusTerm {
  ModulusFamily family = ModulusFamily::kLinear;
  double coefficient = 1.0;
  double exponent = 1.0;  // kRoot only, 0 < p <= 1
};

class Modulus {
 public:
  explicit Modulus(std::vector<ModulusTerm> terms);

  static Modulus linear(double coefficient);
  static Modulus root(double coefficient, double exponent);
  // L u log(1/u) on [0, e^-2], continued by its tangent L (u + e^-2) beyond.
  static Modulus log_osgood(double coefficient);

  Modulus operator+(const Modulus& other) const;
  double operator()(double u) const;

  const std::vector<ModulusTerm>& terms() const { return terms_; }

 private:
  std::vector<ModulusTerm> terms_;
};

using TimeWeight = std::function<double(double)>;

struct ModulusPair {
  Modulus kappa;
  Modulus rho;
  TimeWeight c1_t = [](double) { return 1.0; };
  TimeWeight c2_t = [](double) { return 1.0; };
};

struct OsgoodReport {
  ConditionReport drift{"osgood_drift", 0.0};  // |f1 - f2| <= c1(t) kappa(|x1 - x2|)
  ConditionReport gain{"osgood_gain", 0.0};    // ||g1 - g2||^2 <= c2(t) rho(|x1 - x2|)
  bool pass = true;
};

struct OsgoodMargins {
  double drift = 0.0;
  double gain = 0.0;
};

OsgoodMargins osgood_margins(const SystemModel& model, const ModulusPair& moduli,
                             std::span<const double> x1, std::span<const double> x2,
                             double t);

OsgoodReport check_osgood(const SystemModel& model, const ModulusPair& moduli,
                          double box_radius, std::size_t n_pairs,
                          std::span<const double> t_grid, double tol, std::uint64_t seed);

struct DivergenceFamily {
  std::string name;
  std::vector<double> deltas;
  std::vector<double> integrals;   // integral over [delta, gamma]
  std::vector<double> increments;  // successive differences
  bool diverging = false;
};

struct DivergenceReport {
  double gamma_upper = 0.0;
  DivergenceFamily rho;               // du / rho(u)
  DivergenceFamily sqrt_rho_kappa;    // du / (sqrt(rho(u)) + kappa(u))
};

DivergenceReport check_osgood_divergence(const ModulusPair& moduli, double gamma_upper);

}  // namespace rfts
