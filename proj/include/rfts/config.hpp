#pragma once

// Experiment configuration read from JSON. Every field is validated when the
// file is loaded, before any command produces output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfts/certify.hpp"
#include "rfts/integrate.hpp"
#include "rfts/montecarlo.hpp"
#include "rfts/noise.hpp"
#include "rfts/systems.hpp"

namespace rfts {

struct NoiseConfig {
  std::string kind = "zero";  // cosine | filtered | zero
  std::vector<double> amplitudes;
  std::vector<double> omegas;
  double intensity = 1.0;  // A
  double tau_f = 1.0;
  std::size_t dimension = 0;  // 0: the model's noise dimension
  std::optional<double> declared_k;
  std::optional<double> h;  // grid step; defaults to integrator.h
};

struct CertifyParams {
  double box_radius = 5.0;
  std::size_t n_samples = 2000;
  double tolerance = defaults::kInequalityTol;
  std::vector<double> t_grid{0.0};
  std::uint64_t seed = 7;
};

struct NoiseCheckParams {
  std::size_t n_paths = 200;
  double horizon = 20.0;
  std::vector<double> wlln_times;  // empty: {horizon}
  double delta = 0.1;
  double max_violation_fraction = 0.05;
  double l1_t_min = 1.0;  // measured from t0
};

struct ExperimentConfig {
  std::string model;
  std::vector<double> x0;
  double t0 = 0.0;
  NoiseConfig noise;
  IntegratorConfig integrator;
  std::optional<nlohmann::json> certificate;  // raw block, checked at load
  CertifyParams certify;
  NoiseCheckParams noise_check;
  std::size_t n_paths = 500;
  std::uint64_t master_seed = 1;
  double settled_threshold = defaults::kSettledFraction;
  std::string output_dir = "out";

  SystemModel build_model() const;
  NoiseProcess build_noise() const;
  double noise_step() const { return noise.h.value_or(integrator.h); }

  // Throws ConfigError when the block is absent or empty,
  // ConstantConditionError when c1 <= 2 c2 sqrt(K).
  Certificate build_certificate() const;

  McConfig mc(std::size_t jobs) const;
};

// Throws ConfigError naming the offending field. A certificate that violates
// the constant condition is accepted here and rejected by build_certificate.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rfts
