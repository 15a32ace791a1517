#pragma once

// Stochastic disturbance processes xi(t) and their realized paths.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace rfts {

enum class NoiseKind { kRandomPhaseCosine, kFilteredWhiteNoise, kZero };

std::string_view noise_kind_name(NoiseKind kind);

class NoisePath;

// Immutable description of a second-order process. Safe to share between
// threads; sampling keeps its generator local to each call.
class NoiseProcess {
 public:
  NoiseKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }

  // Per-channel parameters of the cosine kind.
  std::span<const double> amplitudes() const { return amplitudes_; }
  std::span<const double> omegas() const { return omegas_; }

  // Parameters of the filtered kind.
  double intensity() const { return intensity_; }
  double tau_f() const { return tau_f_; }

  // Bound K on sup_t E|xi(t)|^2 carried by this process.
  double declared_mean_square() const { return declared_k_; }

  // E|xi(t)|^2 of the process itself (stationary value).
  double exact_mean_square() const;

  // Copy with a different declared K. Used to model a wrong declaration.
  NoiseProcess with_declared_mean_square(double k) const;

  NoisePath sample_path(double t0, double horizon, double h_noise,
                        std::uint64_t seed) const;

  friend NoiseProcess make_random_phase_cosine(std::vector<double> amplitudes,
                                               std::vector<double> omegas);
  friend NoiseProcess make_filtered_white_noise(double intensity, double tau_f,
                                                std::size_t dimension);
  friend NoiseProcess make_zero_noise(std::size_t dimension);

 private:
  NoiseProcess() = default;

  NoiseKind kind_ = NoiseKind::kZero;
  std::size_t dimension_ = 1;
  std::vector<double> amplitudes_;
  std::vector<double> omegas_;
  double intensity_ = 0.0;
  double tau_f_ = 0.0;
  double declared_k_ = 0.0;
};

// xi_i(t) = -a_i cos(omega_i t + S_i), one uniform phase S_i in [0, 2pi) per
// channel per path. Phases are drawn in channel order from
// std::mt19937_64(seed) through std::uniform_real_distribution<double>(0, 2pi).
// Declared K = sum a_i^2 / 2.
NoiseProcess make_random_phase_cosine(std::vector<double> amplitudes,
                                      std::vector<double> omegas);

// tau_f xi' = -xi + w, sampled through its exact AR(1) transition on the noise
// grid. Each channel starts from the stationary law N(0, A/(2 tau_f)).
// Declared K = dimension * A / (2 tau_f).
NoiseProcess make_filtered_white_noise(double intensity, double tau_f,
                                       std::size_t dimension);

NoiseProcess make_zero_noise(std::size_t dimension);

// One realized path on t_k = t0 + k h, k = 0..cells(). Evaluation between grid
// points is zero-order hold (value at the largest grid point <= t).
class NoisePath {
 public:
  NoisePath(double t0, double h, std::size_t dimension, std::vector<double> values,
            std::uint64_t seed);

  double t0() const { return t0_; }
  double step() const { return h_; }
  std::size_t dimension() const { return dimension_; }
  std::uint64_t seed() const { return seed_; }

  // Number of grid points.
  std::size_t size() const { return values_.size() / dimension_; }
  double time(std::size_t k) const { return t0_ + static_cast<double>(k) * h_; }
  double end_time() const { return time(size() - 1); }

  std::span<const double> value(std::size_t k) const {
    return {values_.data() + k * dimension_, dimension_};
  }
  std::span<const double> values() const { return values_; }

  // Grid index used by the zero-order hold at time t (clamped to the grid).
  std::size_t index_at(double t) const;
  std::span<const double> value_at(double t) const { return value(index_at(t)); }

  // Running integral of |xi(s)|^p from t0 to each grid point, p in {1, 2}.
  // Left-rectangle rule, which is exact for the zero-order hold.
  std::vector<double> running_integral(int power) const;

  void write_csv(std::ostream& os) const;

 private:
  double t0_;
  double h_;
  std::size_t dimension_;
  std::vector<double> values_;
  std::uint64_t seed_;
};

inline NoisePath sample_path(const NoiseProcess& process, double t0, double horizon,
                             double h_noise, std::uint64_t seed) {
  return process.sample_path(t0, horizon, h_noise, seed);
}

// Number of grid cells covering [t0, horizon] with step h.
std::size_t grid_cells(double t0, double horizon, double h);

// Per-path seed derived from (master seed, path index) only.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

struct MomentReport {
  double estimate = 0.0;
  double half_width = 0.0;  // 95% normal interval over per-path averages
  std::size_t n_paths = 0;
  double horizon = 0.0;
  double declared = 0.0;
  bool pass = false;  // estimate - half_width <= declared
};

MomentReport estimate_mean_square(const NoiseProcess& process, std::size_t n_paths,
                                  double horizon, double h_noise, std::uint64_t seed,
                                  double t0 = 0.0);

struct WllnReport {
  std::vector<double> times;
  std::vector<double> violation_fraction;
  double delta = 0.0;
  double exact_mean_square = 0.0;
  std::size_t n_paths = 0;
};

// For each t in t_grid, the fraction of paths whose time average of |xi|^2
// over [t0, t] is at least delta away from the exact mean square.
WllnReport check_wlln(const NoiseProcess& process, std::span<const double> t_grid,
                      double delta, std::size_t n_paths, double h_noise,
                      std::uint64_t seed, double t0 = 0.0);

// max over grid t >= t_min of (int_{t0}^t |xi|) / (2 sqrt(K) (t - t0)).
double check_l1_bound(const NoisePath& path, double k, double t_min);

// The same ratio at every grid point (entry 0 is 0).
std::vector<double> l1_ratio_series(const NoisePath& path, double k);

}  // namespace rfts
