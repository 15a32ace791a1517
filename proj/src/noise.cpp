#include "rfts/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "rfts/defaults.hpp"
#include "rfts/error.hpp"
#include "rfts/io.hpp"
#include "rfts/kernels.hpp"

namespace rfts {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(std::string(what) + " must be positive and finite");
  }
}

struct Summary {
  double mean = 0.0;
  double half_width = 0.0;
};

Summary summarize(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, defaults::kConfidenceZ * sd / std::sqrt(n)};
}

}  // namespace

std::string_view noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kRandomPhaseCosine:
      return "cosine";
    case NoiseKind::kFilteredWhiteNoise:
      return "filtered";
    case NoiseKind::kZero:
      return "zero";
  }
  return "unknown";
}

NoiseProcess make_random_phase_cosine(std::vector<double> amplitudes,
                                      std::vector<double> omegas) {
  if (amplitudes.empty() || amplitudes.size() != omegas.size()) {
    throw InvalidParameter("cosine noise needs equal-length, non-empty amplitude and omega lists");
  }
  double k = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    require_positive(amplitudes[i], "cosine amplitude");
    require_positive(omegas[i], "cosine omega");
    k += 0.5 * amplitudes[i] * amplitudes[i];
  }
  NoiseProcess p;
  p.kind_ = NoiseKind::kRandomPhaseCosine;
  p.dimension_ = amplitudes.size();
  p.amplitudes_ = std::move(amplitudes);
  p.omegas_ = std::move(omegas);
  p.declared_k_ = k;
  return p;
}

NoiseProcess make_filtered_white_noise(double intensity, double tau_f,
                                       std::size_t dimension) {
  require_positive(intensity, "spectral intensity A");
  require_positive(tau_f, "filter time constant tau_f");
  if (dimension == 0) throw InvalidParameter("noise dimension must be >= 1");
  NoiseProcess p;
  p.kind_ = NoiseKind::kFilteredWhiteNoise;
  p.dimension_ = dimension;
  p.intensity_ = intensity;
  p.tau_f_ = tau_f;
  p.declared_k_ = static_cast<double>(dimension) * intensity / (2.0 * tau_f);
  return p;
}

NoiseProcess make_zero_noise(std::size_t dimension) {
  if (dimension == 0) throw InvalidParameter("noise dimension must be >= 1");
  NoiseProcess p;
  p.kind_ = NoiseKind::kZero;
  p.dimension_ = dimension;
  p.declared_k_ = 0.0;
  return p;
}

double NoiseProcess::exact_mean_square() const {
  switch (kind_) {
    case NoiseKind::kRandomPhaseCosine: {
      double k = 0.0;
      for (double a : amplitudes_) k += 0.5 * a * a;
      return k;
    }
    case NoiseKind::kFilteredWhiteNoise:
      return static_cast<double>(dimension_) * intensity_ / (2.0 * tau_f_);
    case NoiseKind::kZero:
      return 0.0;
  }
  return 0.0;
}

NoiseProcess NoiseProcess::with_declared_mean_square(double k) const {
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw InvalidParameter("declared mean square must be nonnegative");
  }
  NoiseProcess copy = *this;
  copy.declared_k_ = k;
  return copy;
}

std::size_t grid_cells(double t0, double horizon, double h) {
  if (!(horizon > t0)) throw InvalidParameter("horizon must exceed t0");
  require_positive(h, "grid step");
  const double ratio = (horizon - t0) / h;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(nearest));
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index));
}

NoisePath NoiseProcess::sample_path(double t0, double horizon, double h_noise,
                                    std::uint64_t seed) const {
  const std::size_t cells = grid_cells(t0, horizon, h_noise);
  const std::size_t points = cells + 1;
  const std::size_t l = dimension_;
  std::vector<double> values(points * l, 0.0);
  std::mt19937_64 gen(seed);

  switch (kind_) {
    case NoiseKind::kZero:
      break;
    case NoiseKind::kRandomPhaseCosine: {
      std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
      std::vector<double> phase(l);
      for (auto& s : phase) s = phase_dist(gen);
      for (std::size_t k = 0; k < points; ++k) {
        const double t = t0 + static_cast<double>(k) * h_noise;
        for (std::size_t i = 0; i < l; ++i) {
          values[k * l + i] = -amplitudes_[i] * std::cos(omegas_[i] * t + phase[i]);
        }
      }
      break;
    }
    case NoiseKind::kFilteredWhiteNoise: {
      const double variance = intensity_ / (2.0 * tau_f_);
      const double decay = std::exp(-h_noise / tau_f_);
      const double innovation_sd = std::sqrt(variance * -std::expm1(-2.0 * h_noise / tau_f_));
      std::normal_distribution<double> normal(0.0, 1.0);
      const double stationary_sd = std::sqrt(variance);
      for (std::size_t i = 0; i < l; ++i) values[i] = stationary_sd * normal(gen);
      for (std::size_t k = 1; k < points; ++k) {
        for (std::size_t i = 0; i < l; ++i) {
          values[k * l + i] = decay * values[(k - 1) * l + i] + innovation_sd * normal(gen);
        }
      }
      break;
    }
  }
  return NoisePath(t0, h_noise, l, std::move(values), seed);
}

NoisePath::NoisePath(double t0, double h, std::size_t dimension, std::vector<double> values,
                     std::uint64_t seed)
    : t0_(t0), h_(h), dimension_(dimension), values_(std::move(values)), seed_(seed) {
  require_positive(h_, "noise grid step");
  if (dimension_ == 0 || values_.empty() || values_.size() % dimension_ != 0) {
    throw InvalidParameter("noise path values must be a non-empty multiple of the dimension");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidParameter("noise path values must be finite");
  }
}

std::size_t NoisePath::index_at(double t) const {
  const std::size_t last = size() - 1;
  if (!(t > t0_)) return 0;
  const double raw = std::floor((t - t0_) / h_);
  std::size_t k = raw >= static_cast<double>(last) ? last : static_cast<std::size_t>(raw);
  while (k < last && time(k + 1) <= t) ++k;
  while (k > 0 && time(k) > t) --k;
  return k;
}

std::vector<double> NoisePath::running_integral(int power) const {
  if (power != 1 && power != 2) throw InvalidParameter("running_integral power must be 1 or 2");
  const std::size_t n = size();
  std::vector<double> per_point(n);
  if (power == 1) {
    kernels::row_norms(values_, dimension_, per_point);
  } else {
    kernels::row_sq_norms(values_, dimension_, per_point);
  }
  std::vector<double> out(n, 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    acc += per_point[k - 1] * h_;
    out[k] = acc;
  }
  return out;
}

void NoisePath::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t i = 0; i < dimension_; ++i) os << ",xi_" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < size(); ++k) {
    os << format_double(time(k));
    for (double v : value(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

MomentReport estimate_mean_square(const NoiseProcess& process, std::size_t n_paths,
                                  double horizon, double h_noise, std::uint64_t seed,
                                  double t0) {
  if (n_paths < 2) throw InvalidParameter("estimate_mean_square needs n_paths >= 2");
  const std::size_t cells = grid_cells(t0, horizon, h_noise);
  const std::size_t l = process.dimension();
  std::vector<double> averages(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const NoisePath path = process.sample_path(t0, horizon, h_noise, derive_seed(seed, i));
    const double total = kernels::sum_squares(path.values().first(cells * l));
    averages[i] = total / static_cast<double>(cells);
  }
  const Summary s = summarize(averages);
  MomentReport r;
  r.estimate = s.mean;
  r.half_width = s.half_width;
  r.n_paths = n_paths;
  r.horizon = horizon;
  r.declared = process.declared_mean_square();
  r.pass = r.estimate - r.half_width <= r.declared;
  return r;
}

WllnReport check_wlln(const NoiseProcess& process, std::span<const double> t_grid,
                      double delta, std::size_t n_paths, double h_noise,
                      std::uint64_t seed, double t0) {
  require_positive(delta, "wlln delta");
  if (t_grid.empty()) throw InvalidParameter("wlln time grid is empty");
  if (n_paths == 0) throw InvalidParameter("wlln needs at least one path");
  for (double t : t_grid) {
    if (!(t > t0)) throw InvalidParameter("wlln times must exceed t0");
  }
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  const double exact = process.exact_mean_square();
  const std::size_t l = process.dimension();

  std::vector<std::size_t> violations(t_grid.size(), 0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const NoisePath path = process.sample_path(t0, t_max, h_noise, derive_seed(seed, i));
    const std::vector<double> integral = path.running_integral(2);
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      const double t = t_grid[j];
      const std::size_t m = path.index_at(t);
      const auto row = path.value(m);
      double sq = 0.0;
      for (std::size_t c = 0; c < l; ++c) sq += row[c] * row[c];
      const double value = integral[m] + (t - path.time(m)) * sq;
      const double average = value / (t - t0);
      if (std::abs(average - exact) >= delta) ++violations[j];
    }
  }
  WllnReport r;
  r.times.assign(t_grid.begin(), t_grid.end());
  r.delta = delta;
  r.exact_mean_square = exact;
  r.n_paths = n_paths;
  for (std::size_t v : violations) {
    r.violation_fraction.push_back(static_cast<double>(v) / static_cast<double>(n_paths));
  }
  return r;
}

std::vector<double> l1_ratio_series(const NoisePath& path, double k) {
  require_positive(k, "mean-square bound K");
  const std::vector<double> integral = path.running_integral(1);
  const double scale = 2.0 * std::sqrt(k);
  std::vector<double> ratio(integral.size(), 0.0);
  for (std::size_t j = 1; j < integral.size(); ++j) {
    ratio[j] = integral[j] / (scale * (path.time(j) - path.t0()));
  }
  return ratio;
}

double check_l1_bound(const NoisePath& path, double k, double t_min) {
  if (!(t_min > path.t0())) throw InvalidParameter("t_min must exceed the path start");
  const std::vector<double> ratio = l1_ratio_series(path, k);
  const double slack = 1e-9 * path.step();
  double worst = 0.0;
  for (std::size_t j = 1; j < ratio.size(); ++j) {
    if (path.time(j) >= t_min - slack) worst = std::max(worst, ratio[j]);
  }
  return worst;
}

}  // namespace rfts
