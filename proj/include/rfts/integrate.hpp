#pragma once

// Pathwise integration of x' = f(x,t) + g(x,t) xi(t) for one realized noise
// path, and settling-time detection on the resulting grid.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "rfts/defaults.hpp"
#include "rfts/noise.hpp"
#include "rfts/report.hpp"
#include "rfts/systems.hpp"

namespace rfts {

struct IntegratorConfig {
  double h = defaults::kStep;
  double horizon = 10.0;  // absolute end time T
  double eps_settle = defaults::kEpsSettle;
  double eps_absorb = defaults::kEpsAbsorb;
  bool absorb_at_origin = true;

  // Explicit RK4 chatters around cube-root cusps at amplitude ~ (h/2)^{3/2};
  // the absorption radius is never allowed below that floor.
  double effective_eps_absorb() const;

  // Throws InvalidParameter naming the offending field.
  void validate(double t0) const;
};

struct Trajectory {
  double t0 = 0.0;
  double h = 0.0;
  std::size_t dim = 0;
  std::vector<double> states;  // row-major, one row per grid point
  bool settled = false;
  std::optional<double> settle_time;
  std::uint64_t seed = 0;
  // First grid time at which the state left the finite range, if any.
  // states then stop at the last finite grid point.
  std::optional<double> blowup_time;
  // Grid index where the state was clamped to the origin and the state the
  // RK4 step had produced there.
  std::optional<std::size_t> absorbed_index;
  std::vector<double> absorb_jump;

  std::size_t size() const { return dim == 0 ? 0 : states.size() / dim; }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * h; }
  double end_time() const { return time(size() - 1); }
  std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
  double norm(std::size_t k) const;

  void write_csv(std::ostream& os) const;
  nlohmann::json sidecar() const;
};

// Classical RK4 on the frozen vector field f + g xi. All four stages of the
// step [t_n, t_n + h] use the zero-order-hold noise value of the cell that
// contains t_n. cfg.h must divide the path's grid step.
Trajectory integrate_path(const SystemModel& model, const NoisePath& path,
                          std::span<const double> x0, const IntegratorConfig& cfg);

// Earliest grid time after which |x| <= eps_settle up to the end of the grid.
std::optional<double> detect_settling(const Trajectory& traj, double eps_settle);

struct IntegralFormReport {
  ConditionReport report{"integral_form", 0.0};
  double max_residual = 0.0;
  double scale = 0.0;  // tol * (1 + max |x|)
  std::vector<double> residuals;  // per grid point
};

// Rebuilds x(t0) + int f ds + int g xi ds from the stored states (per-step
// Simpson, with the midpoint state from cubic Hermite interpolation) and
// compares it with x(t) at every grid point.
IntegralFormReport check_integral_form(const Trajectory& traj, const SystemModel& model,
                                       const NoisePath& path, double tol);

// Largest gap between the paths from x0 and x0 + delta0 e1 on the same noise.
double uniqueness_probe(const SystemModel& model, const NoisePath& path,
                        std::span<const double> x0, double delta0,
                        const IntegratorConfig& cfg);

}  // namespace rfts
