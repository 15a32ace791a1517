#include "rfts/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "rfts/error.hpp"
#include "rfts/io.hpp"

namespace rfts {

namespace {

std::string describe(std::span<const double> x, double t) {
  std::ostringstream os;
  os << "x = (";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << format_double(x[i]);
  os << "), t = " << format_double(t);
  return os.str();
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::size_t substeps_per_cell(const NoisePath& path, double h) {
  const double ratio = path.step() / h;
  const double m = std::round(ratio);
  if (m < 1.0 || std::abs(ratio - m) > 1e-9 * m) {
    throw InvalidParameter("integrator step h must divide the noise grid step");
  }
  return static_cast<std::size_t>(m);
}

// F(x, t) = f(x, t) + g(x, t) xi with scratch storage. Returns false when an
// evaluator overflowed to infinity; NaN output is an evaluator error.
class FrozenField {
 public:
  explicit FrozenField(const SystemModel& model)
      : model_(model), n_(model.state_dim()), l_(model.noise_dim()), g_(n_ * l_) {}

  bool operator()(std::span<const double> x, double t, std::span<const double> xi,
                  std::span<double> out) {
    model_.drift(x, t, out);
    model_.gain(x, t, g_);
    const auto has_nan = [](std::span<const double> v) {
      return std::any_of(v.begin(), v.end(), [](double a) { return std::isnan(a); });
    };
    if (has_nan(out) || has_nan(g_)) {
      throw EvaluatorError("evaluator returned NaN at " + describe(x, t));
    }
    if (!all_finite(out) || !all_finite(g_)) return false;
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = out[i];
      for (std::size_t j = 0; j < l_; ++j) acc += g_[i * l_ + j] * xi[j];
      out[i] = acc;
    }
    return all_finite(out);
  }

 private:
  const SystemModel& model_;
  std::size_t n_;
  std::size_t l_;
  std::vector<double> g_;
};

}  // namespace

double IntegratorConfig::effective_eps_absorb() const {
  return std::max(eps_absorb, std::pow(0.5 * h, 1.5));
}

void IntegratorConfig::validate(double t0) const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("integrator.h must be positive");
  if (!(horizon > t0)) throw InvalidParameter("integrator.T must exceed t0");
  if (!(eps_settle > 0.0)) throw InvalidParameter("integrator.eps_settle must be positive");
  if (!(eps_absorb > 0.0)) throw InvalidParameter("integrator.eps_absorb must be positive");
  if (absorb_at_origin && !(effective_eps_absorb() < eps_settle)) {
    throw InvalidParameter("integrator.eps_absorb: max(eps_absorb, (h/2)^1.5) must be below eps_settle");
  }
}

double Trajectory::norm(std::size_t k) const { return norm2(state(k)); }

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t i = 0; i < dim; ++i) os << ",x_" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < size(); ++k) {
    os << format_double(time(k));
    for (double v : state(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

nlohmann::json Trajectory::sidecar() const {
  nlohmann::json j;
  j["settled"] = settled;
  j["settle_time"] = settle_time ? nlohmann::json(*settle_time) : nlohmann::json(nullptr);
  j["seed"] = seed;
  j["blowup"] = blowup_time.has_value();
  j["blowup_time"] = blowup_time ? nlohmann::json(*blowup_time) : nlohmann::json(nullptr);
  return j;
}

Trajectory integrate_path(const SystemModel& model, const NoisePath& path,
                          std::span<const double> x0, const IntegratorConfig& cfg) {
  const std::size_t n = model.state_dim();
  if (x0.size() != n) throw InvalidParameter("x0 dimension does not match the model");
  if (path.dimension() != model.noise_dim()) {
    throw InvalidParameter("noise path dimension does not match the model");
  }
  if (!all_finite(x0)) throw InvalidParameter("x0 must be finite");
  cfg.validate(path.t0());
  const std::size_t m = substeps_per_cell(path, cfg.h);
  const std::size_t steps = grid_cells(path.t0(), cfg.horizon, cfg.h);
  if ((steps - 1) / m >= path.size()) {
    throw InvalidParameter("noise path does not cover the integration horizon");
  }

  Trajectory traj;
  traj.t0 = path.t0();
  traj.h = cfg.h;
  traj.dim = n;
  traj.seed = path.seed();
  traj.states.reserve((steps + 1) * n);

  const double eps_absorb = cfg.effective_eps_absorb();
  const double h = cfg.h;
  std::vector<double> x(x0.begin(), x0.end());
  bool absorbed = false;
  if (cfg.absorb_at_origin && norm2(x) <= eps_absorb) {
    traj.absorb_jump = x;
    traj.absorbed_index = 0;
    std::fill(x.begin(), x.end(), 0.0);
    absorbed = true;
  }
  traj.states.insert(traj.states.end(), x.begin(), x.end());

  FrozenField field(model);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
  for (std::size_t step = 0; step < steps; ++step) {
    if (absorbed) {
      traj.states.insert(traj.states.end(), n, 0.0);
      continue;
    }
    const double t = traj.time(step);
    const auto xi = path.value(step / m);
    bool finite = field(x, t, xi, k1);
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * h * k1[i];
      finite = all_finite(stage) && field(stage, t + 0.5 * h, xi, k2);
    }
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * h * k2[i];
      finite = all_finite(stage) && field(stage, t + 0.5 * h, xi, k3);
    }
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + h * k3[i];
      finite = all_finite(stage) && field(stage, t + h, xi, k4);
    }
    if (!finite) {
      traj.blowup_time = traj.time(step + 1);
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const bool escaped = std::any_of(x.begin(), x.end(), [](double v) {
      return !std::isfinite(v) || std::abs(v) > defaults::kBlowupThreshold;
    });
    if (escaped) {
      traj.blowup_time = traj.time(step + 1);
      break;
    }
    if (cfg.absorb_at_origin && norm2(x) <= eps_absorb) {
      traj.absorb_jump = x;
      traj.absorbed_index = step + 1;
      std::fill(x.begin(), x.end(), 0.0);
      absorbed = true;
    }
    traj.states.insert(traj.states.end(), x.begin(), x.end());
  }

  if (!traj.blowup_time) {
    traj.settle_time = detect_settling(traj, cfg.eps_settle);
    traj.settled = traj.settle_time.has_value();
  }
  return traj;
}

std::optional<double> detect_settling(const Trajectory& traj, double eps_settle) {
  const std::size_t count = traj.size();
  if (count == 0) return std::nullopt;
  std::size_t k = count;
  while (k > 0 && traj.norm(k - 1) <= eps_settle) --k;
  if (k == count) return std::nullopt;
  return traj.time(k);
}

IntegralFormReport check_integral_form(const Trajectory& traj, const SystemModel& model,
                                       const NoisePath& path, double tol) {
  const std::size_t n = traj.dim;
  if (n != model.state_dim()) throw InvalidParameter("trajectory does not match the model");
  const std::size_t m = substeps_per_cell(path, traj.h);
  const double h = traj.h;

  double max_norm = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) max_norm = std::max(max_norm, traj.norm(k));

  IntegralFormReport out;
  out.scale = tol * (1.0 + max_norm);
  out.residuals.assign(traj.size(), 0.0);

  FrozenField field(model);
  std::vector<double> fa(n), fb(n), fm(n), mid(n), end(n), acc(n, 0.0);
  const auto x0 = traj.state(0);
  out.report.record(out.scale, {x0.begin(), x0.end()}, traj.time(0));
  for (std::size_t step = 0; step + 1 < traj.size(); ++step) {
    const double t = traj.time(step);
    const auto xa = traj.state(step);
    const bool jump_here = traj.absorbed_index && *traj.absorbed_index == step + 1;
    if (jump_here) {
      std::copy(traj.absorb_jump.begin(), traj.absorb_jump.end(), end.begin());
    } else {
      const auto xb = traj.state(step + 1);
      std::copy(xb.begin(), xb.end(), end.begin());
    }
    const auto xi = path.value(step / m);
    field(xa, t, xi, fa);
    field(end, t + h, xi, fb);
    for (std::size_t i = 0; i < n; ++i) {
      mid[i] = 0.5 * (xa[i] + end[i]) + (h / 8.0) * (fa[i] - fb[i]);
    }
    field(mid, t + 0.5 * h, xi, fm);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += (h / 6.0) * (fa[i] + 4.0 * fm[i] + fb[i]);
      if (jump_here) acc[i] -= traj.absorb_jump[i];
    }
    const auto xk = traj.state(step + 1);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xk[i] - x0[i] - acc[i];
      r += d * d;
    }
    r = std::sqrt(r);
    out.residuals[step + 1] = r;
    out.max_residual = std::max(out.max_residual, r);
    out.report.record(out.scale - r, {xk.begin(), xk.end()}, traj.time(step + 1));
  }
  return out;
}

double uniqueness_probe(const SystemModel& model, const NoisePath& path,
                        std::span<const double> x0, double delta0,
                        const IntegratorConfig& cfg) {
  if (!(delta0 >= 0.0)) throw InvalidParameter("delta0 must be nonnegative");
  std::vector<double> shifted(x0.begin(), x0.end());
  if (!shifted.empty()) shifted[0] += delta0;
  const Trajectory a = integrate_path(model, path, x0, cfg);
  const Trajectory b = integrate_path(model, path, shifted, cfg);
  const std::size_t count = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto sa = a.state(k);
    const auto sb = b.state(k);
    double d = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) d += (sa[i] - sb[i]) * (sa[i] - sb[i]);
    worst = std::max(worst, std::sqrt(d));
  }
  return worst;
}

}  // namespace rfts
