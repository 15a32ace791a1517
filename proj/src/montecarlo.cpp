#include "rfts/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "rfts/defaults.hpp"
#include "rfts/error.hpp"
#include "rfts/io.hpp"
#include "rfts/kernels.hpp"

namespace rfts {

void McConfig::validate() const {
  if (n_paths < 2) throw InvalidParameter("mc.n_paths must be at least 2");
  if (!(h_noise > 0.0) || !std::isfinite(h_noise)) {
    throw InvalidParameter("noise.h must be positive");
  }
  if (jobs < 1) throw InvalidParameter("jobs must be at least 1");
  integrator.validate(t0);
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (i < failed_index) {
            failed_index = i;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

Trajectory run_path(const SystemModel& model, const NoiseProcess& process,
                    std::span<const double> x0, const McConfig& cfg, std::uint64_t seed) {
  const NoisePath path = process.sample_path(cfg.t0, cfg.integrator.horizon, cfg.h_noise, seed);
  return integrate_path(model, path, x0, cfg.integrator);
}

void check_dimensions(const SystemModel& model, const NoiseProcess& process,
                      std::span<const double> x0) {
  if (x0.size() != model.state_dim()) throw InvalidParameter("x0 dimension does not match the model");
  if (process.dimension() != model.noise_dim()) {
    throw InvalidParameter("noise dimension does not match the model");
  }
}

double euclidean(std::span<const double> x) {
  double out = 0.0;
  kernels::row_norms(x, x.size(), {&out, 1});
  return out;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json SettlingStats::to_json() const {
  nlohmann::json j;
  j["n_paths"] = n_paths;
  j["n_settled"] = n_settled;
  j["n_censored"] = n_censored;
  j["n_blowup"] = n_blowup;
  j["settled_fraction"] = settled_fraction();
  j["mean"] = optional_json(mean);
  j["half_width"] = half_width;
  j["min"] = optional_json(min);
  j["max"] = optional_json(max);
  j["bound"] = optional_json(bound);
  j["bound_satisfied"] = bound_satisfied ? nlohmann::json(*bound_satisfied) : nlohmann::json(nullptr);
  return j;
}

void SettlingStats::write_csv(std::ostream& os) const {
  os << "path_index,seed,settled,settle_time\n";
  for (const auto& p : paths) {
    os << p.index << ',' << p.seed << ',' << (p.settled ? 1 : 0) << ',';
    if (p.settle_time) os << format_double(*p.settle_time);
    os << '\n';
  }
}

SettlingStats estimate_settling(const SystemModel& model, const NoiseProcess& process,
                                std::span<const double> x0, const McConfig& cfg,
                                const Certificate* cert) {
  cfg.validate();
  check_dimensions(model, process, x0);
  if (cert && cfg.n_paths < 100) {
    throw InvalidParameter("mc.n_paths must be at least 100 for a bound check");
  }

  SettlingStats stats;
  stats.n_paths = cfg.n_paths;
  stats.paths.resize(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.jobs, [&](std::size_t i, std::size_t) {
    PathOutcome& out = stats.paths[i];
    out.index = i;
    out.seed = derive_seed(cfg.master_seed, i);
    const Trajectory traj = run_path(model, process, x0, cfg, out.seed);
    out.settled = traj.settled;
    out.settle_time = traj.settle_time;
    out.blowup_time = traj.blowup_time;
  });

  // Accumulated relative to the first settle time.
  std::optional<double> shift;
  double sum = 0.0;
  for (const auto& p : stats.paths) {
    if (p.blowup_time) ++stats.n_blowup;
    if (!p.settled) continue;
    const double t = *p.settle_time;
    if (!shift) shift = t;
    ++stats.n_settled;
    sum += t - *shift;
    stats.min = stats.min ? std::min(*stats.min, t) : t;
    stats.max = stats.max ? std::max(*stats.max, t) : t;
  }
  stats.n_censored = stats.n_paths - stats.n_settled;
  if (stats.n_settled >= 2) {
    const double n = static_cast<double>(stats.n_settled);
    const double offset = sum / n;
    double ss = 0.0;
    for (const auto& p : stats.paths) {
      if (!p.settled) continue;
      const double d = (*p.settle_time - *shift) - offset;
      ss += d * d;
    }
    stats.mean = *shift + offset;
    stats.half_width = defaults::kConfidenceZ * std::sqrt(ss / (n - 1.0) / n);
  }
  if (cert) {
    stats.bound = settling_bound(*cert, cert->value(x0));
    stats.bound_satisfied = stats.mean && (*stats.mean - stats.half_width <= *stats.bound);
  }
  return stats;
}

double estimate_stability_probability(const SystemModel& model, const NoiseProcess& process,
                                      std::span<const double> x0, const PowerLaw& gamma_fn,
                                      const McConfig& cfg) {
  cfg.validate();
  check_dimensions(model, process, x0);
  const double level = gamma_fn(euclidean(x0));
  std::vector<char> inside(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, cfg.jobs, [&](std::size_t i, std::size_t) {
    const Trajectory traj = run_path(model, process, x0, cfg, derive_seed(cfg.master_seed, i));
    if (traj.blowup_time) return;
    std::vector<double> norms(traj.size());
    kernels::row_norms(traj.states, traj.dim, norms);
    inside[i] = *std::max_element(norms.begin(), norms.end()) <= level;
  });
  const auto hits = std::count(inside.begin(), inside.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(cfg.n_paths);
}

nlohmann::json CoverageReport::to_json() const {
  nlohmann::json j;
  j["n_paths"] = n_paths;
  j["overall"] = overall;
  j["overall_after_t1"] = overall_after_t1;
  j["extinction_time"] = extinction_time;
  j["min_coverage_after_extinction"] = min_coverage_after_extinction;
  j["epsilon_target"] = epsilon_target;
  j["min_coverage"] = coverage.empty() ? 1.0 : *std::min_element(coverage.begin(), coverage.end());
  j["pass"] = pass;
  return j;
}

CoverageReport envelope_coverage(const SystemModel& model, const NoiseProcess& process,
                                 std::span<const double> x0, const Certificate& cert,
                                 const McConfig& cfg, double epsilon_target) {
  cfg.validate();
  check_dimensions(model, process, x0);
  if (!(epsilon_target >= 0.0 && epsilon_target < 1.0)) {
    throw InvalidParameter("epsilon_target must be in [0, 1)");
  }
  const double h = cfg.integrator.h;
  const std::size_t steps = grid_cells(cfg.t0, cfg.integrator.horizon, h);
  const std::size_t grid = steps + 1;
  const double x0_norm = euclidean(x0);

  CoverageReport report;
  report.n_paths = cfg.n_paths;
  report.epsilon_target = epsilon_target;
  report.extinction_time = extinction_time(cert, x0_norm);
  report.times.resize(grid);
  report.envelope.resize(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    report.times[k] = cfg.t0 + static_cast<double>(k) * h;
    report.envelope[k] = decay_envelope(cert, x0_norm, static_cast<double>(k) * h);
  }

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.n_paths));
  std::vector<std::vector<std::int64_t>> hits(workers, std::vector<std::int64_t>(grid, 0));
  std::vector<char> inside_all(cfg.n_paths, 0);
  std::vector<char> inside_after_t1(cfg.n_paths, 0);
  const double k_bound = process.declared_mean_square();
  const std::size_t substeps =
      static_cast<std::size_t>(std::llround(cfg.h_noise / cfg.integrator.h));

  parallel_for(cfg.n_paths, cfg.jobs, [&](std::size_t i, std::size_t w) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, i);
    const NoisePath path = process.sample_path(cfg.t0, cfg.integrator.horizon, cfg.h_noise, seed);
    const Trajectory traj = integrate_path(model, path, x0, cfg.integrator);
    std::vector<double> norms(grid, std::numeric_limits<double>::infinity());
    kernels::row_norms(traj.states, traj.dim, std::span<double>(norms).first(traj.size()));
    std::vector<std::int64_t> mine(grid, 0);
    const std::size_t inside = kernels::count_le(norms, report.envelope, mine);
    inside_all[i] = inside == grid;

    std::size_t first = 0;
    if (k_bound > 0.0) {
      const std::vector<double> ratio = l1_ratio_series(path, k_bound);
      std::size_t last_above = 0;
      bool any_above = false;
      for (std::size_t k = 1; k < ratio.size(); ++k) {
        if (ratio[k] > 1.0) {
          last_above = k;
          any_above = true;
        }
      }
      if (any_above) first = (last_above + 1) * substeps;
    }
    bool after = true;
    for (std::size_t k = first; k < grid && after; ++k) after = mine[k] != 0;
    inside_after_t1[i] = after;
    for (std::size_t k = 0; k < grid; ++k) hits[w][k] += mine[k];
  });

  std::vector<std::int64_t> total(grid, 0);
  for (const auto& part : hits) {
    for (std::size_t k = 0; k < grid; ++k) total[k] += part[k];
  }
  const double n = static_cast<double>(cfg.n_paths);
  report.coverage.resize(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    report.coverage[k] = static_cast<double>(total[k]) / n;
    if (static_cast<double>(k) * h >= report.extinction_time) {
      report.min_coverage_after_extinction =
          std::min(report.min_coverage_after_extinction, report.coverage[k]);
    }
  }
  report.overall = static_cast<double>(std::count(inside_all.begin(), inside_all.end(), 1)) / n;
  report.overall_after_t1 =
      static_cast<double>(std::count(inside_after_t1.begin(), inside_after_t1.end(), 1)) / n;
  report.pass = report.overall >= 1.0 - epsilon_target;
  return report;
}

FigureSpec figure_spec(const std::string& name) {
  if (name == "fig1") return {"fig1", "example1", {1.0, 1.0}, 101, 10.0};
  if (name == "fig2") return {"fig2", "example2-closed", {3.0}, 202, 10.0};
  if (name == "fig3") return {"fig3", "example2-closed", {3.0}, 202, 10.0};
  throw InvalidParameter("unknown figure '" + name + "' (expected fig1, fig2 or fig3)");
}

std::filesystem::path reproduce_figure(const std::string& name, const std::filesystem::path& dir) {
  const FigureSpec spec = figure_spec(name);
  const SystemModel model = make_builtin_model(spec.model);
  const NoiseProcess process = spec.model == "example1"
                                   ? make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0})
                                   : make_filtered_white_noise(0.5, 1.0, 1);
  IntegratorConfig cfg;
  cfg.horizon = spec.horizon;
  const NoisePath path = process.sample_path(0.0, cfg.horizon, cfg.h, spec.seed);
  const Trajectory traj = integrate_path(model, path, spec.x0, cfg);

  std::ostringstream csv;
  if (name == "fig3") {
    csv << "t,u,xi\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double t = traj.time(k);
      csv << format_double(t) << ',' << format_double(paper_controller(traj.state(k)[0])) << ','
          << format_double(path.value_at(t)[0]) << '\n';
    }
  } else {
    traj.write_csv(csv);
  }
  nlohmann::json side = traj.sidecar();
  side["figure"] = name;
  side["model"] = spec.model;
  side["noise"] = std::string(noise_kind_name(process.kind()));
  side["x0"] = spec.x0;
  side["h"] = cfg.h;
  side["T"] = cfg.horizon;

  const std::filesystem::path out = dir / (name + ".csv");
  write_text_file(out, csv.str());
  write_text_file(dir / (name + ".json"), side.dump(2) + "\n");
  return out;
}

}  // namespace rfts
