#pragma once

// Batches of independent sample paths: settling-time statistics, stability
// in probability, envelope coverage and the figure data sets.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfts/certify.hpp"
#include "rfts/integrate.hpp"
#include "rfts/noise.hpp"
#include "rfts/systems.hpp"

namespace rfts {

struct McConfig {
  std::size_t n_paths = 500;
  std::uint64_t master_seed = 1;
  IntegratorConfig integrator;
  double h_noise = defaults::kStep;
  double t0 = 0.0;
  // Worker threads. Results never depend on this value.
  std::size_t jobs = 1;

  void validate() const;
};

struct PathOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool settled = false;
  std::optional<double> settle_time;
  std::optional<double> blowup_time;
};

struct SettlingStats {
  std::size_t n_paths = 0;
  std::size_t n_settled = 0;
  std::size_t n_censored = 0;  // includes blow-ups
  std::size_t n_blowup = 0;
  std::optional<double> mean;  // over settled paths, when n_settled >= 2
  double half_width = 0.0;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> bound;
  std::optional<bool> bound_satisfied;  // mean - half_width <= bound
  std::vector<PathOutcome> paths;

  double settled_fraction() const {
    return n_paths == 0 ? 0.0 : static_cast<double>(n_settled) / static_cast<double>(n_paths);
  }

  nlohmann::json to_json() const;
  void write_csv(std::ostream& os) const;  // path_index,seed,settled,settle_time
};

// Runs fn(i, worker) for i in [0, count) on min(jobs, count) threads, with
// worker in [0, jobs). fn may write only to storage owned by index i or by
// its worker slot.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t, std::size_t)>& fn);

SettlingStats estimate_settling(const SystemModel& model, const NoiseProcess& process,
                                std::span<const double> x0, const McConfig& cfg,
                                const Certificate* cert = nullptr);

// Fraction of paths with max_t |x(t)| <= gamma_fn(|x0|).
double estimate_stability_probability(const SystemModel& model, const NoiseProcess& process,
                                      std::span<const double> x0, const PowerLaw& gamma_fn,
                                      const McConfig& cfg);

struct CoverageReport {
  std::vector<double> times;
  std::vector<double> coverage;  // per grid time
  std::vector<double> envelope;
  double overall = 0.0;             // inside at every grid time
  double overall_after_t1 = 0.0;    // inside at every grid time from the path's own T1
  double extinction_time = 0.0;
  double min_coverage_after_extinction = 1.0;
  double epsilon_target = 0.0;
  std::size_t n_paths = 0;
  bool pass = false;  // overall >= 1 - epsilon_target

  nlohmann::json to_json() const;
};

// T1 for one path is the first grid time from which the running L1 ratio of
// the noise stays <= 1.
CoverageReport envelope_coverage(const SystemModel& model, const NoiseProcess& process,
                                 std::span<const double> x0, const Certificate& cert,
                                 const McConfig& cfg, double epsilon_target);

struct FigureSpec {
  std::string name;
  std::string model;
  std::vector<double> x0;
  std::uint64_t seed = 0;
  double horizon = 10.0;
};

// fig1, fig2 or fig3. Throws InvalidParameter on other names.
FigureSpec figure_spec(const std::string& name);

// Writes <name>.csv (and <name>.json) into dir and returns the CSV path.
std::filesystem::path reproduce_figure(const std::string& name, const std::filesystem::path& dir);

}  // namespace rfts
