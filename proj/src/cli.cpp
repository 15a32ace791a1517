#include "rfts/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfts/certify.hpp"
#include "rfts/config.hpp"
#include "rfts/error.hpp"
#include "rfts/integrate.hpp"
#include "rfts/io.hpp"
#include "rfts/montecarlo.hpp"
#include "rfts/noise.hpp"

namespace rfts {

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t jobs = 1;
  std::string figure;
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

ExperimentConfig load(const Options& opt) {
  if (opt.config_path.empty()) throw ConfigError("--config: required for this command");
  ExperimentConfig cfg = load_config(opt.config_path);
  if (opt.seed_given) cfg.master_seed = opt.seed;
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  return cfg;
}

int cmd_noise_check(const Options& opt, std::ostream& out) {
  const ExperimentConfig cfg = load(opt);
  const NoiseProcess process = cfg.build_noise();
  const NoiseCheckParams& p = cfg.noise_check;
  const double h = cfg.noise_step();

  const MomentReport moments =
      estimate_mean_square(process, p.n_paths, p.horizon, h, cfg.master_seed, cfg.t0);

  std::vector<double> times = p.wlln_times;
  if (times.empty()) times.push_back(p.horizon);
  const WllnReport wlln = check_wlln(process, times, p.delta, p.n_paths, h,
                                     derive_seed(cfg.master_seed, 1), cfg.t0);
  const double worst_fraction = wlln.violation_fraction.back();
  const bool wlln_pass = worst_fraction <= p.max_violation_fraction;

  const double k = process.declared_mean_square();
  double worst_ratio = 0.0;
  bool l1_pass = true;
  std::size_t l1_failures = 0;
  if (k > 0.0) {
    for (std::size_t i = 0; i < p.n_paths; ++i) {
      const NoisePath path =
          process.sample_path(cfg.t0, p.horizon, h, derive_seed(cfg.master_seed ^ 0x4c31, i));
      const double r = check_l1_bound(path, k, cfg.t0 + p.l1_t_min);
      worst_ratio = std::max(worst_ratio, r);
      if (r > 1.0) ++l1_failures;
    }
    l1_pass = l1_failures == 0;
  } else {
    l1_pass = process.exact_mean_square() == 0.0;
  }

  const bool pass = moments.pass && wlln_pass && l1_pass;
  json j;
  j["noise"] = std::string(noise_kind_name(process.kind()));
  j["declared_K"] = k;
  j["exact_mean_square"] = process.exact_mean_square();
  j["moments"] = {{"estimate", moments.estimate}, {"half_width", moments.half_width},
                  {"n_paths", moments.n_paths},   {"horizon", moments.horizon},
                  {"declared", moments.declared}, {"pass", moments.pass}};
  j["wlln"] = {{"times", wlln.times},
               {"violation_fraction", wlln.violation_fraction},
               {"delta", wlln.delta},
               {"max_violation_fraction", p.max_violation_fraction},
               {"pass", wlln_pass}};
  j["l1"] = {{"t_min", cfg.t0 + p.l1_t_min},
             {"worst_ratio", worst_ratio},
             {"n_failures", l1_failures},
             {"pass", l1_pass}};
  j["pass"] = pass;
  write_text_file(std::filesystem::path(cfg.output_dir) / "noise_check.json", json_text(j));
  out << "noise-check: K_declared=" << format_double(k)
      << " mean_square=" << format_double(moments.estimate) << " +- "
      << format_double(moments.half_width) << " wlln_fraction=" << format_double(worst_fraction)
      << " l1_ratio=" << format_double(worst_ratio) << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? kOk : kCheckFailed;
}

int cmd_certify(const Options& opt, std::ostream& out) {
  const ExperimentConfig cfg = load(opt);
  const SystemModel model = cfg.build_model();
  const Certificate cert = cfg.build_certificate();
  const CertifyParams& p = cfg.certify;

  const ConditionReport sandwich =
      verify_sandwich(cert, p.box_radius, p.n_samples, p.tolerance, p.seed);
  const DriftReport drift =
      verify_drift(cert, model, p.box_radius, p.n_samples, p.t_grid, p.tolerance, p.seed);
  const ConditionReport origin = check_origin(model, p.t_grid, defaults::kIdentityTol);
  const FitResult fit = fit_constants(model, cert.lyapunov(), cert.gamma(), p.box_radius,
                                      p.n_samples, p.t_grid, p.seed);
  const double v0 = cert.value(cfg.x0);
  const double bound = settling_bound(cert, v0);
  const bool pass = sandwich.pass && drift.pass && origin.pass;

  json j;
  j["certificate"] = to_json(cert);
  j["constant_condition"] = {{"decay_rate", cert.decay_rate()}, {"pass", true}};
  j["sandwich"] = to_json(sandwich);
  j["drift"] = to_json(drift.drift);
  j["gain"] = to_json(drift.gain);
  j["origin"] = to_json(origin);
  j["fit"] = {{"c1", fit.c1}, {"c2", fit.c2}, {"certifiable", fit.certifiable},
              {"n_samples", fit.n_samples}};
  j["V0"] = v0;
  j["settling_bound"] = bound;
  j["pass"] = pass;
  write_text_file(std::filesystem::path(cfg.output_dir) / "certify.json", json_text(j));
  out << "certify: settling_bound=" << format_double(bound)
      << " sandwich=" << (sandwich.pass ? "pass" : "fail")
      << " drift=" << (drift.drift.pass ? "pass" : "fail")
      << " gain=" << (drift.gain.pass ? "pass" : "fail") << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? kOk : kCheckFailed;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const ExperimentConfig cfg = load(opt);
  const SystemModel model = cfg.build_model();
  const NoiseProcess process = cfg.build_noise();
  const NoisePath path =
      process.sample_path(cfg.t0, cfg.integrator.horizon, cfg.noise_step(), cfg.master_seed);
  const Trajectory traj = integrate_path(model, path, cfg.x0, cfg.integrator);

  std::ostringstream csv;
  traj.write_csv(csv);
  const std::filesystem::path dir(cfg.output_dir);
  write_text_file(dir / "trajectory.csv", csv.str());
  write_text_file(dir / "trajectory.json", json_text(traj.sidecar()));
  if (traj.blowup_time) {
    out << "simulate: blow-up at t=" << format_double(*traj.blowup_time) << '\n';
    return kCheckFailed;
  }
  out << "simulate: settled=" << (traj.settled ? "true" : "false");
  if (traj.settle_time) out << " settle_time=" << format_double(*traj.settle_time);
  out << '\n';
  return kOk;
}

int cmd_settle(const Options& opt, std::ostream& out) {
  const ExperimentConfig cfg = load(opt);
  const SystemModel model = cfg.build_model();
  const NoiseProcess process = cfg.build_noise();
  std::optional<Certificate> cert;
  if (cfg.certificate) cert.emplace(cfg.build_certificate());
  const McConfig mc = cfg.mc(opt.jobs);
  if (cert && mc.n_paths < 100) throw ConfigError("mc.n_paths: at least 100 for a bound check");

  const SettlingStats stats = estimate_settling(model, process, cfg.x0, mc, cert ? &*cert : nullptr);
  const bool fraction_ok = stats.settled_fraction() >= cfg.settled_threshold;
  const bool pass = fraction_ok && stats.bound_satisfied.value_or(true);

  json j = stats.to_json();
  j["settled_threshold"] = cfg.settled_threshold;
  j["master_seed"] = cfg.master_seed;
  j["pass"] = pass;
  std::ostringstream csv;
  stats.write_csv(csv);
  const std::filesystem::path dir(cfg.output_dir);
  write_text_file(dir / "settle.json", json_text(j));
  write_text_file(dir / "settle_times.csv", csv.str());
  out << "settle: settled_fraction=" << format_double(stats.settled_fraction());
  if (stats.mean) {
    out << " mean=" << format_double(*stats.mean) << " +- " << format_double(stats.half_width);
  }
  if (stats.bound) out << " bound=" << format_double(*stats.bound);
  out << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? kOk : kCheckFailed;
}

int cmd_reproduce(const Options& opt, std::ostream& out) {
  std::string dir = opt.out_dir;
  if (dir.empty() && !opt.config_path.empty()) dir = load(opt).output_dir;
  if (dir.empty()) dir = "out";
  try {
    (void)figure_spec(opt.figure);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  const auto path = reproduce_figure(opt.figure, dir);
  out << "reproduce: wrote " << path.string() << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-time stability toolkit for random nonlinear systems"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "Experiment configuration (JSON)");
  app.add_option("--out", opt.out_dir, "Output directory");
  auto* seed = app.add_option("--seed", opt.seed, "Master seed override");
  app.add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* noise = app.add_subcommand("noise-check", "Validate the noise block");
  auto* certify = app.add_subcommand("certify", "Verify a Lyapunov certificate");
  auto* simulate = app.add_subcommand("simulate", "Integrate one sample path");
  auto* settle = app.add_subcommand("settle", "Monte Carlo settling-time study");
  auto* reproduce = app.add_subcommand("reproduce", "Write figure data");
  reproduce->add_option("figure", opt.figure, "fig1, fig2 or fig3")->required();
  for (auto* sub : {noise, certify, simulate, settle, reproduce}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  opt.seed_given = seed->count() > 0;

  try {
    if (*noise) return cmd_noise_check(opt, out);
    if (*certify) return cmd_certify(opt, out);
    if (*simulate) return cmd_simulate(opt, out);
    if (*settle) return cmd_settle(opt, out);
    return cmd_reproduce(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConstantConditionError& e) {
    err << "certificate rejected: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const InvalidParameter& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace rfts
