#include "rfts/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rfts/error.hpp"

namespace rfts {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError((where.empty() ? "" : where + ".") + key + ": unknown field");
    }
  }
}

std::string field(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_number(const json& j, const std::string& where, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(field(where, key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field(where, key) + ": must be finite");
  return d;
}

void read_number(const json& j, const std::string& where, const std::string& key, double& out) {
  if (j.contains(key)) out = get_number(j, where, key);
}

void read_positive(const json& j, const std::string& where, const std::string& key, double& out) {
  read_number(j, where, key, out);
  if (!(out > 0.0)) throw ConfigError(field(where, key) + ": must be positive");
}

std::uint64_t get_count(const json& j, const std::string& where, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(field(where, key) + ": expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> get_vector(const json& j, const std::string& where, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(field(where, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw ConfigError(field(where, key) + ": expected an array of finite numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

template <typename F>
void as_config_error(const std::string& where, F&& fn) {
  try {
    fn();
  } catch (const ConstantConditionError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void parse_noise(const json& j, NoiseConfig& n) {
  const std::string w = "noise";
  require_object(j, w);
  reject_unknown(j, w, {"kind", "amplitudes", "omegas", "A", "tau_f", "dimension", "declared_K", "h"});
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("noise.kind: expected one of cosine, filtered, zero");
  }
  n.kind = j.at("kind").get<std::string>();
  if (n.kind != "cosine" && n.kind != "filtered" && n.kind != "zero") {
    throw ConfigError("noise.kind: expected one of cosine, filtered, zero");
  }
  if (j.contains("amplitudes")) n.amplitudes = get_vector(j, w, "amplitudes");
  if (j.contains("omegas")) n.omegas = get_vector(j, w, "omegas");
  read_positive(j, w, "A", n.intensity);
  read_positive(j, w, "tau_f", n.tau_f);
  if (j.contains("dimension")) {
    n.dimension = get_count(j, w, "dimension");
    if (n.dimension == 0) throw ConfigError("noise.dimension: must be positive");
  }
  if (j.contains("declared_K")) {
    n.declared_k = get_number(j, w, "declared_K");
    if (*n.declared_k < 0.0) throw ConfigError("noise.declared_K: must be nonnegative");
  }
  if (j.contains("h")) {
    double h = 0.0;
    read_positive(j, w, "h", h);
    n.h = h;
  }
  if (n.kind == "cosine") {
    if (n.amplitudes.empty()) throw ConfigError("noise.amplitudes: required for cosine noise");
    if (n.omegas.empty()) n.omegas.assign(n.amplitudes.size(), 1.0);
  }
}

void parse_integrator(const json& j, IntegratorConfig& c) {
  const std::string w = "integrator";
  require_object(j, w);
  reject_unknown(j, w, {"h", "T", "eps_settle", "eps_absorb", "absorb_at_origin"});
  read_positive(j, w, "h", c.h);
  read_number(j, w, "T", c.horizon);
  read_positive(j, w, "eps_settle", c.eps_settle);
  read_positive(j, w, "eps_absorb", c.eps_absorb);
  if (j.contains("absorb_at_origin")) {
    if (!j.at("absorb_at_origin").is_boolean()) {
      throw ConfigError("integrator.absorb_at_origin: expected a boolean");
    }
    c.absorb_at_origin = j.at("absorb_at_origin").get<bool>();
  }
}

void parse_certify(const json& j, CertifyParams& p) {
  const std::string w = "certify";
  require_object(j, w);
  reject_unknown(j, w, {"box_radius", "n_samples", "tol", "t_grid", "seed"});
  read_positive(j, w, "box_radius", p.box_radius);
  if (j.contains("n_samples")) {
    p.n_samples = get_count(j, w, "n_samples");
    if (p.n_samples == 0) throw ConfigError("certify.n_samples: must be positive");
  }
  read_positive(j, w, "tol", p.tolerance);
  if (j.contains("t_grid")) {
    p.t_grid = get_vector(j, w, "t_grid");
    if (p.t_grid.empty()) throw ConfigError("certify.t_grid: must not be empty");
  }
  if (j.contains("seed")) p.seed = get_count(j, w, "seed");
}

void parse_noise_check(const json& j, NoiseCheckParams& p, double t0) {
  const std::string w = "noise_check";
  require_object(j, w);
  reject_unknown(j, w, {"n_paths", "horizon", "wlln_times", "delta", "max_violation_fraction",
                        "l1_t_min"});
  if (j.contains("n_paths")) {
    p.n_paths = get_count(j, w, "n_paths");
    if (p.n_paths < 2) throw ConfigError("noise_check.n_paths: must be at least 2");
  }
  read_positive(j, w, "horizon", p.horizon);
  if (j.contains("wlln_times")) p.wlln_times = get_vector(j, w, "wlln_times");
  read_positive(j, w, "delta", p.delta);
  read_number(j, w, "max_violation_fraction", p.max_violation_fraction);
  if (!(p.max_violation_fraction >= 0.0 && p.max_violation_fraction <= 1.0)) {
    throw ConfigError("noise_check.max_violation_fraction: must be in [0, 1]");
  }
  read_positive(j, w, "l1_t_min", p.l1_t_min);
  if (!(p.horizon > t0)) throw ConfigError("noise_check.horizon: must exceed t0");
  for (double t : p.wlln_times) {
    if (!(t > t0) || t > p.horizon) {
      throw ConfigError("noise_check.wlln_times: each time must lie in (t0, horizon]");
    }
  }
}

void parse_mc(const json& j, ExperimentConfig& c) {
  const std::string w = "mc";
  require_object(j, w);
  reject_unknown(j, w, {"n_paths", "master_seed", "settled_threshold"});
  if (j.contains("n_paths")) {
    c.n_paths = get_count(j, w, "n_paths");
    if (c.n_paths < 2) throw ConfigError("mc.n_paths: must be at least 2");
  }
  if (j.contains("master_seed")) c.master_seed = get_count(j, w, "master_seed");
  read_number(j, w, "settled_threshold", c.settled_threshold);
  if (!(c.settled_threshold >= 0.0 && c.settled_threshold <= 1.0)) {
    throw ConfigError("mc.settled_threshold: must be in [0, 1]");
  }
}

// Certificate block with defaults filled in, ready for certificate_from_json.
json normalized_certificate(const json& block, double default_k, const std::string& default_v) {
  const std::string w = "certificate";
  require_object(block, w);
  if (block.empty()) throw ConfigError("certificate: block is empty");
  reject_unknown(block, w, {"gamma", "c1", "c2", "K", "alpha1", "alpha2", "V"});
  json out;
  for (const char* key : {"gamma", "c1", "c2"}) {
    if (!block.contains(key)) throw ConfigError(field(w, key) + ": required");
    out[key] = get_number(block, w, key);
  }
  out["K"] = block.contains("K") ? get_number(block, w, "K") : default_k;
  for (const char* key : {"alpha1", "alpha2"}) {
    json p = {{"a", 0.5}, {"b", 2.0}};
    if (block.contains(key)) {
      const json& given = block.at(key);
      require_object(given, field(w, key));
      reject_unknown(given, field(w, key), {"a", "b"});
      if (given.contains("a")) p["a"] = get_number(given, field(w, key), "a");
      if (given.contains("b")) p["b"] = get_number(given, field(w, key), "b");
    }
    out[key] = p;
  }
  if (block.contains("V")) {
    if (!block.at("V").is_string()) throw ConfigError("certificate.V: expected a name");
    out["V"] = block.at("V").get<std::string>();
  } else {
    out["V"] = default_v;
  }
  return out;
}

std::string default_lyapunov(const std::string& model) {
  return model.rfind("example2", 0) == 0 ? "half-arctan-squared" : "half-norm-squared";
}

}  // namespace

SystemModel ExperimentConfig::build_model() const { return make_builtin_model(model); }

NoiseProcess ExperimentConfig::build_noise() const {
  const std::size_t l = noise.dimension;
  NoiseProcess p = make_zero_noise(1);
  if (noise.kind == "cosine") {
    p = make_random_phase_cosine(noise.amplitudes, noise.omegas);
  } else if (noise.kind == "filtered") {
    p = make_filtered_white_noise(noise.intensity, noise.tau_f, l == 0 ? 1 : l);
  } else {
    p = make_zero_noise(l == 0 ? 1 : l);
  }
  if (noise.declared_k) p = p.with_declared_mean_square(*noise.declared_k);
  return p;
}

Certificate ExperimentConfig::build_certificate() const {
  if (!certificate) throw ConfigError("certificate: block is missing");
  const json block = normalized_certificate(*certificate, build_noise().declared_mean_square(),
                                            default_lyapunov(model));
  std::optional<Certificate> cert;
  as_config_error("certificate", [&] { cert.emplace(certificate_from_json(block, x0.size())); });
  return *cert;
}

McConfig ExperimentConfig::mc(std::size_t jobs) const {
  McConfig c;
  c.n_paths = n_paths;
  c.master_seed = master_seed;
  c.integrator = integrator;
  c.h_noise = noise_step();
  c.t0 = t0;
  c.jobs = jobs;
  return c;
}

ExperimentConfig parse_config(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "", {"model", "x0", "t0", "noise", "integrator", "certificate", "certify",
                         "noise_check", "mc", "output"});
  ExperimentConfig c;
  if (!j.contains("model") || !j.at("model").is_string()) {
    throw ConfigError("model: expected a built-in model name");
  }
  c.model = j.at("model").get<std::string>();
  std::optional<SystemModel> model;
  as_config_error("model", [&] { model.emplace(c.build_model()); });

  if (j.contains("x0")) {
    c.x0 = get_vector(j, "", "x0");
  } else {
    c.x0.assign(model->state_dim(), 0.0);
  }
  if (c.x0.size() != model->state_dim()) {
    throw ConfigError("x0: expected " + std::to_string(model->state_dim()) + " components");
  }
  read_number(j, "", "t0", c.t0);

  if (!j.contains("noise")) throw ConfigError("noise: block is missing");
  parse_noise(j.at("noise"), c.noise);
  if (j.contains("integrator")) parse_integrator(j.at("integrator"), c.integrator);
  if (j.contains("certify")) parse_certify(j.at("certify"), c.certify);
  if (j.contains("mc")) parse_mc(j.at("mc"), c);
  if (j.contains("output")) {
    const json& o = j.at("output");
    require_object(o, "output");
    reject_unknown(o, "output", {"dir"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw ConfigError("output.dir: expected a path");
      c.output_dir = o.at("dir").get<std::string>();
    }
  }

  std::optional<NoiseProcess> noise;
  as_config_error("noise", [&] { noise.emplace(c.build_noise()); });
  if (noise->dimension() != model->noise_dim()) {
    throw ConfigError("noise: dimension " + std::to_string(noise->dimension()) +
                      " does not match the model's " + std::to_string(model->noise_dim()));
  }
  as_config_error("integrator", [&] { c.integrator.validate(c.t0); });
  {
    const double ratio = c.noise_step() / c.integrator.h;
    const double m = std::round(ratio);
    if (m < 1.0 || std::abs(ratio - m) > 1e-9 * m) {
      throw ConfigError("noise.h: must be a whole multiple of integrator.h");
    }
  }

  c.noise_check.horizon = c.integrator.horizon;
  if (j.contains("noise_check")) parse_noise_check(j.at("noise_check"), c.noise_check, c.t0);

  if (j.contains("certificate")) {
    c.certificate = j.at("certificate");
    try {
      (void)c.build_certificate();
    } catch (const ConstantConditionError&) {
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace rfts
