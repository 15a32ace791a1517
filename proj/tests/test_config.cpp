#include <string>

#include <gtest/gtest.h>

#include "rfts/config.hpp"
#include "rfts/error.hpp"
#include "support.hpp"

namespace {

using namespace rfts;
using nlohmann::json;

json minimal() {
  return {{"model", "example1"}, {"x0", {1.0, 1.0}}, {"noise", {{"kind", "cosine"}, {"amplitudes", {0.3, 0.3}}}}};
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalDefaults) {
  const ExperimentConfig c = parse_config(minimal());
  EXPECT_EQ(c.model, "example1");
  EXPECT_EQ(c.noise.omegas, (std::vector<double>{1.0, 1.0}));
  EXPECT_DOUBLE_EQ(c.build_noise().declared_mean_square(), 0.09);
  EXPECT_EQ(c.integrator.h, 1e-3);
  EXPECT_EQ(c.noise_step(), 1e-3);
  EXPECT_EQ(c.n_paths, 500u);
  EXPECT_EQ(c.settled_threshold, 0.99);
  EXPECT_FALSE(c.certificate.has_value());
  EXPECT_THROW(c.build_certificate(), ConfigError);
}

TEST(Config, RepositoryConfigsLoad) {
  for (const char* name : {"example1.json", "example1_k1.json", "example2.json", "cubic_unstable.json",
                           "zero_noise.json", "filtered_noise.json"}) {
    EXPECT_NO_THROW(load_config(testutil::source_path(std::string("configs/") + name))) << name;
  }
}

TEST(Config, CertificateDefaultsToNoiseK) {
  json j = minimal();
  j["certificate"] = {{"gamma", 2.0 / 3.0}, {"c1", 1.5874010519681994}, {"c2", 1.5874010519681994}};
  const Certificate cert = parse_config(j).build_certificate();
  EXPECT_DOUBLE_EQ(cert.noise_bound(), 0.09);
  EXPECT_EQ(cert.lyapunov().name, "half-norm-squared");
}

TEST(Config, ConstantConditionDeferred) {
  json j = minimal();
  j["certificate"] = {{"gamma", 2.0 / 3.0}, {"c1", 1.0}, {"c2", 1.0}, {"K", 1.0}};
  const ExperimentConfig c = parse_config(j);
  EXPECT_THROW(c.build_certificate(), ConstantConditionError);
}

TEST(Config, ErrorsNameTheField) {
  json j = minimal();
  j.erase("model");
  EXPECT_NE(error_of(j).find("model"), std::string::npos);

  j = minimal();
  j["model"] = "no-such";
  EXPECT_NE(error_of(j).find("model"), std::string::npos);

  j = minimal();
  j["x0"] = {1.0};
  EXPECT_NE(error_of(j).find("x0"), std::string::npos);

  j = minimal();
  j["noise"]["kind"] = "pink";
  EXPECT_NE(error_of(j).find("noise.kind"), std::string::npos);

  j = minimal();
  j["noise"]["amplitudes"] = {0.3, -0.3};
  EXPECT_NE(error_of(j).find("noise"), std::string::npos);

  j = minimal();
  j["noise"] = {{"kind", "zero"}};
  j["noise"]["dimension"] = 1;
  EXPECT_NE(error_of(j).find("noise"), std::string::npos);

  j = minimal();
  j["integrator"] = {{"h", -1.0}};
  EXPECT_NE(error_of(j).find("integrator.h"), std::string::npos);

  j = minimal();
  j["integrator"] = {{"eps_settle", 1e-6}};
  EXPECT_NE(error_of(j).find("integrator"), std::string::npos);

  j = minimal();
  j["noise"]["h"] = 1.5e-3;
  EXPECT_NE(error_of(j).find("noise.h"), std::string::npos);

  j = minimal();
  j["mc"] = {{"n_paths", 1}};
  EXPECT_NE(error_of(j).find("mc.n_paths"), std::string::npos);

  j = minimal();
  j["mc"] = {{"master_seed", -3}};
  EXPECT_NE(error_of(j).find("mc.master_seed"), std::string::npos);

  j = minimal();
  j["typo"] = 1;
  EXPECT_NE(error_of(j).find("typo"), std::string::npos);

  j = minimal();
  j["certificate"] = json::object();
  EXPECT_NE(error_of(j).find("certificate"), std::string::npos);

  j = minimal();
  j["certificate"] = {{"gamma", 1.5}, {"c1", 1.0}, {"c2", 1.0}};
  EXPECT_NE(error_of(j).find("certificate"), std::string::npos);

  j = minimal();
  j["certificate"] = {{"c1", 1.0}, {"c2", 1.0}};
  EXPECT_NE(error_of(j).find("certificate.gamma"), std::string::npos);

  j = minimal();
  j["noise_check"] = {{"wlln_times", {0.0}}};
  EXPECT_NE(error_of(j).find("noise_check.wlln_times"), std::string::npos);
}

TEST(Config, LoadFailures) {
  testutil::TempDir dir;
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

TEST(Config, McBlock) {
  json j = minimal();
  j["mc"] = {{"n_paths", 123}, {"master_seed", 99}, {"settled_threshold", 0.9}};
  j["noise"]["h"] = 2e-3;
  const ExperimentConfig c = parse_config(j);
  const McConfig m = c.mc(3);
  EXPECT_EQ(m.n_paths, 123u);
  EXPECT_EQ(m.master_seed, 99u);
  EXPECT_EQ(m.jobs, 3u);
  EXPECT_EQ(m.h_noise, 2e-3);
}

}  // namespace
