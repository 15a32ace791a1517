#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "rfts/error.hpp"
#include "rfts/integrate.hpp"

namespace {

using namespace rfts;

IntegratorConfig config(double h, double horizon) {
  IntegratorConfig c;
  c.h = h;
  c.horizon = horizon;
  return c;
}

Trajectory run(const SystemModel& m, const NoiseProcess& p, std::vector<double> x0,
               const IntegratorConfig& c, std::uint64_t seed = 1) {
  return integrate_path(m, p.sample_path(0.0, c.horizon, c.h, seed), x0, c);
}

double endpoint_error(double h) {
  IntegratorConfig c = config(h, 5.0);
  const auto t = run(make_builtin_model("linear-stable"), make_zero_noise(1), {1.0}, c);
  return std::abs(t.state(t.size() - 1)[0] - std::exp(-5.0));
}

TEST(Rk4, ExponentialDecayAtOne) {
  const auto t = run(make_builtin_model("linear-stable"), make_zero_noise(1), {1.0}, config(1e-3, 1.0));
  ASSERT_EQ(t.size(), 1001u);
  EXPECT_NEAR(t.state(1000)[0], std::exp(-1.0), 1e-10);
  EXPECT_EQ(t.time(1000), 1.0);
}

TEST(Rk4, FourthOrder) {
  const double ratio = endpoint_error(2e-3) / endpoint_error(1e-3);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Rk4, OriginStaysAtOrigin) {
  const auto t = run(make_example1(), make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0}), {0.0, 0.0},
                     config(1e-3, 2.0));
  for (double v : t.states) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(t.settled);
  EXPECT_EQ(*t.settle_time, 0.0);
}

TEST(Rk4, SquareRootDecaySettlesNearClosedForm) {
  const auto t = run(make_builtin_model("sqrt-decay"), make_zero_noise(1), {1.0}, config(1e-3, 4.0));
  ASSERT_TRUE(t.settled);
  EXPECT_NEAR(*t.settle_time, 2.0 * (1.0 - std::sqrt(1e-4)), 0.05);
  for (std::size_t k = 0; k <= 1500; k += 100) {
    const double s = t.time(k);
    EXPECT_NEAR(t.state(k)[0], (1.0 - s / 2.0) * (1.0 - s / 2.0), 1e-6);
  }
}

TEST(Rk4, NoiseHeldOverEachStep) {
  // x' = xi with a noise grid twice as coarse as the integrator grid.
  const SystemModel m(
      "integrator", 1, 1, [](std::span<const double>, double, std::span<double> o) { o[0] = 0.0; },
      [](std::span<const double>, double, std::span<double> o) { o[0] = 1.0; });
  const NoisePath path(0.0, 0.5, 1, {1.0, -2.0, 4.0, 0.5, 8.0}, 0);
  IntegratorConfig c = config(0.25, 2.0);
  c.absorb_at_origin = false;
  const auto t = integrate_path(m, path, std::vector<double>{0.0}, c);
  const std::vector<double> expected{0.0, 0.25, 0.5, 0.0, -0.5, 0.5, 1.5, 1.625, 1.75};
  ASSERT_EQ(t.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(t.state(k)[0], expected[k]) << k;
}

TEST(Rk4, BlowUpIsMarked) {
  const auto t = run(make_builtin_model("cubic-unstable"), make_zero_noise(1), {1.0}, config(1e-3, 2.0));
  ASSERT_TRUE(t.blowup_time.has_value());
  EXPECT_NEAR(*t.blowup_time, 0.5, 0.01);
  EXPECT_FALSE(t.settled);
  for (double v : t.states) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(t.sidecar()["blowup"], true);
}

TEST(Rk4, NanFromEvaluatorThrows) {
  const SystemModel m(
      "nan", 1, 1, [](std::span<const double>, double, std::span<double> o) { o[0] = NAN; },
      [](std::span<const double>, double, std::span<double> o) { o[0] = 0.0; });
  EXPECT_THROW(run(m, make_zero_noise(1), {1.0}, config(1e-3, 1.0)), EvaluatorError);
}

TEST(Rk4, AbsorbedStatesStayZero) {
  const auto t = run(make_example1(), make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0}), {1.0, 1.0},
                     config(1e-3, 5.0), 9);
  ASSERT_TRUE(t.absorbed_index.has_value());
  const SystemModel m = make_example1();
  for (std::size_t k = *t.absorbed_index; k < t.size(); ++k) {
    EXPECT_EQ(t.state(k)[0], 0.0);
    EXPECT_EQ(t.state(k)[1], 0.0);
  }
  const auto f = m.drift(t.state(t.size() - 1), 0.0);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_LE(std::hypot(t.absorb_jump[0], t.absorb_jump[1]), config(1e-3, 5.0).effective_eps_absorb());
  EXPECT_TRUE(t.settled);
}

TEST(Rk4, DimensionAndGridChecks) {
  const SystemModel m = make_example1();
  const auto noise = make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0});
  IntegratorConfig c = config(1e-3, 1.0);
  EXPECT_THROW(integrate_path(m, noise.sample_path(0.0, 1.0, 1e-3, 1), std::vector<double>{1.0}, c),
               InvalidParameter);
  EXPECT_THROW(integrate_path(m, make_zero_noise(1).sample_path(0.0, 1.0, 1e-3, 1),
                              std::vector<double>{1.0, 1.0}, c),
               InvalidParameter);
  EXPECT_THROW(integrate_path(m, noise.sample_path(0.0, 1.0, 1.5e-3, 1), std::vector<double>{1.0, 1.0}, c),
               InvalidParameter);
  EXPECT_THROW(integrate_path(m, noise.sample_path(0.0, 0.5, 1e-3, 1), std::vector<double>{1.0, 1.0}, c),
               InvalidParameter);
  EXPECT_NO_THROW(integrate_path(m, noise.sample_path(0.0, 1.0, 2e-3, 1), std::vector<double>{1.0, 1.0}, c));
}

TEST(IntegratorConfig, AbsorptionFloorAndValidation) {
  IntegratorConfig c;
  EXPECT_DOUBLE_EQ(c.effective_eps_absorb(), std::pow(5e-4, 1.5));
  c.eps_absorb = 1e-5;
  c.h = 1e-4;
  EXPECT_EQ(c.effective_eps_absorb(), 1e-5);
  c.eps_settle = 1e-5;
  EXPECT_THROW(c.validate(0.0), InvalidParameter);
  c.absorb_at_origin = false;
  EXPECT_NO_THROW(c.validate(0.0));
  c.horizon = -1.0;
  EXPECT_THROW(c.validate(0.0), InvalidParameter);
  c = IntegratorConfig{};
  c.h = 0.0;
  EXPECT_THROW(c.validate(0.0), InvalidParameter);
}

Trajectory synthetic(std::vector<double> values, double h) {
  Trajectory t;
  t.h = h;
  t.dim = 1;
  t.states = std::move(values);
  return t;
}

TEST(Settling, StayInRequirement) {
  std::vector<double> v(11, 1.0);
  for (int k = 3; k < 5; ++k) v[k] = 0.0;
  for (int k = 7; k <= 10; ++k) v[k] = 0.0;
  EXPECT_EQ(*detect_settling(synthetic(v, 1.0), 1e-4), 7.0);
  EXPECT_EQ(*detect_settling(synthetic(std::vector<double>(5, 0.0), 1.0), 1e-4), 0.0);
  v.back() = 1.0;
  EXPECT_FALSE(detect_settling(synthetic(v, 1.0), 1e-4).has_value());
}

TEST(Settling, LargerThresholdNeverLater) {
  const auto t = run(make_builtin_model("linear-stable"), make_zero_noise(1), {1.0}, config(1e-3, 20.0));
  double previous = 1e300;
  for (double eps : {1e-8, 1e-6, 1e-4, 1e-2, 1e-1}) {
    const auto s = detect_settling(t, eps);
    ASSERT_TRUE(s.has_value());
    EXPECT_LE(*s, previous);
    EXPECT_GE(*s, t.t0);
    const double k = (*s - t.t0) / t.h;
    EXPECT_EQ(k, std::round(k));
    previous = *s;
  }
}

TEST(Trajectory, CsvAndSidecar) {
  const auto t = run(make_example1(), make_zero_noise(2), {1.0, 1.0}, config(1e-3, 0.002));
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,x_1,x_2");
  EXPECT_NE(os.str().find("\n0,1,1\n"), std::string::npos);
  const auto j = t.sidecar();
  EXPECT_TRUE(j.contains("settled"));
  EXPECT_TRUE(j.contains("settle_time"));
  EXPECT_TRUE(j.contains("seed"));
}

TEST(IntegralForm, ZeroTrajectory) {
  const IntegratorConfig c = config(1e-3, 1.0);
  const auto path = make_zero_noise(2).sample_path(0.0, 1.0, 1e-3, 1);
  const auto t = integrate_path(make_example1(), path, std::vector<double>{0.0, 0.0}, c);
  const auto r = check_integral_form(t, make_example1(), path, 1e-12);
  EXPECT_EQ(r.max_residual, 0.0);
  EXPECT_TRUE(r.report.pass);
}

TEST(IntegralForm, LinearDecay) {
  const IntegratorConfig c = config(1e-3, 5.0);
  const auto path = make_zero_noise(1).sample_path(0.0, 5.0, 1e-3, 1);
  const SystemModel m = make_builtin_model("linear-stable");
  const auto t = integrate_path(m, path, std::vector<double>{1.0}, c);
  const auto r = check_integral_form(t, m, path, 1e-8);
  EXPECT_LE(r.max_residual, 1e-8);
  EXPECT_TRUE(r.report.pass);
}

TEST(IntegralForm, FilteredNoiseExample2) {
  const IntegratorConfig c = config(1e-3, 3.0);
  const auto path = make_filtered_white_noise(0.5, 1.0, 1).sample_path(0.0, 3.0, 1e-3, 4);
  const SystemModel m = make_builtin_model("example2-closed");
  c.validate(0.0);
  const auto t = integrate_path(m, path, std::vector<double>{3.0}, c);
  const auto r = check_integral_form(t, m, path, 1e-6);
  EXPECT_LE(r.residuals[1000], 1e-6);
}

// Window before either component of Example 1 reaches the cube-root cusp.
TEST(IntegralForm, Example1SmoothWindow) {
  const IntegratorConfig c = config(1e-3, 10.0);
  const auto path = make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0}).sample_path(0.0, 10.0, 1e-3, 3);
  const SystemModel m = make_example1();
  const auto t = integrate_path(m, path, std::vector<double>{1.0, 1.0}, c);
  const auto r = check_integral_form(t, m, path, 1e-6);
  std::size_t end = 0;
  while (end < t.size() && std::min(std::abs(t.state(end)[0]), std::abs(t.state(end)[1])) > 1e-2) ++end;
  ASSERT_GT(end, 100u);
  const double window = *std::max_element(r.residuals.begin(), r.residuals.begin() + end);
  EXPECT_LE(window, r.scale);
  EXPECT_GT(r.max_residual, 0.0);
}

TEST(Uniqueness, ZeroOffsetIsExactlyZero) {
  const auto path = make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0}).sample_path(0.0, 3.0, 1e-3, 5);
  EXPECT_EQ(uniqueness_probe(make_example1(), path, std::vector<double>{1.0, 1.0}, 0.0, config(1e-3, 3.0)),
            0.0);
}

TEST(Uniqueness, Example1PathsMerge) {
  const IntegratorConfig c = config(1e-3, 10.0);
  const auto path = make_random_phase_cosine({0.3, 0.3}, {1.0, 1.0}).sample_path(0.0, 10.0, 1e-3, 5);
  const SystemModel m = make_example1();
  const auto a = integrate_path(m, path, std::vector<double>{1.0, 1.0}, c);
  const auto b = integrate_path(m, path, std::vector<double>{1.0 + 1e-6, 1.0}, c);
  EXPECT_LE(std::abs(a.state(a.size() - 1)[0] - b.state(b.size() - 1)[0]), c.eps_absorb);
  EXPECT_LE(std::abs(a.state(a.size() - 1)[1] - b.state(b.size() - 1)[1]), c.eps_absorb);
  EXPECT_GT(uniqueness_probe(m, path, std::vector<double>{1.0, 1.0}, 1e-6, c), 0.0);
}

TEST(Uniqueness, UnstableLinearGrowth) {
  const IntegratorConfig c = config(1e-3, 10.0);
  const auto path = make_zero_noise(1).sample_path(0.0, 10.0, 1e-3, 5);
  const double gap = uniqueness_probe(make_builtin_model("linear-unstable"), path,
                                      std::vector<double>{1.0}, 1e-6, c);
  EXPECT_NEAR(gap, 1e-6 * std::exp(10.0), 1e-6 * 1e-6 * std::exp(10.0) * 10.0);
}

}  // namespace
