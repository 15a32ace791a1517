#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "rfts/error.hpp"
#include "rfts/systems.hpp"

namespace {

using namespace rfts;

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

TEST(SignedPower, Values) {
  EXPECT_EQ(signed_power(0.0, 1.0 / 3.0), 0.0);
  EXPECT_NEAR(signed_power(-8.0, 1.0 / 3.0), -2.0, 1e-15);
  EXPECT_NEAR(signed_power(8.0, 4.0 / 3.0), 16.0, 1e-13);
  EXPECT_NEAR(signed_power(-4.0, 0.5), -2.0, 1e-15);
}

TEST(MatrixNorm, DiagonalAndVector) {
  EXPECT_NEAR(matrix_norm2(std::vector<double>{1.0, 0.0, 0.0, -2.0}, 2, 2), 2.0, 1e-14);
  EXPECT_NEAR(matrix_norm2(std::vector<double>{3.0, 4.0}, 1, 2), 5.0, 1e-15);
  EXPECT_NEAR(matrix_norm2(std::vector<double>{3.0, 4.0}, 2, 1), 5.0, 1e-15);
  EXPECT_NEAR(matrix_norm2(std::vector<double>{1.0, 1.0, 1.0, 1.0}, 2, 2), 2.0, 1e-14);
}

TEST(Example1, DriftAndGainValues) {
  const SystemModel m = make_example1();
  EXPECT_EQ(m.state_dim(), 2u);
  EXPECT_EQ(m.noise_dim(), 2u);
  const auto f = m.drift(std::vector<double>{1.0, 0.0}, 0.0);
  EXPECT_NEAR(f[0], -1.5, 1e-15);
  EXPECT_NEAR(f[1], 1.0 / 3.0, 1e-15);
  const auto g = m.gain(std::vector<double>{1.0, -8.0}, 0.0);
  EXPECT_NEAR(g[0], 1.0, 1e-15);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_NEAR(g[3], -2.0, 1e-15);
}

TEST(Example1, OddOnEachAxis) {
  const SystemModel m = make_example1();
  for (double s : grid(-3.0, 3.0, 61)) {
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<double> x(2, 0.0), y(2, 0.0);
      x[axis] = s;
      y[axis] = -s;
      const auto fx = m.drift(x, 0.0);
      const auto fy = m.drift(y, 0.0);
      EXPECT_NEAR(fx[0], -fy[0], 1e-14);
      EXPECT_NEAR(fx[1], -fy[1], 1e-14);
    }
  }
}

TEST(Example2, OpenLoopValues) {
  const SystemModel m = make_builtin_model("example2-open");
  EXPECT_EQ(m.drift(std::vector<double>{0.0}, 0.0)[0], 0.0);
  EXPECT_EQ(m.gain(std::vector<double>{0.0}, 0.0)[0], 0.0);
  const double q = std::numbers::pi / 4.0;
  EXPECT_NEAR(m.gain(std::vector<double>{1.0}, 0.0)[0], std::cbrt(q), 1e-14);
  EXPECT_NEAR(m.gain(std::vector<double>{1.0}, 0.0)[0], 0.9226, 1e-4);
  EXPECT_NEAR(m.drift(std::vector<double>{1.0}, 0.0)[0], 1.5 * q * q - 0.5, 1e-14);
  EXPECT_NEAR(m.drift(std::vector<double>{1.0}, 0.0)[0], 0.4252, 1e-4);
}

TEST(Example2, ControllerAtOrigin) { EXPECT_EQ(paper_controller(0.0), 0.0); }

TEST(Example2, ClosedLoopIdentities) {
  const SystemModel m = make_builtin_model("example2-closed");
  double worst_f = 0.0, worst_g = 0.0;
  for (double x : grid(-10.0, 10.0, 1001)) {
    const double a = std::atan(x);
    const double dv = a / (1.0 + x * x);
    const double f = m.drift(std::vector<double>{x}, 0.0)[0];
    const double g = m.gain(std::vector<double>{x}, 0.0)[0];
    const double target = std::pow(std::abs(a), 4.0 / 3.0);
    worst_f = std::max(worst_f, std::abs(dv * f + target));
    worst_g = std::max(worst_g, std::abs(dv * g - 0.5 * target));
  }
  EXPECT_LE(worst_f, 1e-9);
  EXPECT_LE(worst_g, 1e-9);
}

TEST(Example2, ClosedLoopSpotValues) {
  const SystemModel m = make_builtin_model("example2-closed");
  const auto dvf = [&](double x) {
    return std::atan(x) / (1.0 + x * x) * m.drift(std::vector<double>{x}, 0.0)[0];
  };
  EXPECT_NEAR(dvf(1.0), -std::pow(std::numbers::pi / 4.0, 4.0 / 3.0), 1e-12);
  EXPECT_NEAR(dvf(1.0), -0.724636, 1e-6);
  EXPECT_NEAR(dvf(-3.0), -1.345151, 1e-6);
}

TEST(Example2, ClosedLoopIsOdd) {
  const SystemModel m = make_builtin_model("example2-closed");
  for (double x : grid(0.0, 8.0, 81)) {
    EXPECT_NEAR(m.drift(std::vector<double>{x}, 0.0)[0], -m.drift(std::vector<double>{-x}, 0.0)[0],
                1e-12);
  }
}

TEST(Builtins, AllVanishAtOrigin) {
  const std::vector<double> times{0.0, 1.0, 10.0};
  for (const auto& name : builtin_model_names()) {
    const auto r = check_origin(make_builtin_model(name), times, 1e-15);
    EXPECT_TRUE(r.pass) << name;
    EXPECT_EQ(r.n_samples, times.size()) << name;
  }
  EXPECT_THROW(make_builtin_model("no-such-model"), InvalidParameter);
}

TEST(Builtins, OriginCheckCatchesOffsetDrift) {
  const SystemModel bad(
      "offset", 2, 1,
      [](std::span<const double>, double, std::span<double> out) {
        out[0] = 1.0;
        out[1] = 0.0;
      },
      [](std::span<const double>, double, std::span<double> out) { out[0] = out[1] = 0.0; });
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto r = check_origin(bad, times, 1e-15);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.n_violations, 3u);
  EXPECT_DOUBLE_EQ(r.worst_margin, -1.0);
}

TEST(Modulus, FamiliesAndSums) {
  EXPECT_EQ(Modulus::linear(2.0)(0.5), 1.0);
  EXPECT_NEAR(Modulus::root(4.0, 1.0 / 3.0)(8.0), 8.0, 1e-14);
  const double e2 = std::exp(-2.0);
  const Modulus lo = Modulus::log_osgood(1.0);
  EXPECT_NEAR(lo(0.01), 0.01 * std::log(100.0), 1e-15);
  EXPECT_NEAR(lo(e2), 2.0 * e2, 1e-15);
  EXPECT_NEAR(lo(1.0), 1.0 + e2, 1e-14);
  EXPECT_EQ(lo(0.0), 0.0);
  const Modulus sum = Modulus::linear(2.0) + Modulus::root(4.0, 1.0 / 3.0);
  EXPECT_NEAR(sum(1.0), 6.0, 1e-15);
  EXPECT_THROW(Modulus::root(1.0, 1.5), InvalidParameter);
  EXPECT_THROW(Modulus::linear(0.0), InvalidParameter);
}

ModulusPair example1_moduli() {
  return {Modulus::root(4.0, 1.0 / 3.0) + Modulus::linear(2.0),
          Modulus::root(std::pow(2.0, 4.0 / 3.0), 2.0 / 3.0)};
}

TEST(Osgood, EqualStatesGiveZeroMargin) {
  const SystemModel m = make_example1();
  const std::vector<double> x{0.7, -1.2};
  const auto r = osgood_margins(m, example1_moduli(), x, x, 0.0);
  EXPECT_EQ(r.drift, 0.0);
  EXPECT_EQ(r.gain, 0.0);
}

TEST(Osgood, Example1PassesOnBox) {
  const std::vector<double> times{0.0};
  const auto r = check_osgood(make_example1(), example1_moduli(), 2.0, 20000, times, 1e-12, 3);
  EXPECT_TRUE(r.drift.pass) << r.drift.worst_margin;
  EXPECT_TRUE(r.gain.pass) << r.gain.worst_margin;
  EXPECT_TRUE(r.pass);
}

TEST(Osgood, LinearEqualityCase) {
  const ModulusPair moduli{Modulus::linear(1.0), Modulus::linear(1.0)};
  const std::vector<double> times{0.0};
  const auto r = check_osgood(make_builtin_model("linear-stable"), moduli, 3.0, 500, times, 1e-12, 4);
  EXPECT_TRUE(r.drift.pass);
  EXPECT_NEAR(r.drift.worst_margin, 0.0, 1e-12);
}

TEST(Osgood, TooSmallModulusFails) {
  const ModulusPair moduli{Modulus::linear(0.5), Modulus::linear(1.0)};
  const std::vector<double> times{0.0};
  const auto r = check_osgood(make_builtin_model("linear-stable"), moduli, 3.0, 200, times, 1e-12, 4);
  EXPECT_FALSE(r.drift.pass);
  EXPECT_FALSE(r.pass);
}

TEST(Osgood, SymmetricInPair) {
  const SystemModel m = make_example1();
  const auto moduli = example1_moduli();
  const std::vector<double> a{0.3, -1.7}, b{-0.9, 0.4};
  const auto ab = osgood_margins(m, moduli, a, b, 0.0);
  const auto ba = osgood_margins(m, moduli, b, a, 0.0);
  EXPECT_EQ(ab.drift, ba.drift);
  EXPECT_EQ(ab.gain, ba.gain);
}

TEST(OsgoodDivergence, LinearDiverges) {
  const ModulusPair moduli{Modulus::linear(1.0), Modulus::linear(1.0)};
  const auto r = check_osgood_divergence(moduli, 0.5);
  EXPECT_TRUE(r.rho.diverging);
  for (std::size_t k = 0; k < r.rho.deltas.size(); ++k) {
    EXPECT_NEAR(r.rho.integrals[k], std::log(0.5 / r.rho.deltas[k]), 1e-9);
  }
}

TEST(OsgoodDivergence, SquareRootConverges) {
  const ModulusPair moduli{Modulus::root(1.0, 0.5), Modulus::root(1.0, 0.5)};
  const double g = 0.5;
  const auto r = check_osgood_divergence(moduli, g);
  EXPECT_FALSE(r.rho.diverging);
  EXPECT_FALSE(r.sqrt_rho_kappa.diverging);
  for (std::size_t k = 0; k < r.rho.deltas.size(); ++k) {
    EXPECT_NEAR(r.rho.integrals[k], 2.0 * (std::sqrt(g) - std::sqrt(r.rho.deltas[k])), 1e-9);
  }
}

TEST(OsgoodDivergence, LogOsgoodDiverges) {
  const ModulusPair moduli{Modulus::log_osgood(1.0), Modulus::log_osgood(1.0)};
  const double g = 0.1;
  const auto r = check_osgood_divergence(moduli, g);
  EXPECT_TRUE(r.rho.diverging);
  for (std::size_t k = 0; k < r.rho.deltas.size(); ++k) {
    const double d = r.rho.deltas[k];
    EXPECT_NEAR(r.rho.integrals[k], std::log(std::log(1.0 / d)) - std::log(std::log(1.0 / g)), 1e-9);
  }
}

TEST(OsgoodDivergence, Example1GainModulusFailsDivergence) {
  const auto r = check_osgood_divergence(example1_moduli(), 0.5);
  EXPECT_FALSE(r.rho.diverging);
}

}  // namespace
