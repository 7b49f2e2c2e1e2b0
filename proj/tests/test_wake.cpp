#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace qstpi;

namespace {

Position at(double x, double y) { return Position{0, x, y, 1.0, {}}; }

// wind from the west (270 deg) blows towards +x
constexpr double kWest = 270.0;

}  // namespace

TEST(PowerCurve, Anchors) {
  const TurbineSpec t;
  EXPECT_EQ(power_output(t.cut_in, t), 0.0);
  EXPECT_EQ(power_output(t.rated_speed, t), t.rated_power);
  EXPECT_EQ(power_output(t.cut_out, t), 0.0);
  EXPECT_NEAR(power_output(10.0, t), 12.57, 0.01);
}

TEST(Wake, DeficitDirectlyDownwind) {
  const TurbineSpec t;
  const WakeParams w{0.05, 0.8};
  const double d = wake_deficit(at(0, 0), at(1200, 0), kWest, w, t);
  EXPECT_NEAR(d, (1.0 - std::sqrt(0.2)) * (240.0 / 360.0) * (240.0 / 360.0), 1e-12);
  EXPECT_NEAR(d, 0.5528 * 4.0 / 9.0, 1e-4);
  EXPECT_NEAR(d, 0.2457, 1e-4);
}

TEST(Wake, NoDeficitUpwindOrOutsideCone) {
  const TurbineSpec t;
  const WakeParams w;
  EXPECT_EQ(wake_deficit(at(0, 0), at(-1200, 0), kWest, w, t), 0.0);
  // cone radius at 1200 m is 120 + 60 = 180 m
  EXPECT_GT(wake_deficit(at(0, 0), at(1200, 179), kWest, w, t), 0.0);
  EXPECT_EQ(wake_deficit(at(0, 0), at(1200, 181), kWest, w, t), 0.0);
  EXPECT_EQ(wake_deficit(at(0, 0), at(1200, 5000), kWest, w, t), 0.0);
}

TEST(Wake, DeficitDecreasesWithDistance) {
  const TurbineSpec t;
  const WakeParams w;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0, 5000.0);
  for (int k = 0; k < 1000; ++k) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_GE(wake_deficit(at(0, 0), at(a, 0), kWest, w, t), wake_deficit(at(0, 0), at(b, 0), kWest, w, t));
  }
}

TEST(Interference, SingleBinEqualsPowerDifference) {
  const TurbineSpec t;
  const WakeParams w;
  const WindRose rose{{{kWest, 10.0, 1.0}}};
  const double delta = wake_deficit(at(0, 0), at(1200, 0), kWest, w, t);
  const double loss = pairwise_interference(at(0, 0), at(1200, 0), rose, w, t);
  EXPECT_GT(loss, 0.0);
  EXPECT_NEAR(loss, power_output(10.0, t) - power_output(10.0 * (1.0 - delta), t), 1e-12);
  // the reverse direction is never waked under this rose
  EXPECT_EQ(pairwise_interference(at(1200, 0), at(0, 0), rose, w, t), 0.0);
}

TEST(Interference, OpposedRoseIsSymmetric) {
  auto inst = testutil::make_instance({{0, 0}}, {{0, 0}, {1500, 0}}, 1.0);
  inst.interference.reset();
  inst.wind_rose = WindRose{{{kWest, 9.0, 0.5}, {90.0, 9.0, 0.5}}};
  const auto m = build_interference_matrix(inst);
  EXPECT_GT(m(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m(0, 1), m(1, 0));
}

TEST(Interference, TrivialMatrices) {
  auto one = testutil::make_instance({{0, 0}}, {{0, 0}}, 1.0);
  one.interference.reset();
  const auto m1 = build_interference_matrix(one);
  ASSERT_EQ(m1.size(), 1u);
  EXPECT_EQ(m1(0, 0), 0.0);

  // one westerly bin; positions stacked north-south never sit downwind of each other
  auto far = testutil::make_instance({{0, 0}}, {{0, 0}, {0, 1e5}, {0, -1e5}}, 1.0);
  far.interference.reset();
  far.wind_rose = WindRose{{{kWest, 10.0, 1.0}}};
  const auto m = build_interference_matrix(far);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), 0.0);
  }
}

TEST(Interference, InvariantUnderTranslationAndRotationOfFrameAndRose) {
  const auto base = testutil::random_instance(12, 8);
  const auto m0 = build_interference_matrix(base);
  auto moved = base;
  const double rot = 37.0;
  const double c = std::cos(rot * std::numbers::pi / 180.0);
  const double s = std::sin(rot * std::numbers::pi / 180.0);
  for (auto& p : moved.positions) {
    // rotate clockwise by `rot` (compass sense) and translate
    const double x = p.x_m, y = p.y_m;
    p.x_m = x * c + y * s + 12345.0;
    p.y_m = -x * s + y * c - 6789.0;
  }
  for (auto& b : moved.wind_rose.bins) b.direction_deg += rot;
  const auto m1 = build_interference_matrix(moved);
  for (std::size_t i = 0; i < m0.size(); ++i) {
    for (std::size_t j = 0; j < m0.size(); ++j) EXPECT_NEAR(m0(i, j), m1(i, j), 1e-9);
  }
}
