#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "surveil/cusum.hpp"

namespace {

using surveil::Confidence;
using surveil::CusumMode;
using surveil::DetectionResult;
using surveil::Direction;
using surveil::ReportingRule;
using surveil::runCusum;
using surveil::ThresholdSet;
using surveil::Tier;
using surveil::TierThresholds;

ThresholdSet thresholds(double moderate, double strong, double very_strong, double k = 0.5) {
  ThresholdSet t;
  t.tiers = {TierThresholds{moderate, moderate}, TierThresholds{strong, strong},
             TierThresholds{very_strong, very_strong}};
  t.drift_k = k;
  return t;
}

TEST(Cusum, NullSeriesStaysAtZero) {
  const std::vector<double> x(10, 0.0);
  const DetectionResult r =
      runCusum(x, thresholds(4.0, 5.0, 6.0), CusumMode::non_restarting, ReportingRule::any_time);
  for (double v : r.s_up) EXPECT_DOUBLE_EQ(v, 0.0);
  for (double v : r.s_down) EXPECT_DOUBLE_EQ(v, 0.0);
  EXPECT_EQ(r.direction, Direction::none);
  EXPECT_EQ(r.confidence, Confidence::N);
  EXPECT_FALSE(r.flagged_at.has_value());
}

TEST(Cusum, HandIteratedUpwardRun) {
  // x = (2,2,2), k = 0.5: S_up = 1.5, 3.0, 4.5.
  const std::vector<double> x{2.0, 2.0, 2.0};
  const DetectionResult r = runCusum(x, thresholds(4.0, 5.0, 6.0), CusumMode::non_restarting,
                                     ReportingRule::end_of_window);
  ASSERT_EQ(r.s_up.size(), 3u);
  EXPECT_DOUBLE_EQ(r.s_up[0], 1.5);
  EXPECT_DOUBLE_EQ(r.s_up[1], 3.0);
  EXPECT_DOUBLE_EQ(r.s_up[2], 4.5);
  EXPECT_EQ(r.direction, Direction::up);
  EXPECT_EQ(r.confidence, Confidence::M);  // 4.5 >= 4, below h_strong = 5
}

TEST(Cusum, HandIteratedDownwardRun) {
  // x = (-2,-2,-2,-2), k = 0.5: S_down ends at 6.0; strong when h_vs > 6.
  const std::vector<double> x(4, -2.0);
  const DetectionResult r = runCusum(x, thresholds(4.0, 5.0, 6.5), CusumMode::non_restarting,
                                     ReportingRule::end_of_window);
  EXPECT_DOUBLE_EQ(r.s_down.back(), 6.0);
  EXPECT_EQ(r.direction, Direction::down);
  EXPECT_EQ(r.confidence, Confidence::S);
}

TEST(Cusum, NonNegativityOnRandomInput) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> draw(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(30);
    for (double& v : x) v = draw(rng);
    const DetectionResult r = runCusum(x, thresholds(4.0, 5.0, 6.0),
                                       CusumMode::non_restarting, ReportingRule::any_time);
    for (double v : r.s_up) EXPECT_GE(v, 0.0);
    for (double v : r.s_down) EXPECT_GE(v, 0.0);
  }
}

TEST(Cusum, ShiftEquivariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> draw(0.0, 1.0);
  std::vector<double> x(20);
  for (double& v : x) v = draw(rng);
  std::vector<double> shifted(x);
  for (double& v : shifted) v += 0.75;
  const auto base =
      runCusum(x, thresholds(40.0, 50.0, 60.0), CusumMode::non_restarting, ReportingRule::any_time);
  const auto up = runCusum(shifted, thresholds(40.0, 50.0, 60.0), CusumMode::non_restarting,
                           ReportingRule::any_time);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GE(up.s_up[i], base.s_up[i] - 1e-12);
    EXPECT_LE(up.s_down[i], base.s_down[i] + 1e-12);
  }
}

TEST(Cusum, ModesAgreeWhenNothingCrosses) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> draw(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(15);
    for (double& v : x) v = draw(rng);
    const ThresholdSet high = thresholds(90.0, 95.0, 99.0);
    const auto a = runCusum(x, high, CusumMode::auto_reset, ReportingRule::any_time);
    const auto b = runCusum(x, high, CusumMode::non_restarting, ReportingRule::any_time);
    EXPECT_EQ(a.s_up, b.s_up);
    EXPECT_EQ(a.s_down, b.s_down);
    EXPECT_EQ(a.confidence, b.confidence);
  }
}

TEST(Cusum, AutoResetRestartsAfterVeryStrongCrossing) {
  // Two bursts; the statistic resets after crossing the VS threshold and the
  // second burst accumulates from scratch.
  const std::vector<double> x{3.0, 3.0, 0.0, 3.0, 3.0};
  const ThresholdSet t = thresholds(2.0, 3.0, 5.0);
  const auto r = runCusum(x, t, CusumMode::auto_reset, ReportingRule::any_time);
  EXPECT_DOUBLE_EQ(r.s_up[0], 2.5);
  EXPECT_DOUBLE_EQ(r.s_up[1], 5.0);  // crossing value recorded, then reset
  EXPECT_DOUBLE_EQ(r.s_up[2], 0.0);
  EXPECT_DOUBLE_EQ(r.s_up[3], 2.5);
  EXPECT_DOUBLE_EQ(r.s_up[4], 5.0);
  EXPECT_EQ(r.confidence, Confidence::VS);
}

TEST(Cusum, AnyTimeFlagsFirstModerateCrossing) {
  const std::vector<double> x{2.0, 2.0, 2.0, -2.0};
  const auto r = runCusum(x, thresholds(3.0, 9.0, 12.0), CusumMode::non_restarting,
                          ReportingRule::any_time, 13);
  ASSERT_TRUE(r.flagged_at.has_value());
  EXPECT_EQ(*r.flagged_at, 14);  // second update: S_up = 3.0 >= 3
  EXPECT_EQ(r.direction, Direction::up);
}

TEST(Cusum, MixedDirectionUnderAnyTime) {
  // A surge up then a hard reversal crosses both moderate thresholds.
  const std::vector<double> x{4.0, 4.0, -6.0, -6.0, -6.0};
  const auto r = runCusum(x, thresholds(3.0, 20.0, 30.0), CusumMode::non_restarting,
                          ReportingRule::any_time);
  EXPECT_EQ(r.direction, Direction::mixed);
  EXPECT_EQ(r.confidence, Confidence::M);
}

TEST(Cusum, EndOfWindowIgnoresMidWindowExcursion) {
  // S_up peaks at 7.0 mid-window, then the k = 1.5 drift bleeds it back to
  // zero; terminal statistics see nothing.
  const std::vector<double> x{5.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const auto r = runCusum(x, thresholds(4.0, 6.0, 9.0, 1.5), CusumMode::non_restarting,
                          ReportingRule::end_of_window);
  EXPECT_EQ(r.confidence, Confidence::N);
  EXPECT_EQ(r.direction, Direction::none);
  const auto any = runCusum(x, thresholds(4.0, 6.0, 9.0, 1.5), CusumMode::non_restarting,
                            ReportingRule::any_time);
  EXPECT_EQ(any.confidence, Confidence::S);  // max S_up = 7.0
  EXPECT_EQ(any.direction, Direction::up);
}

TEST(Cusum, NonFiniteInputThrows) {
  const std::vector<double> x{1.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(runCusum(x, thresholds(3.0, 4.0, 5.0), CusumMode::non_restarting,
                        ReportingRule::any_time),
               std::invalid_argument);
}

}  // namespace
