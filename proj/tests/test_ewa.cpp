#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "surveil/ewa.hpp"

using surveil::ewa;
using surveil::ewaMasked;

TEST(Ewa, WorkedExample) {
  const std::vector<double> values{1.0, 2.0, 3.0};
  EXPECT_NEAR(ewa(values, 0.5), 17.0 / 7.0, 1e-12);
}

TEST(Ewa, ConstantVectorIsFixedPoint) {
  const std::vector<double> values(9, 7.25);
  for (double w : {0.1, 0.3, 0.7, 1.0}) EXPECT_NEAR(ewa(values, w), 7.25, 1e-12);
}

TEST(Ewa, UnitWeightIsSimpleMean) {
  const std::vector<double> values{1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(ewa(values, 1.0), 2.0);
}

TEST(Ewa, ContinuousAtUnitWeight) {
  const std::vector<double> values{4.0, -2.0, 9.0, 0.5, 1.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  EXPECT_NEAR(ewa(values, 1.0 - 1e-8), mean, 1e-6);
}

TEST(Ewa, ConvexityOnRandomWindows) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value_draw(-10.0, 10.0);
  std::uniform_real_distribution<double> w_draw(0.05, 1.0);
  std::uniform_int_distribution<int> len_draw(1, 24);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(static_cast<std::size_t>(len_draw(rng)));
    for (double& v : values) v = value_draw(rng);
    const double w = w_draw(rng);
    const double result = ewa(values, w);
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    EXPECT_GE(result, lo - 1e-12);
    EXPECT_LE(result, hi + 1e-12);
  }
}

TEST(Ewa, InvalidInputsThrow) {
  EXPECT_THROW(ewa({}, 0.5), std::invalid_argument);
  EXPECT_THROW(ewa(std::vector<double>{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(ewa(std::vector<double>{1.0}, 1.5), std::invalid_argument);
}

TEST(EwaMasked, MatchesPlainEwaOnFullSupport) {
  const std::vector<double> values{1.0, 2.0, 3.0, -4.0};
  const std::vector<bool> all(values.size(), true);
  for (double w : {0.3, 0.7, 1.0}) EXPECT_DOUBLE_EQ(ewaMasked(values, all, w), ewa(values, w));
}

TEST(EwaMasked, IgnoresMaskedPositionsButKeepsAnchor) {
  // Window (x, 2, x, 4) with only the 2 and 4 live; weights stay anchored at
  // the last position: w^2 for the 2, w^0 for the 4.
  const std::vector<double> values{99.0, 2.0, 99.0, 4.0};
  const std::vector<bool> mask{false, true, false, true};
  const double expected = (0.25 * 2.0 + 1.0 * 4.0) / (0.25 + 1.0);
  EXPECT_NEAR(ewaMasked(values, mask, 0.5), expected, 1e-12);
}

TEST(EwaMasked, EmptySupportThrows) {
  const std::vector<double> values{1.0, 2.0};
  const std::vector<bool> mask{false, false};
  EXPECT_THROW(ewaMasked(values, mask, 0.5), std::invalid_argument);
}
