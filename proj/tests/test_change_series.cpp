#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "surveil/change_series.hpp"

namespace {

using surveil::buildChangeSeries;
using surveil::ChangeSeries;
using surveil::RatioSeries;

RatioSeries series(std::vector<double> values, std::vector<double> ses) {
  RatioSeries out;
  out.kind = surveil::RatioKind::cost_per_enrollee;
  out.value = std::move(values);
  out.se = std::move(ses);
  out.defined.assign(out.value.size(), true);
  return out;
}

TEST(ChangeSeries, ConstantSeriesHasZeroChanges) {
  const RatioSeries s = series(std::vector<double>(8, 7.0), std::vector<double>(8, 1.0));
  for (int lag : {1, 3}) {
    const ChangeSeries cs = buildChangeSeries(s, lag, 8.0);
    for (double c : cs.c) EXPECT_DOUBLE_EQ(c, 0.0);
    for (double x : cs.x) EXPECT_DOUBLE_EQ(x, 0.0);
  }
}

TEST(ChangeSeries, WorkedThreePointFixture) {
  // s = (10, 10, 13), T = 1, SE = 1 everywhere.
  const RatioSeries s = series({10.0, 10.0, 13.0}, {1.0, 1.0, 1.0});
  const ChangeSeries cs = buildChangeSeries(s, 1, 8.0);
  ASSERT_EQ(cs.c.size(), 2u);
  EXPECT_DOUBLE_EQ(cs.c[0], 0.0);
  EXPECT_DOUBLE_EQ(cs.c[1], 3.0);
  EXPECT_DOUBLE_EQ(cs.se_c[1], std::sqrt(2.0));
  EXPECT_NEAR(cs.x[1], 3.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cs.x[1], 2.1213, 5e-5);
  ASSERT_EQ(cs.updates().size(), 1u);
  EXPECT_DOUBLE_EQ(cs.updates()[0], cs.x[1]);
}

TEST(ChangeSeries, SelfCensoringClampsAtCap) {
  // A 12-SE jump clamps to the 8-SE cap, and to -8 on the way down.
  const std::vector<double> ses(3, std::sqrt(0.5));
  const RatioSeries up = series({0.0, 0.0, 12.0}, ses);
  EXPECT_DOUBLE_EQ(buildChangeSeries(up, 1, 8.0).x.back(), 8.0);
  const RatioSeries down = series({12.0, 12.0, 0.0}, ses);
  EXPECT_DOUBLE_EQ(buildChangeSeries(down, 1, 8.0).x.back(), -8.0);
}

TEST(ChangeSeries, ZeroSeTakesSignedCap) {
  const RatioSeries s = series({1.0, 1.0, 5.0}, {0.0, 0.0, 0.0});
  const ChangeSeries cs = buildChangeSeries(s, 1, 6.0);
  EXPECT_DOUBLE_EQ(cs.x[0], 0.0);  // no change at t = T, zero SE
  EXPECT_DOUBLE_EQ(cs.x[1], 6.0);
}

TEST(ChangeSeries, UndefinedPeriodsImputedAsZero) {
  RatioSeries s = series({10.0, 11.0, 10.5, 12.0}, {1.0, 1.0, 1.0, 1.0});
  s.defined[1] = false;
  const ChangeSeries cs = buildChangeSeries(s, 1, 8.0);
  // c(1) and c(2) both touch the undefined period.
  EXPECT_TRUE(cs.imputed[0]);
  EXPECT_TRUE(cs.imputed[1]);
  EXPECT_FALSE(cs.imputed[2]);
  EXPECT_DOUBLE_EQ(cs.x[0], 0.0);
  EXPECT_DOUBLE_EQ(cs.x[1], 0.0);
}

TEST(ChangeSeries, WindowTooShortThrows) {
  const RatioSeries s = series({1.0, 2.0}, {1.0, 1.0});
  EXPECT_THROW(buildChangeSeries(s, 1, 8.0), std::invalid_argument);  // P == T
  EXPECT_THROW(buildChangeSeries(s, 5, 8.0), std::invalid_argument);
}

TEST(ChangeSeries, AllUndefinedThrows) {
  RatioSeries s = series({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
  s.defined.assign(3, false);
  EXPECT_THROW(buildChangeSeries(s, 1, 8.0), std::invalid_argument);
}

TEST(ChangeSeries, NonPositiveCapThrows) {
  const RatioSeries s = series({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
  EXPECT_THROW(buildChangeSeries(s, 1, 0.0), std::invalid_argument);
}

}  // namespace
