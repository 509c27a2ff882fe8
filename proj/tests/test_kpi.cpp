#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "surveil/kpi_series.hpp"

namespace {

using surveil::KpiSeries;
using surveil::RatioKind;
using surveil::RatioSeries;

KpiSeries makeSeries(std::size_t periods) {
  KpiSeries s;
  s.horizon = {0, static_cast<int>(periods) - 1};
  s.total_cost.assign(periods, 0.0);
  s.quantity.assign(periods, 0.0);
  s.n_episodes.assign(periods, 0.0);
  s.n_enrollees.assign(periods, 0.0);
  s.n_patients.assign(periods, 0.0);
  s.n_claimants.assign(periods, 0.0);
  s.n_claims.assign(periods, 0.0);
  s.cost_sq_sum.assign(periods, 0.0);
  return s;
}

TEST(DeriveRatio, PriceUseCostIdentity) {
  KpiSeries s = makeSeries(1);
  s.total_cost[0] = 100.0;
  s.quantity[0] = 4.0;
  s.n_enrollees[0] = 10.0;
  const RatioSeries price = deriveRatio(s, RatioKind::price);
  const RatioSeries use = deriveRatio(s, RatioKind::use);
  const RatioSeries cpe = deriveRatio(s, RatioKind::cost_per_enrollee);
  EXPECT_DOUBLE_EQ(price.value[0], 25.0);
  EXPECT_DOUBLE_EQ(use.value[0], 0.4);
  EXPECT_DOUBLE_EQ(cpe.value[0], 10.0);
  EXPECT_DOUBLE_EQ(price.value[0] * use.value[0], cpe.value[0]);
}

TEST(DeriveRatio, UseFactorIdentity) {
  KpiSeries s = makeSeries(1);
  s.quantity[0] = 4.0;
  s.n_claimants[0] = 1.0;
  s.n_patients[0] = 2.0;
  s.n_enrollees[0] = 10.0;
  const double intensity = deriveRatio(s, RatioKind::intensity).value[0];
  const double utilization = deriveRatio(s, RatioKind::utilization).value[0];
  const double prevalence = deriveRatio(s, RatioKind::prevalence).value[0];
  const double use = deriveRatio(s, RatioKind::use).value[0];
  EXPECT_DOUBLE_EQ(intensity, 4.0);
  EXPECT_DOUBLE_EQ(utilization, 0.5);
  EXPECT_DOUBLE_EQ(prevalence, 0.2);
  EXPECT_DOUBLE_EQ(intensity * utilization * prevalence, use);
  EXPECT_DOUBLE_EQ(use, 0.4);
}

TEST(DeriveRatio, ZeroDenominatorIsUndefinedNotZero) {
  KpiSeries s = makeSeries(2);
  s.quantity = {4.0, 4.0};
  s.n_claimants = {2.0, 2.0};
  s.n_patients = {0.0, 2.0};  // period 0: nobody with the condition
  s.n_enrollees = {10.0, 10.0};
  const RatioSeries utilization = deriveRatio(s, RatioKind::utilization);
  EXPECT_FALSE(utilization.defined[0]);
  EXPECT_TRUE(utilization.defined[1]);
}

TEST(DeriveRatio, RatioIdentitiesOnRandomFixtures) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> draw(1.0, 1000.0);
  for (int trial = 0; trial < 300; ++trial) {
    KpiSeries s = makeSeries(1);
    s.n_enrollees[0] = draw(rng);
    s.n_patients[0] = draw(rng);
    s.n_claimants[0] = draw(rng);
    s.quantity[0] = draw(rng);
    s.total_cost[0] = draw(rng);
    const double use = deriveRatio(s, RatioKind::use).value[0];
    const double product = deriveRatio(s, RatioKind::intensity).value[0] *
                           deriveRatio(s, RatioKind::utilization).value[0] *
                           deriveRatio(s, RatioKind::prevalence).value[0];
    EXPECT_NEAR(use, product, 1e-9 * std::abs(use));
    const double cpe = deriveRatio(s, RatioKind::cost_per_enrollee).value[0];
    const double price_use =
        deriveRatio(s, RatioKind::price).value[0] * deriveRatio(s, RatioKind::use).value[0];
    EXPECT_NEAR(cpe, price_use, 1e-9 * std::abs(cpe));
  }
}

TEST(DeriveRatio, PoissonStandardErrors) {
  KpiSeries s = makeSeries(1);
  s.quantity[0] = 400.0;
  s.n_enrollees[0] = 1000.0;
  s.n_claimants[0] = 100.0;
  s.n_patients[0] = 200.0;
  EXPECT_DOUBLE_EQ(deriveRatio(s, RatioKind::use).se[0], 20.0 / 1000.0);
  EXPECT_DOUBLE_EQ(deriveRatio(s, RatioKind::utilization).se[0], 10.0 / 200.0);
  EXPECT_DOUBLE_EQ(deriveRatio(s, RatioKind::prevalence).se[0],
                   std::sqrt(200.0) / 1000.0);
}

TEST(DeriveRatio, CostStandardErrorsPropagateSquaredClaims) {
  KpiSeries s = makeSeries(1);
  // Three claims of cost 3, 4, 12: total 19, sum of squares 169.
  s.total_cost[0] = 19.0;
  s.cost_sq_sum[0] = 169.0;
  s.n_claims[0] = 3.0;
  s.n_enrollees[0] = 100.0;
  s.quantity[0] = 10.0;
  EXPECT_DOUBLE_EQ(deriveRatio(s, RatioKind::cost_per_enrollee).se[0], 13.0 / 100.0);
  EXPECT_DOUBLE_EQ(deriveRatio(s, RatioKind::price).se[0], 13.0 / 10.0);
}

}  // namespace
