#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveil/records.hpp"
#include "surveil/viewpoint.hpp"

namespace surveil {

enum class RatioKind {
  cost_per_enrollee,  // s(t) = total_cost / n_enrollees
  price,              // a(t) = total_cost / quantity
  use,                // e(t) = quantity / n_enrollees
  intensity,          //        quantity / n_claimants
  utilization,        //        n_claimants / n_patients
  prevalence,         //        n_patients / n_enrollees
};

inline constexpr RatioKind kAllRatios[] = {
    RatioKind::cost_per_enrollee, RatioKind::price,       RatioKind::use,
    RatioKind::intensity,         RatioKind::utilization, RatioKind::prevalence};

inline const char* toString(RatioKind k) {
  switch (k) {
    case RatioKind::cost_per_enrollee: return "cost_per_enrollee";
    case RatioKind::price: return "price";
    case RatioKind::use: return "use";
    case RatioKind::intensity: return "intensity";
    case RatioKind::utilization: return "utilization";
    case RatioKind::prevalence: return "prevalence";
  }
  return "?";
}

inline RatioKind ratioKindFromString(const std::string& s) {
  for (RatioKind k : kAllRatios)
    if (s == toString(k)) return k;
  throw InputError("unknown ratio kind: '" + s + "'");
}

/// Per-period (value, standard error) vector with an explicit defined mask.
/// A zero denominator leaves the period undefined rather than zero.
struct RatioSeries {
  RatioKind kind = RatioKind::cost_per_enrollee;
  std::vector<double> value;
  std::vector<double> se;
  std::vector<bool> defined;

  std::size_t size() const { return value.size(); }
  int lastPeriod() const { return static_cast<int>(value.size()) - 1; }
};

/// The six base measures for one viewpoint node over t = 0..P (index =
/// period - horizon.start). n_enrollees is the member-month-weighted
/// population denominator, identical across keys. cost_sq_sum and n_claims
/// back the cost-ratio standard errors.
struct KpiSeries {
  ViewpointKey key;
  PeriodRange horizon;
  std::vector<double> total_cost;
  std::vector<double> quantity;
  std::vector<double> n_episodes;
  std::vector<double> n_enrollees;
  std::vector<double> n_patients;
  std::vector<double> n_claimants;
  std::vector<double> n_claims;
  std::vector<double> cost_sq_sum;

  std::size_t periods() const { return total_cost.size(); }
};

namespace detail {

inline void pushRatioPoint(RatioSeries& out, double num, double denom, double se_num) {
  if (denom > 0.0) {
    out.value.push_back(num / denom);
    out.se.push_back(se_num / denom);
    out.defined.push_back(true);
  } else {
    out.value.push_back(0.0);
    out.se.push_back(0.0);
    out.defined.push_back(false);
  }
}

}  // namespace detail

/// Derives one of the six KPI ratios with per-period standard errors.
///
/// Count-backed ratios get the Poisson approximation SE(count/denom) =
/// sqrt(count)/denom. Cost-backed ratios propagate the compound variation of
/// the period's claim total: SE = sqrt(sum of squared per-claim costs)/denom,
/// which accounts for the claim count itself being random (the per-claim
/// sample-sd route understates the total's variance and miscalibrates
/// downstream change rates).
inline RatioSeries deriveRatio(const KpiSeries& s, RatioKind kind) {
  RatioSeries out;
  out.kind = kind;
  const std::size_t n = s.periods();
  out.value.reserve(n);
  out.se.reserve(n);
  out.defined.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double cost_se = std::sqrt(std::max(0.0, s.cost_sq_sum[t]));
    switch (kind) {
      case RatioKind::cost_per_enrollee:
        detail::pushRatioPoint(out, s.total_cost[t], s.n_enrollees[t], cost_se);
        break;
      case RatioKind::price:
        detail::pushRatioPoint(out, s.total_cost[t], s.quantity[t], cost_se);
        break;
      case RatioKind::use:
        detail::pushRatioPoint(out, s.quantity[t], s.n_enrollees[t],
                               std::sqrt(std::max(0.0, s.quantity[t])));
        break;
      case RatioKind::intensity:
        detail::pushRatioPoint(out, s.quantity[t], s.n_claimants[t],
                               std::sqrt(std::max(0.0, s.quantity[t])));
        break;
      case RatioKind::utilization:
        detail::pushRatioPoint(out, s.n_claimants[t], s.n_patients[t],
                               std::sqrt(std::max(0.0, s.n_claimants[t])));
        break;
      case RatioKind::prevalence:
        detail::pushRatioPoint(out, s.n_patients[t], s.n_enrollees[t],
                               std::sqrt(std::max(0.0, s.n_patients[t])));
        break;
    }
  }
  return out;
}

}  // namespace surveil
