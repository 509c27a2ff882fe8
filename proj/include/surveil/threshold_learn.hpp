#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveil/cusum.hpp"
#include "surveil/null_model.hpp"
#include "surveil/rng.hpp"

namespace surveil {

struct ThresholdGrid {
  double start = 0.0;
  double stop = 30.0;
  double step = 0.25;

  std::vector<double> values() const {
    if (!(step > 0.0) || stop < start)
      throw std::invalid_argument("threshold grid: need step > 0 and stop >= start");
    std::vector<double> out;
    for (int i = 0;; ++i) {
      const double h = start + step * i;
      if (h > stop + step * 0.5) break;
      out.push_back(h);
    }
    return out;
  }
};

namespace detail {

/// Per-simulation decision statistic: the largest value a symmetric per-tier
/// threshold h is compared against under the reporting rule. A series is
/// flagged at threshold h iff stat >= h.
inline double cusumDecisionStat(std::span<const double> x, double k, ReportingRule reporting) {
  double su = 0.0;
  double sd = 0.0;
  double stat = 0.0;
  for (double v : x) {
    su = std::max(0.0, su + v - k);
    sd = std::max(0.0, sd - v - k);
    if (reporting == ReportingRule::any_time) stat = std::max({stat, su, sd});
  }
  if (reporting == ReportingRule::end_of_window) stat = std::max(su, sd);
  return stat;
}

}  // namespace detail

/// Simulation statistics reusable across trial thresholds: one null draw per
/// counter-derived seed, reduced to its decision statistic. Each simulation's
/// seed depends only on (seed, index), so a parallel fan-out reproduces the
/// sequential batch bit for bit.
inline std::vector<double> simulateNullStats(const NullModelSpec& null_model, double k,
                                             std::size_t n_sims, ReportingRule reporting,
                                             std::uint64_t seed) {
  null_model.validate();
  std::vector<double> stats(n_sims);
  for (std::size_t i = 0; i < n_sims; ++i) {
    const std::vector<double> x = simulateNullSeries(null_model, deriveSeed(seed, i));
    stats[i] = detail::cusumDecisionStat(x, k, reporting);
  }
  return stats;
}

inline double empiricalFar(const std::vector<double>& sorted_stats, double h) {
  const auto it = std::lower_bound(sorted_stats.begin(), sorted_stats.end(), h);
  return static_cast<double>(sorted_stats.end() - it) / static_cast<double>(sorted_stats.size());
}

/// Monte Carlo threshold calibration. For every grid value h the false alarm
/// rate is the fraction of null simulations whose CUSUM crosses h (either
/// direction, non-restarting); each tier takes the grid value whose empirical
/// rate is closest to that tier's target, then running maxima enforce tier
/// monotonicity. Up and down share one symmetric threshold per tier.
inline ThresholdSet learnThresholds(const NullModelSpec& null_model, double k,
                                    const std::array<double, kTierCount>& target_far,
                                    std::size_t n_sims, const std::vector<double>& grid,
                                    ReportingRule reporting, std::uint64_t seed) {
  if (n_sims < 1000)
    throw std::invalid_argument("learnThresholds: need at least 1000 simulations");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("learnThresholds: grid must be non-empty and ascending");
  for (std::size_t i = 0; i < kTierCount; ++i) {
    if (!(target_far[i] > 0.0) || target_far[i] > 1.0)
      throw std::invalid_argument("learnThresholds: targets must lie in (0,1]");
    if (i > 0 && !(target_far[i] < target_far[i - 1]))
      throw std::invalid_argument("learnThresholds: targets must decrease across tiers");
  }
  std::vector<double> stats = simulateNullStats(null_model, k, n_sims, reporting, seed);
  std::sort(stats.begin(), stats.end());

  ThresholdSet out;
  out.target_far = target_far;
  out.drift_k = k;
  for (std::size_t tier = 0; tier < kTierCount; ++tier) {
    const double target = target_far[tier];
    if (empiricalFar(stats, grid.back()) > target)
      throw std::runtime_error(std::string("learnThresholds: grid cannot bracket target for tier ") +
                               toString(static_cast<Tier>(tier)));
    double best_h = grid.front();
    double best_gap = std::abs(empiricalFar(stats, grid.front()) - target);
    for (double h : grid) {
      const double gap = std::abs(empiricalFar(stats, h) - target);
      if (gap < best_gap) {
        best_gap = gap;
        best_h = h;
      }
    }
    out.tiers[tier] = TierThresholds{best_h, best_h};
  }
  for (std::size_t tier = 1; tier < kTierCount; ++tier) {
    out.tiers[tier].h_up = std::max(out.tiers[tier].h_up, out.tiers[tier - 1].h_up);
    out.tiers[tier].h_down = std::max(out.tiers[tier].h_down, out.tiers[tier - 1].h_down);
  }
  return out;
}

}  // namespace surveil
