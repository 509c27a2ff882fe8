#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveil/records.hpp"

namespace surveil {

enum class CusumMode { auto_reset, non_restarting };
enum class ReportingRule { any_time, end_of_window };
enum class Direction { up, down, none, mixed };
enum class Confidence { N, M, S, VS };

inline const char* toString(Direction d) {
  switch (d) {
    case Direction::up: return "up";
    case Direction::down: return "down";
    case Direction::none: return "none";
    case Direction::mixed: return "mixed";
  }
  return "?";
}

inline const char* toString(Confidence c) {
  switch (c) {
    case Confidence::N: return "N";
    case Confidence::M: return "M";
    case Confidence::S: return "S";
    case Confidence::VS: return "VS";
  }
  return "?";
}

inline Direction directionFromString(const std::string& s) {
  if (s == "up") return Direction::up;
  if (s == "down") return Direction::down;
  if (s == "none") return Direction::none;
  if (s == "mixed") return Direction::mixed;
  throw InputError("unknown direction: '" + s + "'");
}

inline Confidence confidenceFromString(const std::string& s) {
  if (s == "N") return Confidence::N;
  if (s == "M") return Confidence::M;
  if (s == "S") return Confidence::S;
  if (s == "VS") return Confidence::VS;
  throw InputError("unknown confidence tier: '" + s + "'");
}

inline CusumMode cusumModeFromString(const std::string& s) {
  if (s == "auto_reset") return CusumMode::auto_reset;
  if (s == "non_restarting") return CusumMode::non_restarting;
  throw InputError("unknown cusum mode: '" + s + "'");
}

inline ReportingRule reportingRuleFromString(const std::string& s) {
  if (s == "any_time") return ReportingRule::any_time;
  if (s == "end_of_window") return ReportingRule::end_of_window;
  throw InputError("unknown reporting rule: '" + s + "'");
}

/// Confidence tiers above N, weakest first.
enum class Tier : std::size_t { moderate = 0, strong = 1, very_strong = 2 };
inline constexpr std::size_t kTierCount = 3;

inline const char* toString(Tier t) {
  switch (t) {
    case Tier::moderate: return "moderate";
    case Tier::strong: return "strong";
    case Tier::very_strong: return "very_strong";
  }
  return "?";
}

struct TierThresholds {
  double h_up = 0.0;
  double h_down = 0.0;
};

/// Per-tier detection thresholds (SE units) plus the CUSUM reference value k.
/// h must be non-decreasing across tiers and target false-alarm rates
/// strictly decreasing; learnThresholds enforces the former by running maxima.
struct ThresholdSet {
  std::array<TierThresholds, kTierCount> tiers{};
  std::array<double, kTierCount> target_far{0.10, 0.05, 0.01};
  double drift_k = 0.5;

  const TierThresholds& at(Tier t) const { return tiers[static_cast<std::size_t>(t)]; }
  TierThresholds& at(Tier t) { return tiers[static_cast<std::size_t>(t)]; }
  double target(Tier t) const { return target_far[static_cast<std::size_t>(t)]; }

  void validate() const {
    for (std::size_t i = 0; i < kTierCount; ++i) {
      if (!(tiers[i].h_up >= 0.0) || !(tiers[i].h_down >= 0.0))
        throw std::invalid_argument("thresholds must be non-negative");
      if (i > 0 && (tiers[i].h_up < tiers[i - 1].h_up || tiers[i].h_down < tiers[i - 1].h_down))
        throw std::invalid_argument("thresholds must be non-decreasing across tiers");
      if (i > 0 && !(target_far[i] < target_far[i - 1]))
        throw std::invalid_argument("tier false-alarm targets must be strictly decreasing");
    }
    if (drift_k < 0.0) throw std::invalid_argument("drift k must be non-negative");
  }
};

/// Outcome of one CUSUM pass. Trajectories hold one value per update; in
/// auto_reset mode an entry is the pre-reset (crossing) value when the tier-VS
/// threshold fired at that step.
struct DetectionResult {
  std::vector<double> s_up;
  std::vector<double> s_down;
  Direction direction = Direction::none;
  Confidence confidence = Confidence::N;
  std::optional<int> flagged_at;  // first_period + update index of the first moderate crossing
  CusumMode mode = CusumMode::non_restarting;
  ReportingRule reporting = ReportingRule::end_of_window;

  bool flagged(Confidence min_conf = Confidence::M) const {
    return static_cast<int>(confidence) >= static_cast<int>(min_conf);
  }
};

namespace detail {

inline Confidence tierLadder(double up_stat, double down_stat, const ThresholdSet& thr,
                             bool& up_hit, bool& down_hit) {
  Confidence conf = Confidence::N;
  for (std::size_t i = 0; i < kTierCount; ++i) {
    const bool u = up_stat >= thr.tiers[i].h_up;
    const bool d = down_stat >= thr.tiers[i].h_down;
    if (u || d) conf = static_cast<Confidence>(i + 1);
    if (i == 0) {
      up_hit = u;
      down_hit = d;
    }
  }
  return conf;
}

}  // namespace detail

/// Two-sided CUSUM over normalized change rates:
///   S_up(t)   = max(0, S_up(t-1)   + x(t) - k)
///   S_down(t) = max(0, S_down(t-1) - x(t) - k)
/// with both statistics anchored at 0 before the first update.
///
/// auto_reset restarts a statistic after it crosses its tier-VS threshold so
/// later change points accumulate from scratch; non_restarting never resets
/// and reads the cumulative effect at the end of the window. any_time judges
/// the run from the running maxima (flagged_at = first moderate crossing);
/// end_of_window judges from the terminal statistics only.
inline DetectionResult runCusum(std::span<const double> x, const ThresholdSet& thresholds,
                                CusumMode mode, ReportingRule reporting, int first_period = 0) {
  thresholds.validate();
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("runCusum: non-finite input");
  DetectionResult out;
  out.mode = mode;
  out.reporting = reporting;
  out.s_up.reserve(x.size());
  out.s_down.reserve(x.size());
  const double k = thresholds.drift_k;
  const TierThresholds& vs = thresholds.at(Tier::very_strong);
  const TierThresholds& moderate = thresholds.at(Tier::moderate);
  double su = 0.0;
  double sd = 0.0;
  double max_su = 0.0;
  double max_sd = 0.0;
  std::optional<int> first_up;
  std::optional<int> first_down;
  for (std::size_t i = 0; i < x.size(); ++i) {
    su = std::max(0.0, su + x[i] - k);
    sd = std::max(0.0, sd - x[i] - k);
    out.s_up.push_back(su);
    out.s_down.push_back(sd);
    max_su = std::max(max_su, su);
    max_sd = std::max(max_sd, sd);
    if (!first_up && su >= moderate.h_up) first_up = first_period + static_cast<int>(i);
    if (!first_down && sd >= moderate.h_down) first_down = first_period + static_cast<int>(i);
    if (mode == CusumMode::auto_reset) {
      if (su >= vs.h_up) su = 0.0;
      if (sd >= vs.h_down) sd = 0.0;
    }
  }
  bool up_hit = false;
  bool down_hit = false;
  if (reporting == ReportingRule::any_time) {
    out.confidence = detail::tierLadder(max_su, max_sd, thresholds, up_hit, down_hit);
    if (first_up && first_down)
      out.flagged_at = std::min(*first_up, *first_down);
    else if (first_up || first_down)
      out.flagged_at = first_up ? first_up : first_down;
  } else {
    const double term_up = out.s_up.empty() ? 0.0 : out.s_up.back();
    const double term_down = out.s_down.empty() ? 0.0 : out.s_down.back();
    out.confidence = detail::tierLadder(term_up, term_down, thresholds, up_hit, down_hit);
    if (out.confidence != Confidence::N)
      out.flagged_at = first_period + static_cast<int>(x.size()) - 1;
  }
  if (up_hit && down_hit)
    out.direction = Direction::mixed;
  else if (up_hit)
    out.direction = Direction::up;
  else if (down_hit)
    out.direction = Direction::down;
  else
    out.direction = Direction::none;
  return out;
}

}  // namespace surveil
