#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "surveil/kpi_series.hpp"
#include "surveil/records.hpp"
#include "surveil/rng.hpp"
#include "surveil/viewpoint.hpp"

namespace surveil {

using Panel = std::map<ViewpointKey, KpiSeries>;

struct AggregateStats {
  std::uint64_t claims_seen = 0;
  std::uint64_t claims_rejected = 0;  // unknown-dimension records
  std::uint64_t enrollment_rows = 0;
};

struct AggregateResult {
  Panel panel;
  std::vector<double> population_member_months;  // per period over horizon
  PeriodRange horizon;
  AggregateStats stats;
};

/// Streaming rollup of claims into per-viewpoint KPI series.
///
/// Feed enrollment and claims in any order, then call finish() once. The
/// result is identical to a sequential single pass; partitioned use just
/// needs per-partition Aggregators merged upstream of finish().
///
/// Distinct enrollee/episode counts are tracked through 64-bit FNV hashes of
/// the opaque ids rather than interned strings.
class Aggregator {
 public:
  Aggregator(std::vector<ViewpointSpec> specs, PeriodRange horizon)
      : specs_(std::move(specs)), horizon_(horizon) {
    if (horizon_.end < horizon_.start)
      throw std::invalid_argument("aggregate: empty horizon");
    for (const auto& spec : specs_) {
      spec.validate();
      for (const auto& dim : spec.levels) registry_.insert(dim);
    }
    population_mm_.assign(static_cast<std::size_t>(horizon_.length()), 0.0);
  }

  void addEnrollment(const EnrollmentRecord& e) {
    if (!horizon_.contains(e.period))
      throw InputError("enrollment period " + std::to_string(e.period) + " outside horizon");
    if (!(e.member_months > 0.0) || e.member_months > 1.0)
      throw InputError("member_months out of (0,1] for enrollee '" + e.enrollee_id + "'");
    const std::uint64_t pair_hash =
        splitmix64(fnv1a64(e.enrollee_id) ^ splitmix64(static_cast<std::uint64_t>(e.period)));
    if (!enrollment_seen_.insert(pair_hash).second)
      throw InputError("duplicate enrollment row for enrollee '" + e.enrollee_id +
                       "' period " + std::to_string(e.period));
    population_mm_[index(e.period)] += e.member_months;
    ++stats_.enrollment_rows;
  }

  /// Returns false when the record was rejected (unknown dimension name);
  /// rejections are counted, not fatal.
  bool addClaim(const ClaimRecord& c) {
    ++stats_.claims_seen;
    if (!horizon_.contains(c.period))
      throw InputError("claim period " + std::to_string(c.period) + " outside horizon");
    if (c.quantity < 0.0) throw InputError("negative quantity for enrollee '" + c.enrollee_id + "'");
    for (const auto& [dim, code] : c.attributes) {
      if (!code.empty() && !registry_.contains(dim)) {
        ++stats_.claims_rejected;
        return false;
      }
    }
    const std::size_t t = index(c.period);
    const std::uint64_t enrollee_hash = fnv1a64(c.enrollee_id);
    const std::uint64_t episode_hash = c.episode_id.empty() ? 0 : fnv1a64(c.episode_id);
    for (const auto& spec : specs_) {
      ViewpointKey key{spec.name, {}};
      key.path.reserve(spec.levels.size());
      touch(key, t, c, enrollee_hash, episode_hash);  // spec root
      for (const auto& dim : spec.levels) {
        key.path.emplace_back(dim, levelValue(c, dim));
        touch(key, t, c, enrollee_hash, episode_hash);
      }
    }
    return true;
  }

  AggregateResult finish() {
    AggregateResult out;
    out.horizon = horizon_;
    out.stats = stats_;
    out.population_member_months = population_mm_;
    const std::size_t n = population_mm_.size();
    for (auto& [key, acc] : cells_) {
      KpiSeries s;
      s.key = key;
      s.horizon = horizon_;
      s.total_cost.assign(n, 0.0);
      s.quantity.assign(n, 0.0);
      s.n_episodes.assign(n, 0.0);
      s.n_enrollees = population_mm_;
      s.n_patients.assign(n, 0.0);
      s.n_claimants.assign(n, 0.0);
      s.n_claims.assign(n, 0.0);
      s.cost_sq_sum.assign(n, 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        Cell& cell = acc[t];
        s.total_cost[t] = cell.cost;
        s.quantity[t] = cell.quantity;
        s.n_claims[t] = static_cast<double>(cell.claims);
        s.cost_sq_sum[t] = cell.cost_sq;
        s.n_claimants[t] = static_cast<double>(distinctCount(cell.claimants));
        s.n_episodes[t] =
            static_cast<double>(distinctCount(cell.episodes) + cell.episodes_no_id);
        cell.claimants.clear();
        cell.claimants.shrink_to_fit();
        cell.episodes.clear();
        cell.episodes.shrink_to_fit();
      }
      out.panel.emplace(key, std::move(s));
    }
    cells_.clear();
    // n_patients: claimants at the key's condition prefix; the prefix is
    // itself a monitored key, so resolve it by lookup. Keys without a
    // condition level use their own claimant counts (utilization == 1).
    for (auto& [key, series] : out.panel) {
      auto prefix = key.conditionPrefix();
      if (prefix.has_value() && !(*prefix == key)) {
        auto it = out.panel.find(*prefix);
        if (it != out.panel.end()) {
          series.n_patients = it->second.n_claimants;
          continue;
        }
      }
      series.n_patients = series.n_claimants;
    }
    return out;
  }

 private:
  struct Cell {
    double cost = 0.0;
    double quantity = 0.0;
    double cost_sq = 0.0;
    std::uint32_t claims = 0;
    std::uint32_t episodes_no_id = 0;
    std::vector<std::uint64_t> claimants;  // hashed ids; sort+unique at finish
    std::vector<std::uint64_t> episodes;
  };

  std::size_t index(int period) const { return static_cast<std::size_t>(period - horizon_.start); }

  static std::size_t distinctCount(std::vector<std::uint64_t>& ids) {
    std::sort(ids.begin(), ids.end());
    return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
  }

  std::string levelValue(const ClaimRecord& c, const std::string& dim) const {
    if (dim == kDimCondition) return c.condition.empty() ? kUnclassified : c.condition;
    if (dim == kDimClaimType) return toString(c.claim_type);
    const std::string* code = c.attribute(dim);
    return (code == nullptr || code->empty()) ? kUnclassified : *code;
  }

  void touch(const ViewpointKey& key, std::size_t t, const ClaimRecord& c,
             std::uint64_t enrollee_hash, std::uint64_t episode_hash) {
    auto [it, inserted] = cells_.try_emplace(key);
    if (inserted) it->second.resize(population_mm_.size());
    Cell& cell = it->second[t];
    cell.cost += c.cost;
    cell.quantity += c.quantity;
    cell.cost_sq += c.cost * c.cost;
    cell.claims += 1;
    cell.claimants.push_back(enrollee_hash);
    if (episode_hash != 0)
      cell.episodes.push_back(episode_hash);
    else
      cell.episodes_no_id += 1;
  }

  std::vector<ViewpointSpec> specs_;
  PeriodRange horizon_;
  std::set<std::string> registry_;
  std::vector<double> population_mm_;
  std::unordered_set<std::uint64_t> enrollment_seen_;
  std::map<ViewpointKey, std::vector<Cell>> cells_;
  AggregateStats stats_;
};

/// Convenience single-shot aggregation over in-memory ranges.
template <typename Claims, typename Enrollment>
AggregateResult aggregate(const Claims& claims, const Enrollment& enrollment,
                          std::vector<ViewpointSpec> specs, PeriodRange horizon) {
  Aggregator agg(std::move(specs), horizon);
  for (const auto& e : enrollment) agg.addEnrollment(e);
  for (const auto& c : claims) agg.addClaim(c);
  return agg.finish();
}

/// Keeps the spec's keys whose baseline claimant-month exposure and cost
/// share clear the qualification thresholds (boundaries inclusive). Cost
/// shares are taken within each (spec, depth) level group over the baseline
/// window. Keys of other specs pass through untouched.
inline Panel qualify(const Panel& panel, const ViewpointSpec& spec, PeriodRange baseline) {
  std::map<std::size_t, double> level_cost;
  std::map<const ViewpointKey*, std::pair<double, double>> measured;  // exposure, cost
  for (const auto& [key, series] : panel) {
    if (key.spec_name != spec.name) continue;
    double exposure = 0.0;
    double cost = 0.0;
    for (int t = baseline.start; t <= baseline.end; ++t) {
      if (!series.horizon.contains(t)) continue;
      const std::size_t i = static_cast<std::size_t>(t - series.horizon.start);
      exposure += series.n_claimants[i];
      cost += series.total_cost[i];
    }
    level_cost[key.depth()] += cost;
    measured[&key] = {exposure, cost};
  }
  Panel out;
  for (const auto& [key, series] : panel) {
    if (key.spec_name != spec.name) {
      out.emplace(key, series);
      continue;
    }
    const auto [exposure, cost] = measured.at(&key);
    const double denom = level_cost[key.depth()];
    const double share = denom > 0.0 ? cost / denom : 0.0;
    if (exposure >= spec.qualification.min_member_months &&
        share >= spec.qualification.min_cost_share)
      out.emplace(key, series);
  }
  return out;
}

}  // namespace surveil
