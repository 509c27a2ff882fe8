#pragma once

// Independent test oracles. Each one re-derives its module's answer through a
// deliberately different route (plain group-by maps, direct formula
// transcription, bisection against feasibility) so agreement is evidence, not
// tautology. Nothing here may call into the implementation being checked.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "surveil/aggregate.hpp"
#include "surveil/kpi_series.hpp"
#include "surveil/migration.hpp"
#include "surveil/offsets.hpp"
#include "surveil/records.hpp"
#include "surveil/viewpoint.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Brute-force group-by aggregation

struct GroupCell {
  double cost = 0.0;
  double quantity = 0.0;
  double cost_sq = 0.0;
  std::size_t claims = 0;
  std::set<std::string> claimants;
  std::set<std::string> episodes;
  std::size_t episodes_without_id = 0;
};

struct GroupedSeries {
  std::map<int, GroupCell> by_period;
};

inline std::string levelValueOracle(const surveil::ClaimRecord& rec, const std::string& dim) {
  if (dim == "condition") return rec.condition.empty() ? surveil::kUnclassified : rec.condition;
  if (dim == "claim_type") return surveil::toString(rec.claim_type);
  const std::string* v = rec.attribute(dim);
  return (v == nullptr || v->empty()) ? surveil::kUnclassified : *v;
}

/// Straight group-by over materialized vectors with string-set distinct
/// counts; mirrors the aggregation contract without sharing its code.
inline std::map<surveil::ViewpointKey, GroupedSeries> groupByOracle(
    const std::vector<surveil::ClaimRecord>& claims,
    const std::vector<surveil::ViewpointSpec>& specs) {
  std::map<surveil::ViewpointKey, GroupedSeries> out;
  for (const auto& rec : claims) {
    for (const auto& spec : specs) {
      for (std::size_t depth = 0; depth <= spec.levels.size(); ++depth) {
        surveil::ViewpointKey key{spec.name, {}};
        for (std::size_t d = 0; d < depth; ++d)
          key.path.emplace_back(spec.levels[d], levelValueOracle(rec, spec.levels[d]));
        GroupCell& cell = out[key].by_period[rec.period];
        cell.cost += rec.cost;
        cell.quantity += rec.quantity;
        cell.cost_sq += rec.cost * rec.cost;
        cell.claims += 1;
        cell.claimants.insert(rec.enrollee_id);
        if (rec.episode_id.empty())
          cell.episodes_without_id += 1;
        else
          cell.episodes.insert(rec.episode_id);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct transcription of the multi-factor impact formulas

struct DecompositionOracleResult {
  double parent_impact = 0.0;
  std::vector<double> preliminary;
  std::vector<double> adjusted;
};

/// EWA by the closed normalization (1-w)/(1-w^n); the implementation sums the
/// weights instead, so round-off paths differ.
inline double ewaFormulaOracle(const std::vector<double>& values, double w) {
  const std::size_t n = values.size();
  if (w == 1.0) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(n);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::pow(w, static_cast<double>(n - 1 - i)) * values[i];
  return (1.0 - w) / (1.0 - std::pow(w, static_cast<double>(n))) * acc;
}

/// factors_old/new are per-factor windows: factor f at positions t-T and t for
/// each window index. Evaluates c_i, J_i, delta, and the proportional
/// adjustment exactly as displayed, one loop per quantity.
inline DecompositionOracleResult decompositionOracle(
    const std::vector<std::vector<double>>& factors_old,
    const std::vector<std::vector<double>>& factors_new, double w) {
  const std::size_t m = factors_old.size();
  const std::size_t n = factors_old.front().size();
  std::vector<double> target_change(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double prod_new = 1.0;
    double prod_old = 1.0;
    for (std::size_t f = 0; f < m; ++f) {
      prod_new *= factors_new[f][t];
      prod_old *= factors_old[f][t];
    }
    target_change[t] = prod_new - prod_old;
  }
  DecompositionOracleResult out;
  out.parent_impact = ewaFormulaOracle(target_change, w);
  out.preliminary.resize(m);
  for (std::size_t f = 0; f < m; ++f) {
    std::vector<double> term(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      double held = 1.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != f) held *= factors_old[j][t];
      term[t] = (factors_new[f][t] - factors_old[f][t]) * held;
    }
    out.preliminary[f] = ewaFormulaOracle(term, w);
  }
  double j_sum = 0.0;
  double abs_sum = 0.0;
  for (double j : out.preliminary) {
    j_sum += j;
    abs_sum += std::abs(j);
  }
  const double delta = j_sum - out.parent_impact;
  out.adjusted.resize(m);
  for (std::size_t f = 0; f < m; ++f) {
    if (abs_sum > 0.0)
      out.adjusted[f] = out.preliminary[f] - delta * std::abs(out.preliminary[f]) / abs_sum;
    else
      out.adjusted[f] = out.preliminary[f] - delta / static_cast<double>(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Migration by bisection against explicit feasibility

/// Flows implied by the proportional-allocation rules at a candidate volume.
inline surveil::MigrationResult migrationAtVolume(const surveil::OffsetNetwork& net, double p_m) {
  const std::size_t n_orig = net.originators.size();
  const std::size_t n_recv = net.receivers.size();
  double total_out = 0.0;
  for (double o : net.outflow_capacity) total_out += o;
  surveil::MigrationResult r;
  r.total_migration = p_m;
  r.outflow.assign(n_orig, 0.0);
  r.inflow.assign(n_recv, 0.0);
  r.flow.assign(n_orig, std::vector<double>(n_recv, 0.0));
  for (std::size_t i = 0; i < n_orig; ++i) {
    r.outflow[i] = p_m * net.outflow_capacity[i] / total_out;
    double reachable = 0.0;
    for (std::size_t j : net.adjacency[i]) reachable += net.inflow_capacity[j];
    for (std::size_t j : net.adjacency[i]) {
      const double f = r.outflow[i] * net.inflow_capacity[j] / reachable;
      r.flow[i][j] = f;
      r.inflow[j] += f;
    }
  }
  return r;
}

inline bool migrationFeasible(const surveil::OffsetNetwork& net, double p_m) {
  double total_out = 0.0;
  for (double o : net.outflow_capacity) total_out += o;
  if (p_m > total_out * (1.0 + 1e-12)) return false;
  const surveil::MigrationResult r = migrationAtVolume(net, p_m);
  for (std::size_t j = 0; j < net.receivers.size(); ++j)
    if (r.inflow[j] > net.inflow_capacity[j] * (1.0 + 1e-12) + 1e-15) return false;
  return true;
}

/// Bisection on the migrated volume against the explicit feasibility check;
/// no closed form anywhere. Small networks only.
inline surveil::MigrationResult migrationOracle(const surveil::OffsetNetwork& net) {
  net.validate();
  double total_out = 0.0;
  for (double o : net.outflow_capacity) total_out += o;
  double lo = 0.0;
  double hi = total_out;
  if (migrationFeasible(net, hi)) return migrationAtVolume(net, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (migrationFeasible(net, mid))
      lo = mid;
    else
      hi = mid;
  }
  return migrationAtVolume(net, lo);
}

// ---------------------------------------------------------------------------
// Random network fixtures

inline surveil::ViewpointKey treatmentKey(const std::string& name) {
  return surveil::ViewpointKey{"drugs", {{"product_name", name}}};
}

/// Random bipartite network with I,J <= 6; every originator keeps at least
/// one receiver. complete = true forces full adjacency.
inline surveil::OffsetNetwork randomNetwork(std::mt19937_64& rng, bool complete) {
  std::uniform_int_distribution<int> size_draw(1, 6);
  std::uniform_real_distribution<double> cap_draw(0.1, 50.0);
  std::bernoulli_distribution edge_draw(0.6);
  const int n_orig = size_draw(rng);
  const int n_recv = size_draw(rng);
  surveil::OffsetNetwork net;
  net.group_id = "random";
  for (int i = 0; i < n_orig; ++i) {
    net.originators.push_back(treatmentKey("O" + std::to_string(i)));
    net.outflow_capacity.push_back(cap_draw(rng));
  }
  for (int j = 0; j < n_recv; ++j) {
    net.receivers.push_back(treatmentKey("R" + std::to_string(j)));
    net.inflow_capacity.push_back(cap_draw(rng));
  }
  for (int i = 0; i < n_orig; ++i) {
    std::vector<std::size_t> allowed;
    for (int j = 0; j < n_recv; ++j)
      if (complete || edge_draw(rng)) allowed.push_back(static_cast<std::size_t>(j));
    if (allowed.empty())
      allowed.push_back(static_cast<std::size_t>(
          std::uniform_int_distribution<int>(0, n_recv - 1)(rng)));
    net.adjacency.push_back(std::move(allowed));
  }
  return net;
}

}  // namespace oracles
