#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "surveil/offsets.hpp"

namespace surveil {

/// Proportional-allocation migration solution over an offsetting network.
/// Row sums of `flow` are the outflows, column sums the inflows, and both add
/// up to total_migration.
struct MigrationResult {
  double total_migration = 0.0;  // P_m, service units
  std::vector<double> outflow;   // o_m,i
  std::vector<double> inflow;    // r_m,j
  std::vector<std::vector<double>> flow;  // originator x receiver, 0 off-adjacency
};

/// Maximizes the migrated volume subject to the proportional-allocation
/// rules and the observed capacities:
///   - outflows split the total in proportion to the observed decreases:
///     o_m,i = P_m * o_i / sum(o);
///   - each originator spreads its outflow over its receivers in proportion
///     to their observed increases: f(i->j) = o_m,i * r_j / W(i) with
///     W(i) = sum of r_j over the originator's receivers;
///   - inflows are the received totals: r_m,j = sum_i f(i->j).
/// Under those rules every inflow is linear in P_m, so the largest feasible
/// volume is
///   P_m = min( sum(o), min_j 1 / sum_{i: j in R(O_i)} o_i / (W(i) sum(o)) )
/// taking the minimum over receivers that are reachable at all.
inline MigrationResult solveMigration(const OffsetNetwork& net) {
  net.validate();
  const std::size_t n_orig = net.originators.size();
  const std::size_t n_recv = net.receivers.size();
  double total_out = 0.0;
  for (double o : net.outflow_capacity) total_out += o;
  std::vector<double> reachable_weight(n_orig, 0.0);  // W(i)
  for (std::size_t i = 0; i < n_orig; ++i)
    for (std::size_t j : net.adjacency[i]) reachable_weight[i] += net.inflow_capacity[j];

  std::vector<double> inflow_pressure(n_recv, 0.0);  // r_m,j / (P_m * r_j)
  for (std::size_t i = 0; i < n_orig; ++i)
    for (std::size_t j : net.adjacency[i])
      inflow_pressure[j] += net.outflow_capacity[i] / (reachable_weight[i] * total_out);

  double p_m = total_out;
  for (std::size_t j = 0; j < n_recv; ++j)
    if (inflow_pressure[j] > 0.0) p_m = std::min(p_m, 1.0 / inflow_pressure[j]);

  MigrationResult out;
  out.total_migration = p_m;
  out.outflow.assign(n_orig, 0.0);
  out.inflow.assign(n_recv, 0.0);
  out.flow.assign(n_orig, std::vector<double>(n_recv, 0.0));
  for (std::size_t i = 0; i < n_orig; ++i) {
    out.outflow[i] = p_m * net.outflow_capacity[i] / total_out;
    for (std::size_t j : net.adjacency[i]) {
      const double f = out.outflow[i] * net.inflow_capacity[j] / reachable_weight[i];
      out.flow[i][j] = f;
      out.inflow[j] += f;
    }
  }
  return out;
}

/// Offset-adjusted utilization deltas and their cost impact at held-constant
/// baseline unit costs. The network impact is
///   sum_ij f(i->j) * (unit_cost(receiver_j) - unit_cost(originator_i)) / mm,
/// negative when demand migrates toward cheaper treatments.
struct OffsetImpact {
  std::string network_id;
  double total_cost_impact = 0.0;  // currency per member per period
  std::vector<std::pair<ViewpointKey, double>> utilization_delta;  // signed service units
  std::vector<std::pair<ViewpointKey, double>> cost_delta;         // per member per period
};

inline OffsetImpact offsetCostImpact(const MigrationResult& result, const OffsetNetwork& net,
                                     const std::map<ViewpointKey, double>& unit_costs,
                                     double member_months) {
  if (!(member_months > 0.0))
    throw std::invalid_argument("offsetCostImpact: member_months must be > 0");
  auto unit_cost = [&](const ViewpointKey& key) {
    auto it = unit_costs.find(key);
    if (it == unit_costs.end())
      throw std::runtime_error("offsetCostImpact: missing unit cost for treatment " +
                               key.display());
    return it->second;
  };
  OffsetImpact out;
  out.network_id = net.group_id;
  for (std::size_t i = 0; i < net.originators.size(); ++i) {
    const double uc = unit_cost(net.originators[i]);
    out.utilization_delta.emplace_back(net.originators[i], -result.outflow[i]);
    out.cost_delta.emplace_back(net.originators[i], -result.outflow[i] * uc / member_months);
  }
  for (std::size_t j = 0; j < net.receivers.size(); ++j) {
    const double uc = unit_cost(net.receivers[j]);
    out.utilization_delta.emplace_back(net.receivers[j], result.inflow[j]);
    out.cost_delta.emplace_back(net.receivers[j], result.inflow[j] * uc / member_months);
  }
  for (std::size_t i = 0; i < net.originators.size(); ++i)
    for (std::size_t j : net.adjacency[i])
      out.total_cost_impact +=
          result.flow[i][j] * (unit_cost(net.receivers[j]) - unit_cost(net.originators[i]));
  out.total_cost_impact /= member_months;
  return out;
}

}  // namespace surveil
