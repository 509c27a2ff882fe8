#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "surveil/cusum.hpp"
#include "surveil/kpi_series.hpp"
#include "surveil/viewpoint.hpp"

namespace surveil {

/// Pattern identifying a treatment inside a KB group: every (dimension, code)
/// pair must appear on a candidate key's path.
struct KbMemberPattern {
  std::vector<std::pair<std::string, std::string>> match;

  bool matches(const ViewpointKey& key) const {
    for (const auto& [dim, code] : match) {
      const std::string* v = key.level(dim);
      if (v == nullptr || *v != code) return false;
    }
    return !match.empty();
  }
};

/// One group of clinically comparable treatments, optionally scoped to a
/// condition. Exclusions name member-index pairs with no substitution edge.
struct KbGroup {
  std::string group_id;
  std::optional<std::string> condition;
  std::vector<KbMemberPattern> members;
  std::vector<std::pair<std::size_t, std::size_t>> exclusions;
};

/// File-based stand-in for a published comparable-treatment knowledge base.
struct ComparabilityKB {
  std::string provenance;
  std::vector<KbGroup> groups;

  void validate() const {
    for (const auto& g : groups) {
      if (g.group_id.empty()) throw std::invalid_argument("KB group requires a group_id");
      if (g.members.size() < 2)
        throw std::invalid_argument("KB group '" + g.group_id + "' needs at least 2 members");
      for (const auto& [a, b] : g.exclusions)
        if (a >= g.members.size() || b >= g.members.size())
          throw std::invalid_argument("KB group '" + g.group_id + "' exclusion index out of range");
    }
  }
};

/// Detection plus the signed EWA of the use change, the inputs buildNetworks
/// needs per treatment.
struct UseSignal {
  DetectionResult detection;
  double use_change_ewa = 0.0;  // per-enrollee service units per period
};

/// Bipartite offsetting network: originators lose utilization, receivers gain
/// it, capacities are observed service-unit volumes over the window.
struct OffsetNetwork {
  std::string group_id;
  PeriodRange window{};
  std::vector<ViewpointKey> originators;
  std::vector<ViewpointKey> receivers;
  std::vector<double> outflow_capacity;            // o_i > 0
  std::vector<double> inflow_capacity;             // r_j > 0
  std::vector<std::vector<std::size_t>> adjacency;  // per originator, sorted receiver indices

  void validate() const {
    if (originators.empty() || receivers.empty())
      throw std::invalid_argument("offset network needs originators and receivers");
    if (outflow_capacity.size() != originators.size() ||
        inflow_capacity.size() != receivers.size() || adjacency.size() != originators.size())
      throw std::invalid_argument("offset network: size mismatch");
    for (double o : outflow_capacity)
      if (!(o > 0.0)) throw std::invalid_argument("offset network: outflow capacity must be > 0");
    for (double r : inflow_capacity)
      if (!(r > 0.0)) throw std::invalid_argument("offset network: inflow capacity must be > 0");
    for (const auto& receivers_of : adjacency) {
      if (receivers_of.empty())
        throw std::invalid_argument("offset network: originator without receivers");
      for (std::size_t j : receivers_of)
        if (j >= receivers.size())
          throw std::invalid_argument("offset network: adjacency index out of range");
    }
    std::set<ViewpointKey> orig(originators.begin(), originators.end());
    for (const auto& r : receivers)
      if (orig.contains(r))
        throw std::invalid_argument("offset network: originator and receiver sets overlap");
  }
};

/// Builds one offsetting network per KB group whose members moved in opposite
/// directions at >= min_confidence within the window. Capacities are
/// |EWA of the use change| x member-months, converting per-member rates into
/// service-unit volumes. Originators left without an allowed receiver after
/// exclusions are dropped; a group with no originator or no receiver yields
/// no network.
inline std::vector<OffsetNetwork> buildNetworks(
    const std::map<ViewpointKey, UseSignal>& use_signals, const ComparabilityKB& kb,
    PeriodRange window, Confidence min_confidence, double member_months) {
  kb.validate();
  if (!(member_months > 0.0))
    throw std::invalid_argument("buildNetworks: member_months must be > 0");
  std::vector<OffsetNetwork> networks;
  for (const auto& group : kb.groups) {
    std::vector<std::optional<ViewpointKey>> member_keys(group.members.size());
    std::vector<const UseSignal*> member_signals(group.members.size(), nullptr);
    for (std::size_t m = 0; m < group.members.size(); ++m) {
      for (const auto& [key, signal] : use_signals) {
        if (group.condition.has_value()) {
          const std::string* cond = key.level(kDimCondition);
          if (cond == nullptr || *cond != *group.condition) continue;
        }
        if (!group.members[m].matches(key)) continue;
        member_keys[m] = key;
        member_signals[m] = &signal;
        break;
      }
    }
    std::vector<std::size_t> origin_members;
    std::vector<std::size_t> receiver_members;
    for (std::size_t m = 0; m < group.members.size(); ++m) {
      if (member_signals[m] == nullptr) continue;
      const UseSignal& sig = *member_signals[m];
      if (!sig.detection.flagged(min_confidence)) continue;
      const double capacity = std::abs(sig.use_change_ewa) * member_months;
      if (!(capacity > 0.0)) continue;
      if (sig.detection.direction == Direction::down)
        origin_members.push_back(m);
      else if (sig.detection.direction == Direction::up)
        receiver_members.push_back(m);
    }
    if (origin_members.empty() || receiver_members.empty()) continue;

    auto excluded = [&](std::size_t a, std::size_t b) {
      for (const auto& [x, y] : group.exclusions)
        if ((x == a && y == b) || (x == b && y == a)) return true;
      return false;
    };

    OffsetNetwork net;
    net.group_id = group.group_id;
    net.window = window;
    for (std::size_t m : receiver_members) {
      net.receivers.push_back(*member_keys[m]);
      net.inflow_capacity.push_back(std::abs(member_signals[m]->use_change_ewa) * member_months);
    }
    for (std::size_t m : origin_members) {
      std::vector<std::size_t> allowed;
      for (std::size_t j = 0; j < receiver_members.size(); ++j)
        if (!excluded(m, receiver_members[j])) allowed.push_back(j);
      if (allowed.empty()) continue;  // fully excluded originator
      net.originators.push_back(*member_keys[m]);
      net.outflow_capacity.push_back(std::abs(member_signals[m]->use_change_ewa) * member_months);
      net.adjacency.push_back(std::move(allowed));
    }
    if (net.originators.empty()) continue;
    net.validate();
    networks.push_back(std::move(net));
  }
  return networks;
}

}  // namespace surveil
