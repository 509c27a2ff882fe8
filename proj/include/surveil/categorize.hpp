#pragma once

#include <cmath>
#include <string>

#include "surveil/config.hpp"
#include "surveil/ranking.hpp"
#include "surveil/viewpoint.hpp"

namespace surveil {

namespace detail {

inline bool conditionRooted(const ViewpointKey& key) {
  return key.level(kDimCondition) != nullptr;
}

inline bool pharmacyRooted(const ViewpointKey& key) {
  const std::string* ct = key.level(kDimClaimType);
  return ct != nullptr && *ct == toString(ClaimType::pharmacy);
}

inline bool systemRooted(const ViewpointKey& key) {
  const std::string* ct = key.level(kDimClaimType);
  if (ct != nullptr && (*ct == toString(ClaimType::inpatient) || *ct == toString(ClaimType::outpatient)))
    return true;
  return key.level("procedure_group") != nullptr || key.level("place_of_service") != nullptr;
}

inline void collectLeafImpacts(const DecompositionNode& node, double& prevalence_abs,
                               double& max_other_abs) {
  if (node.children.empty()) {
    if (node.factor_name == toString(RatioKind::prevalence))
      prevalence_abs = std::max(prevalence_abs, std::abs(node.impact));
    else
      max_other_abs = std::max(max_other_abs, std::abs(node.impact));
    return;
  }
  for (const auto& child : node.children) collectLeafImpacts(child, prevalence_abs, max_other_abs);
}

/// True when the prevalence leaf carries the largest absolute impact of all
/// leaf factors in the attribution tree.
inline bool prevalenceDominated(const DecompositionNode& root) {
  double prevalence_abs = -1.0;
  double max_other_abs = 0.0;
  collectLeafImpacts(root, prevalence_abs, max_other_abs);
  return prevalence_abs >= 0.0 && prevalence_abs >= max_other_abs;
}

}  // namespace detail

/// First-match category assignment for a decomposed impact record:
/// declining cost, then rare disease, pharmacy drug, condition management
/// (condition-rooted with a prevalence-dominated attribution), system
/// improvement; unmatched records fall back by hierarchy root.
inline Category categorize(const ImpactRecord& rec, const CategoryRules& rules) {
  const bool condition_rooted = detail::conditionRooted(rec.key);
  if (rec.total_impact < 0.0) return Category::declining_cost;
  if (rec.total_impact > 0.0) {
    if (condition_rooted && rec.baseline_prevalence < rules.rarity_prevalence)
      return Category::rare_diseases;
    if (detail::pharmacyRooted(rec.key)) return Category::pharmacy_drug;
    if (condition_rooted && detail::prevalenceDominated(rec.decomposition))
      return Category::condition_management;
    if (detail::systemRooted(rec.key)) return Category::system_improvement;
  }
  return condition_rooted ? Category::condition_management : Category::system_improvement;
}

}  // namespace surveil
