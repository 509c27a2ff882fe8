#pragma once

#include <map>
#include <string>
#include <vector>

#include "surveil/impact.hpp"
#include "surveil/kpi_series.hpp"

namespace surveil {

/// Shape of the factor-attribution tree: which ratios decompose, and into
/// which factors. The default mirrors the standard drill-down: cost per
/// enrollee splits into price and use, and use splits further into intensity,
/// utilization, and prevalence.
struct DecompositionTreeConfig {
  std::map<RatioKind, std::vector<RatioKind>> children = {
      {RatioKind::cost_per_enrollee, {RatioKind::price, RatioKind::use}},
      {RatioKind::use, {RatioKind::intensity, RatioKind::utilization, RatioKind::prevalence}},
  };
};

namespace detail {

inline RatioSeries heldProduct(const RatioSeries* outer_weight, const RatioSeries& sibling) {
  RatioSeries w = sibling;
  if (outer_weight != nullptr) {
    for (std::size_t t = 0; t < w.size(); ++t) {
      w.value[t] *= outer_weight->value[t];
      w.defined[t] = w.defined[t] && outer_weight->defined[t];
    }
  }
  return w;
}

inline void expandNode(DecompositionNode& node, RatioKind node_kind,
                       const std::map<RatioKind, RatioSeries>& ratios,
                       const DecompositionTreeConfig& tree, const ImpactConfig& cfg,
                       const RatioSeries* weight, double rate_base, bool rate_base_defined) {
  if (rate_base_defined) {
    node.rate = node.impact / rate_base;
    node.rate_defined = true;
  }
  auto it = tree.children.find(node_kind);
  if (it == tree.children.end()) return;
  FactorSeries fs;
  fs.target_name = toString(node_kind);
  fs.target = ratios.at(node_kind);
  for (RatioKind child : it->second) fs.factors.emplace_back(toString(child), ratios.at(child));
  node.children = decomposeMultiFactorAgainst(fs, cfg, weight, &node.impact);
  for (std::size_t f = 0; f < node.children.size(); ++f) {
    const RatioKind child_kind = it->second[f];
    // Grandchildren hold this node's weight times every sibling factor at its
    // past value, matching how the child's own c-term prices its changes.
    RatioSeries child_weight;
    bool have_weight = false;
    for (std::size_t j = 0; j < fs.factors.size(); ++j) {
      if (j == f) continue;
      child_weight = have_weight ? detail::heldProduct(&child_weight, fs.factors[j].second)
                                 : detail::heldProduct(weight, fs.factors[j].second);
      have_weight = true;
    }
    expandNode(node.children[f], child_kind, ratios, tree, cfg,
               have_weight ? &child_weight : weight, rate_base, rate_base_defined);
  }
}

}  // namespace detail

/// Builds the full factor-attribution tree for one viewpoint. The root is the
/// cost-per-enrollee impact; every node's children sum to the node exactly,
/// and every rate shares the root's baseline-level denominator so factor
/// rates are comparable with the total rate.
inline DecompositionNode buildImpactTree(const std::map<RatioKind, RatioSeries>& ratios,
                                         const ImpactConfig& cfg,
                                         const DecompositionTreeConfig& tree = {}) {
  cfg.validate();
  const RatioSeries& s = ratios.at(RatioKind::cost_per_enrollee);
  const ImpactValue total = totalImpact(s, cfg);
  DecompositionNode root;
  root.factor_name = toString(RatioKind::cost_per_enrollee);
  root.impact = total.impact;
  root.preliminary = total.impact;
  double rate_base = 0.0;
  bool rate_base_defined = false;
  if (total.rate_defined && total.rate != 0.0) {
    rate_base = total.impact / total.rate;
    rate_base_defined = true;
  } else if (total.rate_defined) {
    // impact == 0: recover the baseline EWA directly for factor rates.
    const std::size_t n = static_cast<std::size_t>(cfg.P - cfg.T);
    std::vector<double> baseline(n, 0.0);
    std::vector<bool> defined(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t past = i + 1;
      baseline[i] = s.value[past];
      defined[i] = s.defined[past];
    }
    if (supportSize(defined) > 0) {
      rate_base = ewaMasked(baseline, defined, cfg.w);
      rate_base_defined = rate_base != 0.0;
    }
  }
  detail::expandNode(root, RatioKind::cost_per_enrollee, ratios, tree, cfg, nullptr, rate_base,
                     rate_base_defined);
  return root;
}

}  // namespace surveil
