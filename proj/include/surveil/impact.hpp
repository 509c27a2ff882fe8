#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "surveil/ewa.hpp"
#include "surveil/kpi_series.hpp"

namespace surveil {

struct ImpactConfig {
  double w = 1.0;  // EWA weight; 1 = simple average
  int T = 12;      // seasonal lag
  int P = 0;       // last period index

  void validate() const {
    if (!(w > 0.0) || w > 1.0) throw std::invalid_argument("impact: w must be in (0,1]");
    if (P < T + 1) throw std::invalid_argument("impact: window too short (P < T+1)");
  }
};

struct ImpactValue {
  double impact = 0.0;  // I(c)
  double rate = 0.0;
  bool rate_defined = false;
};

/// EWA of the year-over-year changes of a ratio: I(c) with c(t) = s(t)-s(t-T)
/// over t = T+1..P. Undefined periods contribute c = 0 (imputed, counted);
/// the rate normalizes by the EWA of the baseline levels s(t-T), undefined
/// when that baseline is zero or empty.
inline ImpactValue totalImpact(const RatioSeries& s, const ImpactConfig& cfg) {
  cfg.validate();
  if (s.lastPeriod() < cfg.P)
    throw std::invalid_argument("totalImpact: series shorter than cfg.P");
  const std::size_t n = static_cast<std::size_t>(cfg.P - cfg.T);
  std::vector<double> c(n, 0.0);
  std::vector<double> baseline(n, 0.0);
  std::vector<bool> baseline_defined(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = static_cast<std::size_t>(cfg.T) + 1 + i;
    const std::size_t past = t - static_cast<std::size_t>(cfg.T);
    if (s.defined[t] && s.defined[past]) c[i] = s.value[t] - s.value[past];
    baseline[i] = s.value[past];
    baseline_defined[i] = s.defined[past];
  }
  ImpactValue out;
  out.impact = ewa(c, cfg.w);
  if (supportSize(baseline_defined) > 0) {
    const double base = ewaMasked(baseline, baseline_defined, cfg.w);
    if (base != 0.0) {
      out.rate = out.impact / base;
      out.rate_defined = true;
    }
  }
  return out;
}

/// One factor's share of a decomposed impact. `preliminary` is J before the
/// proportional remainder adjustment; `remainder_delta` is the delta of the
/// split this node belongs to. Children always sum to the node's own impact.
struct DecompositionNode {
  std::string factor_name;
  double impact = 0.0;       // I, adjusted
  double preliminary = 0.0;  // J
  double rate = 0.0;
  bool rate_defined = false;
  double remainder_delta = 0.0;
  std::vector<DecompositionNode> children;
};

/// A target ratio together with named factor series whose per-period product
/// reproduces it.
struct FactorSeries {
  std::string target_name;
  RatioSeries target;
  std::vector<std::pair<std::string, RatioSeries>> factors;

  void validate(double rel_tol = 1e-9) const {
    if (factors.size() < 2)
      throw std::invalid_argument("factor series: need at least two factors");
    const std::size_t n = target.size();
    for (const auto& [name, f] : factors)
      if (f.size() != n) throw std::invalid_argument("factor series: length mismatch");
    for (std::size_t t = 0; t < n; ++t) {
      if (!target.defined[t]) continue;
      bool all_defined = true;
      double prod = 1.0;
      for (const auto& [name, f] : factors) {
        if (!f.defined[t]) {
          all_defined = false;
          break;
        }
        prod *= f.value[t];
      }
      if (!all_defined) continue;
      const double scale = std::max(std::abs(target.value[t]), 1e-300);
      if (std::abs(prod - target.value[t]) > rel_tol * scale)
        throw std::invalid_argument("factor series: product does not match target ratio at period " +
                                    std::to_string(t));
    }
  }
};

namespace detail {

/// Common support for a decomposition window: period t participates iff the
/// target, every factor, and the held weight are defined at both t and t-T.
/// One shared index set keeps the parent impact and all factor terms additive.
inline std::vector<bool> decompositionSupport(const FactorSeries& fs,
                                              const RatioSeries* weight, const ImpactConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(cfg.P - cfg.T);
  std::vector<bool> support(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = static_cast<std::size_t>(cfg.T) + 1 + i;
    const std::size_t past = t - static_cast<std::size_t>(cfg.T);
    bool ok = fs.target.defined[t] && fs.target.defined[past];
    for (const auto& [name, f] : fs.factors) ok = ok && f.defined[t] && f.defined[past];
    if (weight != nullptr) ok = ok && weight->defined[past];
    support[i] = ok;
  }
  return support;
}

/// Distributes the preliminary remainder delta = sum(J) - parent_impact
/// proportionally to |J_i|; an all-zero |J| sum splits delta equally.
inline void applyRemainderSplit(std::vector<DecompositionNode>& nodes, double parent_impact) {
  double j_sum = 0.0;
  double abs_sum = 0.0;
  for (const auto& node : nodes) {
    j_sum += node.preliminary;
    abs_sum += std::abs(node.preliminary);
  }
  const double delta = j_sum - parent_impact;
  for (auto& node : nodes) {
    node.remainder_delta = delta;
    if (abs_sum > 0.0)
      node.impact = node.preliminary - delta * std::abs(node.preliminary) / abs_sum;
    else
      node.impact = node.preliminary - delta / static_cast<double>(nodes.size());
  }
}

}  // namespace detail

/// Price/use split of a cost-per-enrollee impact:
///   c1(t) = e(t-T) [a(t) - a(t-T)]      (price change at past use)
///   c2(t) = [e(t) - e(t-T)] a(t-T)      (use change at past price)
/// J = EWA of each term; the remainder delta = (J1+J2) - I(c) is then shared
/// proportionally to |J| so that I(c1) + I(c2) = I(c) exactly.
///
/// Expects fs.factors = {price a, use e}, fs.target = the cost-per-enrollee
/// ratio. Returns {price node, use node}.
inline std::pair<DecompositionNode, DecompositionNode> decomposeTwoFactor(
    const FactorSeries& fs, const ImpactConfig& cfg) {
  cfg.validate();
  fs.validate();
  if (fs.factors.size() != 2)
    throw std::invalid_argument("decomposeTwoFactor: need exactly two factors");
  const RatioSeries& a = fs.factors[0].second;
  const RatioSeries& e = fs.factors[1].second;
  const std::vector<bool> support = detail::decompositionSupport(fs, nullptr, cfg);
  if (supportSize(support) == 0)
    throw std::invalid_argument("decomposeTwoFactor: empty support");
  const std::size_t n = support.size();
  std::vector<double> c(n, 0.0);
  std::vector<double> c1(n, 0.0);
  std::vector<double> c2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!support[i]) continue;
    const std::size_t t = static_cast<std::size_t>(cfg.T) + 1 + i;
    const std::size_t past = t - static_cast<std::size_t>(cfg.T);
    c[i] = fs.target.value[t] - fs.target.value[past];
    c1[i] = e.value[past] * (a.value[t] - a.value[past]);
    c2[i] = (e.value[t] - e.value[past]) * a.value[past];
  }
  const double parent_impact = ewaMasked(c, support, cfg.w);
  std::vector<DecompositionNode> nodes(2);
  nodes[0].factor_name = fs.factors[0].first;
  nodes[0].preliminary = ewaMasked(c1, support, cfg.w);
  nodes[1].factor_name = fs.factors[1].first;
  nodes[1].preliminary = ewaMasked(c2, support, cfg.w);
  detail::applyRemainderSplit(nodes, parent_impact);
  return {nodes[0], nodes[1]};
}

/// m-factor generalization: each term lets one factor move while every other
/// factor (and the optional held weight series) stays at its past value,
///   c_i(t) = [f_i(t) - f_i(t-T)] * prod_{j!=i} f_j(t-T) * weight(t-T),
/// then the two-factor remainder rule adjusts J_i onto parent_impact. With a
/// null weight the parent impact is the EWA of the target ratio's own changes.
/// For m = 2 this reproduces decomposeTwoFactor bit for bit.
inline std::vector<DecompositionNode> decomposeMultiFactorAgainst(
    const FactorSeries& fs, const ImpactConfig& cfg, const RatioSeries* weight,
    const double* parent_impact_override) {
  cfg.validate();
  fs.validate();
  const std::vector<bool> support = detail::decompositionSupport(fs, weight, cfg);
  if (supportSize(support) == 0)
    throw std::invalid_argument("decomposeMultiFactor: empty support");
  const std::size_t n = support.size();
  const std::size_t m = fs.factors.size();
  std::vector<DecompositionNode> nodes(m);
  std::vector<double> term(n);
  for (std::size_t f = 0; f < m; ++f) {
    std::fill(term.begin(), term.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!support[i]) continue;
      const std::size_t t = static_cast<std::size_t>(cfg.T) + 1 + i;
      const std::size_t past = t - static_cast<std::size_t>(cfg.T);
      const RatioSeries& fi = fs.factors[f].second;
      double held = 1.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != f) held *= fs.factors[j].second.value[past];
      if (weight != nullptr) held *= weight->value[past];
      term[i] = (fi.value[t] - fi.value[past]) * held;
    }
    nodes[f].factor_name = fs.factors[f].first;
    nodes[f].preliminary = ewaMasked(term, support, cfg.w);
  }
  double parent_impact;
  if (parent_impact_override != nullptr) {
    parent_impact = *parent_impact_override;
  } else {
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!support[i]) continue;
      const std::size_t t = static_cast<std::size_t>(cfg.T) + 1 + i;
      const std::size_t past = t - static_cast<std::size_t>(cfg.T);
      double change = fs.target.value[t] - fs.target.value[past];
      if (weight != nullptr) change *= weight->value[past];
      c[i] = change;
    }
    parent_impact = ewaMasked(c, support, cfg.w);
  }
  detail::applyRemainderSplit(nodes, parent_impact);
  return nodes;
}

inline std::vector<DecompositionNode> decomposeMultiFactor(const FactorSeries& fs,
                                                           const ImpactConfig& cfg) {
  return decomposeMultiFactorAgainst(fs, cfg, nullptr, nullptr);
}

}  // namespace surveil
