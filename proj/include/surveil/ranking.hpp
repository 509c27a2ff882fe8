#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "surveil/cusum.hpp"
#include "surveil/impact.hpp"
#include "surveil/kpi_series.hpp"
#include "surveil/viewpoint.hpp"

namespace surveil {

enum class Category {
  pharmacy_drug,
  condition_management,
  system_improvement,
  rare_diseases,
  declining_cost,
};

inline constexpr Category kAllCategories[] = {
    Category::pharmacy_drug, Category::condition_management, Category::system_improvement,
    Category::rare_diseases, Category::declining_cost};

inline const char* toString(Category c) {
  switch (c) {
    case Category::pharmacy_drug: return "pharmacy_drug";
    case Category::condition_management: return "condition_management";
    case Category::system_improvement: return "system_improvement";
    case Category::rare_diseases: return "rare_diseases";
    case Category::declining_cost: return "declining_cost";
  }
  return "?";
}

inline Category categoryFromString(const std::string& s) {
  for (Category c : kAllCategories)
    if (s == toString(c)) return c;
  throw InputError("unknown category: '" + s + "'");
}

/// One surveilled viewpoint's impact summary: total EWA impact, its rate and
/// signed rank, the factor-attribution tree, and the per-KPI detection labels
/// feeding the trend-and-confidence columns.
struct ImpactRecord {
  ViewpointKey key;
  double total_impact = 0.0;
  double rate = 0.0;
  bool rate_defined = false;
  int rank = 0;
  double cost_share = 0.0;
  int cost_share_rank = 0;
  double baseline_prevalence = 0.0;
  DecompositionNode decomposition;  // root node: the cost_per_enrollee impact
  std::map<RatioKind, DetectionResult> detections;
  Category category = Category::condition_management;
};

/// Signed ranking ladder: positive impacts get 1..n by descending value,
/// negative impacts -1..-m by ascending value (most negative first), zeros
/// stay rank 0. Ties break by cost share descending, then key order.
template <typename T, typename ImpactFn, typename ShareFn, typename KeyFn>
std::vector<int> signedRanks(const std::vector<T>& items, ImpactFn impact_of, ShareFn share_of,
                             KeyFn key_of) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> ranks(items.size(), 0);
  auto tie_less = [&](std::size_t lhs, std::size_t rhs) {
    const double ls = share_of(items[lhs]);
    const double rs = share_of(items[rhs]);
    if (ls != rs) return ls > rs;
    return key_of(items[lhs]) < key_of(items[rhs]);
  };
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i : order) {
    const double v = impact_of(items[i]);
    if (v > 0.0)
      pos.push_back(i);
    else if (v < 0.0)
      neg.push_back(i);
  }
  std::sort(pos.begin(), pos.end(), [&](std::size_t l, std::size_t r) {
    const double lv = impact_of(items[l]);
    const double rv = impact_of(items[r]);
    if (lv != rv) return lv > rv;
    return tie_less(l, r);
  });
  std::sort(neg.begin(), neg.end(), [&](std::size_t l, std::size_t r) {
    const double lv = impact_of(items[l]);
    const double rv = impact_of(items[r]);
    if (lv != rv) return lv < rv;
    return tie_less(l, r);
  });
  for (std::size_t i = 0; i < pos.size(); ++i) ranks[pos[i]] = static_cast<int>(i) + 1;
  for (std::size_t i = 0; i < neg.size(); ++i) ranks[neg[i]] = -static_cast<int>(i) - 1;
  return ranks;
}

/// Assigns signed ranks by total impact to records sharing one viewpoint level.
inline void rankImpacts(std::vector<ImpactRecord>& records) {
  const std::vector<int> ranks = signedRanks(
      records, [](const ImpactRecord& r) { return r.total_impact; },
      [](const ImpactRecord& r) { return r.cost_share; },
      [](const ImpactRecord& r) { return r.key; });
  for (std::size_t i = 0; i < records.size(); ++i) records[i].rank = ranks[i];
}

}  // namespace surveil
