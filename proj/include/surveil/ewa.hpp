#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace surveil {

/// Exponential weighted average over a change window. The last element gets
/// weight 1 and earlier elements w, w^2, ... so older periods are downplayed;
/// w = 1 is the simple-average limit. Weights are summed directly, which is
/// the same normalization as (1-w)/(1-w^n) and stays stable as w -> 1.
inline double ewa(std::span<const double> values, double w) {
  if (values.empty()) throw std::invalid_argument("ewa: empty window");
  if (!(w > 0.0) || w > 1.0) throw std::invalid_argument("ewa: weight must be in (0,1]");
  double weight = 1.0;
  double num = 0.0;
  double denom = 0.0;
  for (std::size_t i = values.size(); i-- > 0;) {
    num += weight * values[i];
    denom += weight;
    weight *= w;
  }
  return num / denom;
}

/// EWA restricted to a support mask, with the weight ladder still anchored at
/// the window's last position. Decomposition nodes use this so the parent
/// impact and every factor term average over one common index set.
inline double ewaMasked(std::span<const double> values, const std::vector<bool>& support,
                        double w) {
  if (values.size() != support.size())
    throw std::invalid_argument("ewaMasked: mask size mismatch");
  if (!(w > 0.0) || w > 1.0) throw std::invalid_argument("ewa: weight must be in (0,1]");
  double weight = 1.0;
  double num = 0.0;
  double denom = 0.0;
  for (std::size_t i = values.size(); i-- > 0;) {
    if (support[i]) {
      num += weight * values[i];
      denom += weight;
    }
    weight *= w;
  }
  if (denom == 0.0) throw std::invalid_argument("ewa: empty support");
  return num / denom;
}

inline std::size_t supportSize(const std::vector<bool>& support) {
  std::size_t n = 0;
  for (bool b : support)
    if (b) ++n;
  return n;
}

}  // namespace surveil
