#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "surveil/kpi_series.hpp"

namespace surveil {

/// De-seasonalized, normalized change rates for one KPI ratio.
///
/// c(t) = s(t) - s(t-T) is stored for every computable t = T..P (index i maps
/// to period T+i). The detection and impact windows consume t = T+1..P, i.e.
/// updates(); the t = T element anchors the CUSUM at zero and is kept for
/// export alignment. x(t) is c(t)/se_c(t) clamped to +-censor_cap so a single
/// distorted period cannot dominate; periods with an undefined side are
/// imputed as x = 0 and flagged rather than dropped, keeping windows aligned
/// across viewpoints.
struct ChangeSeries {
  RatioKind kpi = RatioKind::cost_per_enrollee;
  int T = 0;
  int P = 0;
  double censor_cap = 8.0;
  std::vector<double> c;
  std::vector<double> se_c;
  std::vector<double> x;
  std::vector<bool> imputed;

  int firstPeriod() const { return T; }

  /// x(T+1)..x(P): the values fed to the CUSUM (length P - T).
  std::span<const double> updates() const { return {x.data() + 1, x.size() - 1}; }

  /// c(T+1)..c(P): the impact window.
  std::span<const double> changeWindow() const { return {c.data() + 1, c.size() - 1}; }
};

inline ChangeSeries buildChangeSeries(const RatioSeries& ratio, int T, double censor_cap) {
  if (censor_cap <= 0.0) throw std::invalid_argument("buildChangeSeries: censor_cap must be > 0");
  const int P = ratio.lastPeriod();
  if (P < T + 1)
    throw std::invalid_argument("buildChangeSeries: window too short (P < T+1)");
  ChangeSeries out;
  out.kpi = ratio.kind;
  out.T = T;
  out.P = P;
  out.censor_cap = censor_cap;
  const std::size_t n = static_cast<std::size_t>(P - T + 1);
  out.c.assign(n, 0.0);
  out.se_c.assign(n, 0.0);
  out.x.assign(n, 0.0);
  out.imputed.assign(n, false);
  bool any_defined = false;
  for (int t = T; t <= P; ++t) {
    const std::size_t i = static_cast<std::size_t>(t - T);
    const std::size_t cur = static_cast<std::size_t>(t);
    const std::size_t past = static_cast<std::size_t>(t - T);
    if (!ratio.defined[cur] || !ratio.defined[past]) {
      out.imputed[i] = true;
      continue;
    }
    any_defined = true;
    const double c = ratio.value[cur] - ratio.value[past];
    const double se = std::sqrt(ratio.se[cur] * ratio.se[cur] + ratio.se[past] * ratio.se[past]);
    out.c[i] = c;
    out.se_c[i] = se;
    if (se > 0.0)
      out.x[i] = std::clamp(c / se, -censor_cap, censor_cap);
    else
      out.x[i] = c == 0.0 ? 0.0 : std::copysign(censor_cap, c);
  }
  if (!any_defined)
    throw std::invalid_argument("buildChangeSeries: every period undefined");
  return out;
}

}  // namespace surveil
