#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveil/records.hpp"
#include "surveil/rng.hpp"

namespace surveil {

enum class NullModelKind { gaussian_white_noise, arma };

struct ArmaParams {
  std::vector<double> ar;
  std::vector<double> ma;
  double innovation_variance = 1.0;
};

namespace detail {

/// Stationarity test for 1 - a1 z - ... - ap z^p having all roots outside the
/// unit circle, via the step-down (inverse Levinson-Durbin) recursion: the
/// polynomial is admissible iff every reflection coefficient has |.| < 1.
inline bool allRootsOutsideUnitCircle(std::vector<double> coeffs) {
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
  while (!coeffs.empty()) {
    const double kappa = coeffs.back();
    if (!(std::abs(kappa) < 1.0)) return false;
    coeffs.pop_back();
    const double scale = 1.0 - kappa * kappa;
    std::vector<double> reduced(coeffs.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      reduced[j] = (coeffs[j] + kappa * coeffs[coeffs.size() - 1 - j]) / scale;
    coeffs = std::move(reduced);
  }
  return true;
}

}  // namespace detail

/// Null hypothesis model for normalized change rates; drives the Monte Carlo
/// threshold calibration. ARMA parameters come from configuration, not from
/// fitting.
struct NullModelSpec {
  NullModelKind kind = NullModelKind::gaussian_white_noise;
  ArmaParams arma;
  int series_length = 0;  // P - T

  void validate() const {
    if (series_length < 1)
      throw std::invalid_argument("null model: series_length must be >= 1");
    if (kind == NullModelKind::arma) {
      if (!(arma.innovation_variance > 0.0))
        throw std::invalid_argument("null model: innovation variance must be > 0");
      if (!detail::allRootsOutsideUnitCircle(arma.ar))
        throw std::invalid_argument("null model: AR polynomial not stationary");
      std::vector<double> neg_ma(arma.ma.size());
      for (std::size_t i = 0; i < arma.ma.size(); ++i) neg_ma[i] = -arma.ma[i];
      if (!detail::allRootsOutsideUnitCircle(neg_ma))
        throw std::invalid_argument("null model: MA polynomial not invertible");
    }
  }
};

/// One null draw of length spec.series_length, deterministic in the seed.
inline std::vector<double> simulateNullSeries(const NullModelSpec& spec, std::uint64_t seed) {
  auto engine = makeEngine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = static_cast<std::size_t>(spec.series_length);
  std::vector<double> x(n);
  if (spec.kind == NullModelKind::gaussian_white_noise) {
    for (double& v : x) v = gauss(engine);
    return x;
  }
  const std::size_t p = spec.arma.ar.size();
  const std::size_t q = spec.arma.ma.size();
  const double sigma = std::sqrt(spec.arma.innovation_variance);
  const std::size_t burn = 200 + 10 * (p + q);
  std::vector<double> series(burn + n, 0.0);
  std::vector<double> eps(burn + n, 0.0);
  for (std::size_t t = 0; t < series.size(); ++t) {
    eps[t] = sigma * gauss(engine);
    double v = eps[t];
    for (std::size_t i = 0; i < p; ++i)
      if (t > i) v += spec.arma.ar[i] * series[t - 1 - i];
    for (std::size_t j = 0; j < q; ++j)
      if (t > j) v += spec.arma.ma[j] * eps[t - 1 - j];
    series[t] = v;
  }
  std::copy(series.end() - static_cast<long>(n), series.end(), x.begin());
  return x;
}

}  // namespace surveil
