#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "surveil/records.hpp"
#include "surveil/rng.hpp"
#include "surveil/scenario.hpp"

namespace surveil {

namespace detail {

/// Linear 0 -> 1 ramp over [onset, last period].
inline double rampFraction(int t, int onset, int periods) {
  if (t < onset) return 0.0;
  const int span = periods - onset;
  return static_cast<double>(t - onset + 1) / static_cast<double>(span);
}

struct TreatmentDynamics {
  double price_mult = 1.0;
  double use_mult = 1.0;
  double extra_utilization = 0.0;  // substitution inflow, claimants per patient
};

}  // namespace detail

/// Deterministic synthetic claims/enrollment generator.
///
/// Per condition and period the patient count is Poisson around
/// population * prevalence * seasonality; patients are a stable prefix of a
/// per-condition permutation so populations overlap across periods. Each
/// treatment thins the patient set at its (event-adjusted) utilization, and a
/// claimant files one claim with Poisson service units and lognormal per-unit
/// cost noise, so claimant and quantity counts stay exactly Poisson. Patients
/// with no treatment claim that period fall back to a per-condition "(other)"
/// product, keeping observed prevalence at the configured level.
///
/// All draws run off (seed, condition/treatment, period) derived streams:
/// regeneration is bit-identical and generation could fan out by condition.
template <typename ClaimSink, typename EnrollSink>
GroundTruth generate(const ScenarioSpec& spec, ClaimSink&& claim_sink,
                     EnrollSink&& enroll_sink) {
  spec.validate();
  GroundTruth truth;
  truth.seed = spec.seed;
  for (const auto& ev : spec.events) {
    ManifestEvent m;
    m.kind = ev.kind;
    m.product = ev.product;
    m.condition = ev.condition;
    m.partner = ev.partner;
    m.kb_group = ev.kb_group;
    m.onset = ev.period;
    m.magnitude = ev.magnitude;
    switch (ev.kind) {
      case EventKind::price_step:
        m.kpi = RatioKind::price;
        m.direction = ev.magnitude > 1.0 ? Direction::up : Direction::down;
        break;
      case EventKind::use_ramp_down:
        m.kpi = RatioKind::use;
        m.direction = Direction::down;
        break;
      case EventKind::use_ramp_up:
        m.kpi = RatioKind::use;
        m.direction = Direction::up;
        break;
      case EventKind::prevalence_ramp:
        m.kpi = RatioKind::prevalence;
        m.direction = ev.magnitude > 0.0 ? Direction::up : Direction::down;
        break;
      case EventKind::substitution:
        m.kpi = RatioKind::use;
        m.direction = Direction::down;  // originator side; partner moves up
        break;
    }
    truth.events.push_back(std::move(m));
  }

  const int n = spec.population;
  for (int person = 0; person < n; ++person) {
    const std::string id = "m" + std::to_string(person);
    for (int t = 0; t < spec.periods; ++t)
      enroll_sink(EnrollmentRecord{id, t, 1.0});
  }

  const double sigma = spec.cost_noise_sigma;
  const double noise_mean_adjust = -0.5 * sigma * sigma;  // E[exp(.)] == 1

  for (std::size_t ci = 0; ci < spec.conditions.size(); ++ci) {
    const ConditionScenario& cond = spec.conditions[ci];
    const std::uint64_t cond_hash = fnv1a64(cond.name);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    auto perm_engine = makeEngine(deriveSeed(spec.seed, cond_hash, 0x7065726dULL));
    std::shuffle(perm.begin(), perm.end(), perm_engine);

    for (int t = 0; t < spec.periods; ++t) {
      double prev_mult = 1.0;
      for (const auto& ev : spec.events)
        if (ev.kind == EventKind::prevalence_ramp && ev.condition == cond.name)
          prev_mult *= 1.0 + ev.magnitude * detail::rampFraction(t, ev.period, spec.periods);
      const double lambda_pat =
          n * cond.prevalence * cond.seasonality[static_cast<std::size_t>(t % 12)] * prev_mult;
      auto pat_engine = makeEngine(deriveSeed(spec.seed, cond_hash, 0x70617400ULL + t));
      int n_pat = 0;
      if (lambda_pat > 0.0) {
        std::poisson_distribution<int> pat_draw(lambda_pat);
        n_pat = std::min(n, pat_draw(pat_engine));
      }

      std::vector<bool> claimed(static_cast<std::size_t>(n_pat), false);
      for (std::size_t ti = 0; ti < cond.treatments.size(); ++ti) {
        const TreatmentScenario& treat = cond.treatments[ti];
        const std::string& product = *treat.product();
        detail::TreatmentDynamics dyn;
        for (const auto& ev : spec.events) {
          const double ramp = detail::rampFraction(t, ev.period, spec.periods);
          switch (ev.kind) {
            case EventKind::price_step:
              if (ev.product == product && t >= ev.period) dyn.price_mult *= ev.magnitude;
              break;
            case EventKind::use_ramp_down:
              if (ev.product == product) dyn.use_mult *= 1.0 - ev.magnitude * ramp;
              break;
            case EventKind::use_ramp_up:
              if (ev.product == product) dyn.use_mult *= 1.0 + ev.magnitude * ramp;
              break;
            case EventKind::substitution:
              if (ev.product == product) dyn.use_mult *= 1.0 - ev.magnitude * ramp;
              if (ev.partner == product && ramp > 0.0) {
                const TreatmentScenario* src = spec.findProduct(ev.product);
                // Service-unit preserving inflow sized against the source's
                // pre-event volume.
                dyn.extra_utilization += ev.magnitude * ramp * src->utilization *
                                         src->intensity / treat.intensity;
              }
              break;
            case EventKind::prevalence_ramp:
              break;
          }
        }
        const double p_claim =
            std::clamp(treat.utilization * dyn.use_mult + dyn.extra_utilization, 0.0, 1.0);
        if (p_claim <= 0.0 || n_pat == 0) continue;
        auto engine =
            makeEngine(deriveSeed(spec.seed, cond_hash ^ fnv1a64(product), 0x636c6dULL + t));
        std::bernoulli_distribution include(p_claim);
        std::poisson_distribution<int> qty_draw(treat.intensity);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int pi = 0; pi < n_pat; ++pi) {
          if (!include(engine)) continue;
          claimed[static_cast<std::size_t>(pi)] = true;
          const int person = perm[static_cast<std::size_t>(pi)];
          const double quantity = static_cast<double>(qty_draw(engine));
          const double noise = sigma > 0.0 ? std::exp(sigma * gauss(engine) + noise_mean_adjust) : 1.0;
          ClaimRecord rec;
          rec.enrollee_id = "m" + std::to_string(person);
          rec.period = t;
          rec.claim_type = treat.claim_type;
          rec.condition = cond.name;
          rec.episode_id = "ep" + std::to_string(splitmix64(fnv1a64(rec.enrollee_id) ^
                                                            splitmix64(cond_hash + t)));
          rec.attributes = treat.attributes;
          rec.quantity = quantity;
          rec.cost = quantity * treat.price * dyn.price_mult * noise;
          claim_sink(rec);
        }
      }

      // Residual claims for patients untouched by any treatment this period.
      if (n_pat > 0) {
        auto engine = makeEngine(deriveSeed(spec.seed, cond_hash, 0x6f746872ULL + t));
        std::poisson_distribution<int> qty_draw(spec.backfill_intensity);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const ClaimType other_type = cond.treatments.front().claim_type;
        for (int pi = 0; pi < n_pat; ++pi) {
          if (claimed[static_cast<std::size_t>(pi)]) continue;
          const int person = perm[static_cast<std::size_t>(pi)];
          const double quantity = static_cast<double>(qty_draw(engine));
          const double noise = sigma > 0.0 ? std::exp(sigma * gauss(engine) + noise_mean_adjust) : 1.0;
          ClaimRecord rec;
          rec.enrollee_id = "m" + std::to_string(person);
          rec.period = t;
          rec.claim_type = other_type;
          rec.condition = cond.name;
          rec.episode_id = "ep" + std::to_string(splitmix64(fnv1a64(rec.enrollee_id) ^
                                                            splitmix64(cond_hash + t)));
          rec.attributes = {{"therapeutic_class", "(other)"},
                            {"product_name", cond.name + "_other"}};
          rec.quantity = quantity;
          rec.cost = quantity * spec.backfill_price * noise;
          claim_sink(rec);
        }
      }
    }
  }
  return truth;
}

}  // namespace surveil
