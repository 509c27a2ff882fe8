#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveil/cusum.hpp"
#include "surveil/kpi_series.hpp"
#include "surveil/records.hpp"

namespace surveil {

enum class EventKind { price_step, use_ramp_down, use_ramp_up, prevalence_ramp, substitution };

inline const char* toString(EventKind k) {
  switch (k) {
    case EventKind::price_step: return "price_step";
    case EventKind::use_ramp_down: return "use_ramp_down";
    case EventKind::use_ramp_up: return "use_ramp_up";
    case EventKind::prevalence_ramp: return "prevalence_ramp";
    case EventKind::substitution: return "substitution";
  }
  return "?";
}

inline EventKind eventKindFromString(const std::string& s) {
  for (EventKind k : {EventKind::price_step, EventKind::use_ramp_down, EventKind::use_ramp_up,
                      EventKind::prevalence_ramp, EventKind::substitution})
    if (s == toString(k)) return k;
  throw InputError("unknown event kind: '" + s + "'");
}

/// One synthetic treatment: utilization is claimants per patient, intensity
/// the mean service units per claimant-month, price the cost per unit.
struct TreatmentScenario {
  ClaimType claim_type = ClaimType::pharmacy;
  std::vector<std::pair<std::string, std::string>> attributes;
  double utilization = 0.0;
  double intensity = 1.0;
  double price = 1.0;

  const std::string* product() const {
    for (const auto& [dim, code] : attributes)
      if (dim == "product_name") return &code;
    return nullptr;
  }
};

/// A condition with its prevalence dynamics and the treatments filed under it.
struct ConditionScenario {
  std::string name;
  double prevalence = 0.0;  // patients per enrollee per period
  std::array<double, 12> seasonality{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  std::vector<TreatmentScenario> treatments;
};

/// A ground-truth change injected into the generated stream.
struct InjectedEvent {
  EventKind kind = EventKind::price_step;
  std::string product;    // target product_name (treatment events)
  std::string condition;  // target condition (prevalence_ramp)
  std::string partner;    // receiving product_name (substitution)
  std::string kb_group;   // comparability group backing a substitution
  int period = 0;         // onset
  double magnitude = 0.0;
};

struct ScenarioSpec {
  int population = 0;
  int periods = 0;
  std::uint64_t seed = 0;
  double cost_noise_sigma = 0.2;  // lognormal per-claim price dispersion
  double backfill_intensity = 1.0;
  double backfill_price = 10.0;
  std::vector<ConditionScenario> conditions;
  std::vector<InjectedEvent> events;

  const TreatmentScenario* findProduct(const std::string& product,
                                       const ConditionScenario** owner = nullptr) const {
    for (const auto& cond : conditions)
      for (const auto& treat : cond.treatments) {
        const std::string* p = treat.product();
        if (p != nullptr && *p == product) {
          if (owner != nullptr) *owner = &cond;
          return &treat;
        }
      }
    return nullptr;
  }

  void validate() const {
    if (population < 1) throw std::invalid_argument("scenario: population must be >= 1");
    if (periods < 1) throw std::invalid_argument("scenario: periods must be >= 1");
    if (conditions.empty()) throw std::invalid_argument("scenario: no conditions configured");
    if (!(backfill_intensity > 0.0) || !(backfill_price >= 0.0))
      throw std::invalid_argument("scenario: bad backfill parameters");
    if (!(cost_noise_sigma >= 0.0))
      throw std::invalid_argument("scenario: cost_noise_sigma must be >= 0");
    for (const auto& cond : conditions) {
      if (cond.name.empty()) throw std::invalid_argument("scenario: condition without a name");
      if (!(cond.prevalence > 0.0) || cond.prevalence > 1.0)
        throw std::invalid_argument("scenario: prevalence must lie in (0,1] for " + cond.name);
      for (double s : cond.seasonality)
        if (!(s >= 0.0) || !std::isfinite(s))
          throw std::invalid_argument("scenario: bad seasonality for " + cond.name);
      if (cond.treatments.empty())
        throw std::invalid_argument("scenario: condition " + cond.name + " has no treatments");
      for (const auto& treat : cond.treatments) {
        if (treat.product() == nullptr)
          throw std::invalid_argument("scenario: treatment under " + cond.name +
                                      " lacks a product_name attribute");
        if (!(treat.utilization >= 0.0) || treat.utilization > 1.0)
          throw std::invalid_argument("scenario: utilization outside [0,1] under " + cond.name);
        if (!(treat.intensity > 0.0) || !(treat.price >= 0.0))
          throw std::invalid_argument("scenario: bad intensity/price under " + cond.name);
      }
    }
    for (const auto& ev : events) {
      if (ev.period < 0 || ev.period >= periods)
        throw std::invalid_argument("scenario: event period outside horizon");
      if (!std::isfinite(ev.magnitude))
        throw std::invalid_argument("scenario: event magnitude must be finite");
      switch (ev.kind) {
        case EventKind::price_step:
          if (!(ev.magnitude > 0.0))
            throw std::invalid_argument("scenario: price_step magnitude must be > 0");
          if (findProduct(ev.product) == nullptr)
            throw std::invalid_argument("scenario: price_step product not found: " + ev.product);
          break;
        case EventKind::use_ramp_down:
          if (!(ev.magnitude > 0.0) || ev.magnitude > 1.0)
            throw std::invalid_argument("scenario: use_ramp_down magnitude must be in (0,1]");
          if (findProduct(ev.product) == nullptr)
            throw std::invalid_argument("scenario: ramp product not found: " + ev.product);
          break;
        case EventKind::use_ramp_up:
          if (!(ev.magnitude > 0.0))
            throw std::invalid_argument("scenario: use_ramp_up magnitude must be > 0");
          if (findProduct(ev.product) == nullptr)
            throw std::invalid_argument("scenario: ramp product not found: " + ev.product);
          break;
        case EventKind::prevalence_ramp: {
          if (ev.magnitude <= -1.0)
            throw std::invalid_argument("scenario: prevalence_ramp magnitude must be > -1");
          bool found = false;
          for (const auto& cond : conditions) found = found || cond.name == ev.condition;
          if (!found)
            throw std::invalid_argument("scenario: prevalence_ramp condition not found: " +
                                        ev.condition);
          break;
        }
        case EventKind::substitution:
          if (!(ev.magnitude > 0.0) || ev.magnitude > 1.0)
            throw std::invalid_argument("scenario: substitution magnitude must be in (0,1]");
          if (ev.kb_group.empty())
            throw std::invalid_argument("scenario: substitution events must reference a KB group");
          if (findProduct(ev.product) == nullptr || findProduct(ev.partner) == nullptr)
            throw std::invalid_argument("scenario: substitution products not found");
          break;
      }
    }
    // Rates must stay feasible after event application.
    for (const auto& cond : conditions) {
      double prev_mult = 1.0;
      for (const auto& ev : events)
        if (ev.kind == EventKind::prevalence_ramp && ev.condition == cond.name)
          prev_mult *= 1.0 + std::max(0.0, ev.magnitude);
      double max_season = 0.0;
      for (double s : cond.seasonality) max_season = std::max(max_season, s);
      if (cond.prevalence * prev_mult * max_season > 1.0)
        throw std::invalid_argument("scenario: infeasible prevalence after events for " +
                                    cond.name);
    }
  }
};

/// Manifest entry scoring one injected event: its true onset, direction, and
/// the KPI it moves.
struct ManifestEvent {
  EventKind kind = EventKind::price_step;
  std::string product;
  std::string condition;
  std::string partner;
  std::string kb_group;
  int onset = 0;
  Direction direction = Direction::up;
  RatioKind kpi = RatioKind::price;
  double magnitude = 0.0;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<ManifestEvent> events;
};

}  // namespace surveil
