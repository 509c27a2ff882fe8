#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "surveil/cusum.hpp"
#include "surveil/impact.hpp"
#include "surveil/null_model.hpp"
#include "surveil/offsets.hpp"
#include "surveil/records.hpp"
#include "surveil/rng.hpp"
#include "surveil/scenario.hpp"
#include "surveil/threshold_learn.hpp"
#include "surveil/viewpoint.hpp"

namespace surveil {

using json = nlohmann::json;

inline json loadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("bad JSON in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Viewpoint spec set

inline std::vector<ViewpointSpec> parseViewpointSpecs(const json& doc) {
  std::vector<ViewpointSpec> specs;
  if (!doc.contains("specs") || !doc["specs"].is_array())
    throw InputError("viewpoint config: expected top-level 'specs' array");
  for (const auto& item : doc["specs"]) {
    ViewpointSpec spec;
    spec.name = item.at("name").get<std::string>();
    for (const auto& level : item.at("levels")) spec.levels.push_back(level.get<std::string>());
    if (item.contains("qualification")) {
      const auto& q = item["qualification"];
      spec.qualification.min_member_months = q.value("min_member_months", 0.0);
      spec.qualification.min_cost_share = q.value("min_cost_share", 0.0);
    }
    spec.validate();
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw InputError("viewpoint config: no specs defined");
  return specs;
}

// ---------------------------------------------------------------------------
// Comparability knowledge base

inline ComparabilityKB parseKb(const json& doc) {
  ComparabilityKB kb;
  kb.provenance = doc.value("provenance", std::string{});
  for (const auto& item : doc.value("groups", json::array())) {
    KbGroup group;
    group.group_id = item.at("group_id").get<std::string>();
    if (item.contains("condition") && !item["condition"].is_null())
      group.condition = item["condition"].get<std::string>();
    for (const auto& member : item.at("members")) {
      KbMemberPattern pattern;
      for (const auto& [dim, code] : member.items())
        pattern.match.emplace_back(dim, code.get<std::string>());
      group.members.push_back(std::move(pattern));
    }
    for (const auto& pair : item.value("exclusions", json::array())) {
      if (!pair.is_array() || pair.size() != 2)
        throw InputError("KB group '" + group.group_id + "': exclusions must be index pairs");
      group.exclusions.emplace_back(pair[0].get<std::size_t>(), pair[1].get<std::size_t>());
    }
    kb.groups.push_back(std::move(group));
  }
  kb.validate();
  return kb;
}

// ---------------------------------------------------------------------------
// Scenario

inline ScenarioSpec parseScenario(const json& doc) {
  ScenarioSpec spec;
  spec.population = doc.at("population").get<int>();
  spec.periods = doc.at("periods").get<int>();
  spec.seed = doc.value("seed", 0ULL);
  spec.cost_noise_sigma = doc.value("cost_noise_sigma", 0.2);
  spec.backfill_intensity = doc.value("backfill_intensity", 1.0);
  spec.backfill_price = doc.value("backfill_price", 10.0);
  for (const auto& citem : doc.at("conditions")) {
    ConditionScenario cond;
    cond.name = citem.at("name").get<std::string>();
    cond.prevalence = citem.at("prevalence").get<double>();
    if (citem.contains("seasonality")) {
      const auto& s = citem["seasonality"];
      if (!s.is_array() || s.size() != 12)
        throw InputError("scenario: seasonality must have 12 entries for " + cond.name);
      for (std::size_t i = 0; i < 12; ++i) cond.seasonality[i] = s[i].get<double>();
    }
    for (const auto& titem : citem.at("treatments")) {
      TreatmentScenario treat;
      treat.claim_type = claimTypeFromString(titem.value("claim_type", std::string("pharmacy")));
      for (const auto& [dim, code] : titem.at("attributes").items())
        treat.attributes.emplace_back(dim, code.get<std::string>());
      treat.utilization = titem.at("utilization").get<double>();
      treat.intensity = titem.at("intensity").get<double>();
      treat.price = titem.at("price").get<double>();
      cond.treatments.push_back(std::move(treat));
    }
    spec.conditions.push_back(std::move(cond));
  }
  for (const auto& eitem : doc.value("events", json::array())) {
    InjectedEvent ev;
    ev.kind = eventKindFromString(eitem.at("kind").get<std::string>());
    ev.product = eitem.value("product", std::string{});
    ev.condition = eitem.value("condition", std::string{});
    ev.partner = eitem.value("partner", std::string{});
    ev.kb_group = eitem.value("kb_group", std::string{});
    ev.period = eitem.at("period").get<int>();
    ev.magnitude = eitem.at("magnitude").get<double>();
    spec.events.push_back(std::move(ev));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return spec;
}

inline json manifestToJson(const GroundTruth& truth) {
  json events = json::array();
  for (const auto& ev : truth.events) {
    json e;
    e["kind"] = toString(ev.kind);
    if (!ev.product.empty()) e["product"] = ev.product;
    if (!ev.condition.empty()) e["condition"] = ev.condition;
    if (!ev.partner.empty()) e["partner"] = ev.partner;
    if (!ev.kb_group.empty()) e["kb_group"] = ev.kb_group;
    e["onset"] = ev.onset;
    e["direction"] = toString(ev.direction);
    e["kpi"] = toString(ev.kpi);
    e["magnitude"] = ev.magnitude;
    events.push_back(std::move(e));
  }
  return json{{"seed", truth.seed}, {"events", std::move(events)}};
}

// ---------------------------------------------------------------------------
// Learned thresholds cache

inline json thresholdsToJson(const ThresholdSet& thr) {
  json tiers;
  for (std::size_t i = 0; i < kTierCount; ++i) {
    tiers[toString(static_cast<Tier>(i))] = {{"h_up", thr.tiers[i].h_up},
                                             {"h_down", thr.tiers[i].h_down},
                                             {"target_far", thr.target_far[i]}};
  }
  return json{{"drift_k", thr.drift_k}, {"tiers", std::move(tiers)}};
}

inline ThresholdSet thresholdsFromJson(const json& doc) {
  ThresholdSet thr;
  thr.drift_k = doc.at("drift_k").get<double>();
  for (std::size_t i = 0; i < kTierCount; ++i) {
    const auto& t = doc.at("tiers").at(toString(static_cast<Tier>(i)));
    thr.tiers[i].h_up = t.at("h_up").get<double>();
    thr.tiers[i].h_down = t.at("h_down").get<double>();
    thr.target_far[i] = t.at("target_far").get<double>();
  }
  thr.validate();
  return thr;
}

// ---------------------------------------------------------------------------
// Engine configuration

struct DetectionConfig {
  double drift_k = 0.5;
  double censor_cap = 8.0;
  std::array<double, kTierCount> targets{0.10, 0.05, 0.01};
  NullModelSpec null_model;  // series_length filled from the horizon
  std::size_t n_sims = 10000;
  ThresholdGrid grid;
  CusumMode mode = CusumMode::non_restarting;
  ReportingRule reporting = ReportingRule::end_of_window;
  std::optional<std::string> thresholds_cache;
};

struct OffsetsConfig {
  std::optional<std::string> kb_path;
  Confidence min_confidence = Confidence::S;
};

struct CategoryRules {
  double rarity_prevalence = 5e-4;  // 5 per 10,000 member-months
};

struct RunConfig {
  std::string claims_path;
  std::string enrollment_path;
  std::string viewpoints_path;
  PeriodRange horizon{};
  int lag = 12;
  double w = 1.0;  // EWA weight
  DetectionConfig detection;
  OffsetsConfig offsets;
  CategoryRules categories;
  Confidence report_confidence = Confidence::M;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool export_trajectories = false;

  void validate() const {
    if (horizon.end - horizon.start < lag + 1)
      throw InputError("run config: horizon shorter than lag + 2 periods");
    if (!(w > 0.0) || w > 1.0) throw InputError("run config: w must be in (0,1]");
    if (!(detection.censor_cap > 0.0)) throw InputError("run config: censor_cap must be > 0");
    if (detection.drift_k < 0.0) throw InputError("run config: drift k must be >= 0");
  }
};

inline RunConfig parseRunConfig(const json& doc) {
  RunConfig cfg;
  cfg.claims_path = doc.at("claims").get<std::string>();
  cfg.enrollment_path = doc.at("enrollment").get<std::string>();
  cfg.viewpoints_path = doc.at("viewpoints").get<std::string>();
  cfg.horizon.start = doc.at("horizon").at("start").get<int>();
  cfg.horizon.end = doc.at("horizon").at("end").get<int>();
  cfg.lag = doc.value("lag", 12);
  cfg.w = doc.value("w", 1.0);
  if (doc.contains("detection")) {
    const auto& d = doc["detection"];
    cfg.detection.drift_k = d.value("k", 0.5);
    cfg.detection.censor_cap = d.value("censor_cap", 8.0);
    if (d.contains("targets")) {
      cfg.detection.targets[0] = d["targets"].value("moderate", 0.10);
      cfg.detection.targets[1] = d["targets"].value("strong", 0.05);
      cfg.detection.targets[2] = d["targets"].value("very_strong", 0.01);
    }
    if (d.contains("null_model")) {
      const auto& nm = d["null_model"];
      const std::string kind = nm.value("kind", std::string("gaussian_white_noise"));
      if (kind == "gaussian_white_noise") {
        cfg.detection.null_model.kind = NullModelKind::gaussian_white_noise;
      } else if (kind == "arma") {
        cfg.detection.null_model.kind = NullModelKind::arma;
        for (const auto& v : nm.value("ar", json::array()))
          cfg.detection.null_model.arma.ar.push_back(v.get<double>());
        for (const auto& v : nm.value("ma", json::array()))
          cfg.detection.null_model.arma.ma.push_back(v.get<double>());
        cfg.detection.null_model.arma.innovation_variance = nm.value("innovation_variance", 1.0);
      } else {
        throw InputError("run config: unknown null model kind '" + kind + "'");
      }
    }
    cfg.detection.n_sims = d.value("n_sims", 10000);
    if (d.contains("grid")) {
      cfg.detection.grid.start = d["grid"].value("start", 0.0);
      cfg.detection.grid.stop = d["grid"].value("stop", 30.0);
      cfg.detection.grid.step = d["grid"].value("step", 0.25);
    }
    cfg.detection.mode = cusumModeFromString(d.value("mode", std::string("non_restarting")));
    cfg.detection.reporting =
        reportingRuleFromString(d.value("reporting", std::string("end_of_window")));
    if (d.contains("thresholds_cache"))
      cfg.detection.thresholds_cache = d["thresholds_cache"].get<std::string>();
  }
  if (doc.contains("offsets")) {
    const auto& o = doc["offsets"];
    if (o.contains("kb")) cfg.offsets.kb_path = o["kb"].get<std::string>();
    cfg.offsets.min_confidence = confidenceFromString(o.value("min_confidence", std::string("S")));
  }
  if (doc.contains("categories"))
    cfg.categories.rarity_prevalence = doc["categories"].value("rarity_prevalence", 5e-4);
  cfg.report_confidence = confidenceFromString(doc.value("report_confidence", std::string("M")));
  cfg.output_dir = doc.value("output_dir", std::string("out"));
  cfg.seed = doc.value("seed", 0ULL);
  cfg.export_trajectories = doc.value("export_trajectories", false);
  cfg.validate();
  return cfg;
}

/// Stable digest of the canonical JSON form, recorded in run manifests.
inline std::string configDigest(const json& doc) {
  const std::string canon = doc.dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon)));
  return std::string(buf);
}

}  // namespace surveil
