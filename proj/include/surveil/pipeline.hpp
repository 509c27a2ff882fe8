#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "surveil/aggregate.hpp"
#include "surveil/categorize.hpp"
#include "surveil/change_series.hpp"
#include "surveil/config.hpp"
#include "surveil/csv.hpp"
#include "surveil/cusum.hpp"
#include "surveil/impact_tree.hpp"
#include "surveil/migration.hpp"
#include "surveil/offsets.hpp"
#include "surveil/ranking.hpp"
#include "surveil/report.hpp"
#include "surveil/threshold_learn.hpp"

namespace surveil {

/// Everything one surveillance run produces, before serialization. Tests and
/// the acceptance suite consume the in-memory form; writeRunOutputs persists
/// it deterministically.
struct PipelineResult {
  std::vector<DriverReport> reports;  // one per category, kAllCategories order
  std::vector<ImpactRecord> records;  // every qualified key, ranked per level
  std::vector<OffsetNetwork> networks;
  std::vector<MigrationResult> migrations;
  std::vector<OffsetImpact> offset_impacts;
  ThresholdSet thresholds;
  AggregateStats stats;
  std::size_t keys_aggregated = 0;
  std::size_t keys_qualified = 0;
  std::size_t keys_flagged = 0;
  std::vector<std::pair<std::string, std::string>> trajectory_exports;  // filename, bytes
  json run_manifest;
};

namespace detail {

inline DetectionResult detectRatio(const RatioSeries& ratio, const RunConfig& cfg,
                                   const ThresholdSet& thresholds) {
  try {
    const ChangeSeries cs = buildChangeSeries(ratio, cfg.lag, cfg.detection.censor_cap);
    return runCusum(cs.updates(), thresholds, cfg.detection.mode, cfg.detection.reporting,
                    cfg.lag + 1);
  } catch (const std::invalid_argument&) {
    return DetectionResult{};  // degenerate series: no evidence either way
  }
}

/// Signed EWA of the use change over the window's common support; zero when
/// nothing is defined.
inline double useChangeEwa(const RatioSeries& use, const ImpactConfig& icfg) {
  const std::size_t n = static_cast<std::size_t>(icfg.P - icfg.T);
  std::vector<double> c(n, 0.0);
  std::vector<bool> support(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = static_cast<std::size_t>(icfg.T) + 1 + i;
    const std::size_t past = t - static_cast<std::size_t>(icfg.T);
    if (use.defined[t] && use.defined[past]) {
      c[i] = use.value[t] - use.value[past];
      support[i] = true;
    }
  }
  if (supportSize(support) == 0) return 0.0;
  return ewaMasked(c, support, icfg.w);
}

/// Prior-year average price per service unit over the window.
inline std::optional<double> baselineUnitCost(const RatioSeries& price, const ImpactConfig& icfg) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int t = icfg.T + 1; t <= icfg.P; ++t) {
    const std::size_t past = static_cast<std::size_t>(t - icfg.T);
    if (price.defined[past]) {
      sum += price.value[past];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

inline const DecompositionNode* findChild(const DecompositionNode& root, RatioKind kind) {
  for (const auto& child : root.children)
    if (child.factor_name == toString(kind)) return &child;
  return nullptr;
}

inline std::string sanitizeFilename(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  return s;
}

}  // namespace detail

/// Learned-threshold acquisition honoring the cache path: an existing cache
/// is loaded, a missing one is learned and written, no path means in-memory
/// calibration only.
inline ThresholdSet acquireThresholds(const RunConfig& cfg) {
  NullModelSpec null_model = cfg.detection.null_model;
  null_model.series_length = (cfg.horizon.end - cfg.horizon.start) - cfg.lag;
  if (cfg.detection.thresholds_cache.has_value() &&
      std::filesystem::exists(*cfg.detection.thresholds_cache))
    return thresholdsFromJson(loadJsonFile(*cfg.detection.thresholds_cache));
  const ThresholdSet thresholds =
      learnThresholds(null_model, cfg.detection.drift_k, cfg.detection.targets,
                      cfg.detection.n_sims, cfg.detection.grid.values(),
                      cfg.detection.reporting, cfg.seed);
  if (cfg.detection.thresholds_cache.has_value()) {
    std::ofstream out(*cfg.detection.thresholds_cache);
    if (!out) throw InputError("cannot write thresholds cache: " + *cfg.detection.thresholds_cache);
    out << thresholdsToJson(thresholds).dump(2) << "\n";
  }
  return thresholds;
}

/// End-to-end batch run: aggregate -> qualify -> detect -> attribute ->
/// offsets -> categorize. Pure function of the config and input files;
/// identical inputs give identical results.
inline PipelineResult runPipeline(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<ViewpointSpec> specs = parseViewpointSpecs(loadJsonFile(cfg.viewpoints_path));

  Aggregator aggregator(specs, cfg.horizon);
  EnrollmentCsvFile(cfg.enrollment_path).forEach([&](const EnrollmentRecord& e) {
    aggregator.addEnrollment(e);
  });
  ClaimsCsvFile(cfg.claims_path).forEach([&](const ClaimRecord& c) { aggregator.addClaim(c); });
  AggregateResult aggregated = aggregator.finish();

  PipelineResult result;
  result.stats = aggregated.stats;
  result.keys_aggregated = aggregated.panel.size();

  const PeriodRange baseline{cfg.horizon.start, cfg.horizon.start + cfg.lag - 1};
  Panel qualified = aggregated.panel;
  for (const auto& spec : specs) qualified = qualify(qualified, spec, baseline);
  result.keys_qualified = qualified.size();

  result.thresholds = acquireThresholds(cfg);

  const int P = cfg.horizon.end - cfg.horizon.start;
  ImpactConfig icfg{cfg.w, cfg.lag, P};

  // Window totals for cost shares: per spec root over t = T+1..P.
  std::map<std::string, double> spec_window_cost;
  for (const auto& [key, series] : qualified) {
    if (!key.path.empty()) continue;
    double total = 0.0;
    for (int t = cfg.lag + 1; t <= P; ++t) total += series.total_cost[static_cast<std::size_t>(t)];
    spec_window_cost[key.spec_name] = total;
  }

  std::map<ViewpointKey, UseSignal> use_signals;
  std::map<ViewpointKey, std::optional<double>> unit_costs;

  for (const auto& [key, series] : qualified) {
    std::map<RatioKind, RatioSeries> ratios;
    for (RatioKind kind : kAllRatios) ratios.emplace(kind, deriveRatio(series, kind));

    ImpactRecord record;
    record.key = key;
    for (RatioKind kind : kAllRatios)
      record.detections.emplace(kind, detail::detectRatio(ratios.at(kind), cfg, result.thresholds));

    record.decomposition = buildImpactTree(ratios, icfg);
    record.total_impact = record.decomposition.impact;
    record.rate = record.decomposition.rate;
    record.rate_defined = record.decomposition.rate_defined;

    double window_cost = 0.0;
    for (int t = cfg.lag + 1; t <= P; ++t)
      window_cost += series.total_cost[static_cast<std::size_t>(t)];
    const double denom = spec_window_cost.count(key.spec_name) != 0
                             ? spec_window_cost.at(key.spec_name)
                             : 0.0;
    record.cost_share = denom > 0.0 ? window_cost / denom : 0.0;

    const RatioSeries& prevalence = ratios.at(RatioKind::prevalence);
    double prev_sum = 0.0;
    std::size_t prev_n = 0;
    for (int t = 0; t < cfg.lag; ++t) {
      if (prevalence.defined[static_cast<std::size_t>(t)]) {
        prev_sum += prevalence.value[static_cast<std::size_t>(t)];
        ++prev_n;
      }
    }
    record.baseline_prevalence = prev_n > 0 ? prev_sum / static_cast<double>(prev_n) : 0.0;

    use_signals.emplace(key, UseSignal{record.detections.at(RatioKind::use),
                                       detail::useChangeEwa(ratios.at(RatioKind::use), icfg)});
    unit_costs.emplace(key, detail::baselineUnitCost(ratios.at(RatioKind::price), icfg));

    result.records.push_back(std::move(record));
  }

  // Ranking within each (spec, depth) level group, for the total impact, the
  // cost share, and the price/use factor columns.
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> level_groups;
  for (std::size_t i = 0; i < result.records.size(); ++i)
    level_groups[{result.records[i].key.spec_name, result.records[i].key.depth()}].push_back(i);

  std::vector<int> price_ranks(result.records.size(), 0);
  std::vector<int> use_ranks(result.records.size(), 0);
  for (auto& [level, indices] : level_groups) {
    std::vector<ImpactRecord*> group;
    group.reserve(indices.size());
    for (std::size_t i : indices) group.push_back(&result.records[i]);
    auto rank_into = [&](auto impact_of, std::vector<int>* sink) {
      const std::vector<int> ranks = signedRanks(
          group, impact_of, [](const ImpactRecord* r) { return r->cost_share; },
          [](const ImpactRecord* r) { return r->key; });
      for (std::size_t g = 0; g < indices.size(); ++g) (*sink)[indices[g]] = ranks[g];
    };
    std::vector<int> total_ranks(indices.size(), 0);
    {
      const std::vector<int> ranks = signedRanks(
          group, [](const ImpactRecord* r) { return r->total_impact; },
          [](const ImpactRecord* r) { return r->cost_share; },
          [](const ImpactRecord* r) { return r->key; });
      for (std::size_t g = 0; g < indices.size(); ++g)
        result.records[indices[g]].rank = ranks[g];
    }
    {
      const std::vector<int> ranks = signedRanks(
          group, [](const ImpactRecord* r) { return r->cost_share; },
          [](const ImpactRecord* r) { return r->cost_share; },
          [](const ImpactRecord* r) { return r->key; });
      for (std::size_t g = 0; g < indices.size(); ++g)
        result.records[indices[g]].cost_share_rank = ranks[g];
    }
    rank_into(
        [](const ImpactRecord* r) {
          const DecompositionNode* node = detail::findChild(r->decomposition, RatioKind::price);
          return node != nullptr ? node->impact : 0.0;
        },
        &price_ranks);
    rank_into(
        [](const ImpactRecord* r) {
          const DecompositionNode* node = detail::findChild(r->decomposition, RatioKind::use);
          return node != nullptr ? node->impact : 0.0;
        },
        &use_ranks);
  }

  for (auto& record : result.records) {
    record.category = categorize(record, cfg.categories);
    if (record.detections.at(RatioKind::cost_per_enrollee).flagged(cfg.report_confidence))
      ++result.keys_flagged;
  }

  if (cfg.export_trajectories) {
    for (const auto& record : result.records) {
      const DetectionResult& det = record.detections.at(RatioKind::cost_per_enrollee);
      if (!det.flagged(cfg.report_confidence)) continue;
      const auto& series = qualified.at(record.key);
      try {
        const ChangeSeries cs = buildChangeSeries(deriveRatio(series, RatioKind::cost_per_enrollee),
                                                  cfg.lag, cfg.detection.censor_cap);
        std::ostringstream bytes;
        exportTrajectory(cs, det, bytes);
        result.trajectory_exports.emplace_back(
            detail::sanitizeFilename(record.key.display()) + "-cost_per_enrollee.csv",
            bytes.str());
      } catch (const std::invalid_argument&) {
        // degenerate series cannot be exported
      }
    }
  }

  // Utilization offsets over the comparability KB, priced at baseline unit
  // costs held constant.
  double member_month_scale = 0.0;
  {
    std::vector<double> window_mm;
    for (int t = cfg.lag + 1; t <= P; ++t)
      window_mm.push_back(aggregated.population_member_months[static_cast<std::size_t>(t)]);
    if (!window_mm.empty()) member_month_scale = ewa(window_mm, cfg.w);
  }
  if (cfg.offsets.kb_path.has_value() && member_month_scale > 0.0) {
    const ComparabilityKB kb = parseKb(loadJsonFile(*cfg.offsets.kb_path));
    result.networks = buildNetworks(use_signals, kb, {cfg.horizon.start + cfg.lag + 1, cfg.horizon.end},
                                    cfg.offsets.min_confidence, member_month_scale);
    for (const auto& net : result.networks) {
      MigrationResult migration = solveMigration(net);
      std::map<ViewpointKey, double> costs;
      for (const auto& member : net.originators) {
        if (!unit_costs.at(member).has_value())
          throw std::runtime_error("offsets: missing unit cost for treatment " + member.display());
        costs[member] = *unit_costs.at(member);
      }
      for (const auto& member : net.receivers) {
        if (!unit_costs.at(member).has_value())
          throw std::runtime_error("offsets: missing unit cost for treatment " + member.display());
        costs[member] = *unit_costs.at(member);
      }
      result.offset_impacts.push_back(
          offsetCostImpact(migration, net, costs, member_month_scale));
      result.migrations.push_back(std::move(migration));
    }
  }

  // Project records into per-category reports.
  std::map<Category, DriverReport> reports;
  for (Category c : kAllCategories) reports[c] = DriverReport{c, {}, {}};
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const ImpactRecord& record = result.records[i];
    ReportRow row;
    row.label = record.key.display();
    row.cost_share = record.cost_share;
    row.share_rank = record.cost_share_rank;
    row.impact = record.total_impact;
    row.rank = record.rank;
    row.rate = record.rate;
    row.rate_defined = record.rate_defined;
    auto fill_factor = [&](RatioKind kind, int rank, FactorCell& cell) {
      const DecompositionNode* node = detail::findChild(record.decomposition, kind);
      if (node == nullptr) return;
      cell.present = true;
      cell.impact = node->impact;
      cell.rank = rank;
      cell.rate = node->rate;
      cell.rate_defined = node->rate_defined;
      const DetectionResult& det = record.detections.at(kind);
      cell.trend = det.direction;
      cell.conf = det.confidence;
    };
    fill_factor(RatioKind::price, price_ranks[i], row.price);
    fill_factor(RatioKind::use, use_ranks[i], row.use);
    reports.at(record.category).rows.push_back(std::move(row));
  }
  for (auto& [category, report] : reports) {
    std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
      const auto key = [](const ReportRow& r) {
        return std::tuple(r.rank == 0, std::abs(r.rank), r.rank < 0, r.label);
      };
      return key(a) < key(b);
    });
  }
  // Offset annexes attach to every category containing a network member.
  for (std::size_t n = 0; n < result.networks.size(); ++n) {
    const OffsetNetwork& net = result.networks[n];
    const OffsetImpact& impact = result.offset_impacts[n];
    OffsetAnnex annex;
    annex.network_id = net.group_id;
    annex.total_migration = result.migrations[n].total_migration;
    annex.total_cost_impact = impact.total_cost_impact;
    for (const auto& [key, delta] : impact.utilization_delta) {
      double cost_delta = 0.0;
      for (const auto& [ckey, cdelta] : impact.cost_delta)
        if (ckey == key) cost_delta = cdelta;
      annex.rows.push_back(OffsetAnnexRow{key.display(), delta, cost_delta});
    }
    std::set<Category> touched;
    for (const auto& record : result.records) {
      bool member = false;
      for (const auto& k : net.originators) member = member || k == record.key;
      for (const auto& k : net.receivers) member = member || k == record.key;
      if (member) touched.insert(record.category);
    }
    for (Category c : touched) reports.at(c).annexes.push_back(annex);
  }
  for (Category c : kAllCategories) result.reports.push_back(std::move(reports.at(c)));

  return result;
}

/// Builds the run manifest: config digest, seed, thresholds, and stage counts.
inline json buildRunManifest(const PipelineResult& result, const RunConfig& cfg,
                             const json& canonical_config) {
  json counts;
  counts["claims_seen"] = result.stats.claims_seen;
  counts["claims_rejected"] = result.stats.claims_rejected;
  counts["enrollment_rows"] = result.stats.enrollment_rows;
  counts["keys_aggregated"] = result.keys_aggregated;
  counts["keys_qualified"] = result.keys_qualified;
  counts["keys_flagged"] = result.keys_flagged;
  counts["offset_networks"] = result.networks.size();
  std::size_t rows = 0;
  for (const auto& report : result.reports) rows += report.rows.size();
  counts["report_rows"] = rows;
  return json{{"config_digest", configDigest(canonical_config)},
              {"seed", cfg.seed},
              {"horizon", {{"start", cfg.horizon.start}, {"end", cfg.horizon.end}}},
              {"thresholds", thresholdsToJson(result.thresholds)},
              {"counts", std::move(counts)}};
}

/// Writes the manifest and all reports under the output directory with
/// content-hash filenames plus a `latest.json` index. Identical runs produce
/// identical bytes and identical filenames.
inline std::filesystem::path writeRunOutputs(PipelineResult& result, const RunConfig& cfg,
                                             const json& canonical_config) {
  namespace fs = std::filesystem;
  const fs::path outdir(cfg.output_dir);
  fs::create_directories(outdir);
  auto content_name = [](const std::string& stem, const std::string& bytes,
                         const std::string& ext) {
    char digest[13];
    std::snprintf(digest, sizeof(digest), "%012llx",
                  static_cast<unsigned long long>(fnv1a64(bytes) & 0xffffffffffffULL));
    return stem + "-" + digest + ext;
  };
  auto write_file = [&](const fs::path& name, const std::string& bytes) {
    std::ofstream out(outdir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + (outdir / name).string());
    out << bytes;
  };

  result.run_manifest = buildRunManifest(result, cfg, canonical_config);
  const std::string manifest_bytes = result.run_manifest.dump(2) + "\n";
  const std::string manifest_name = content_name("run-manifest", manifest_bytes, ".json");
  write_file(manifest_name, manifest_bytes);

  json index;
  index["manifest"] = manifest_name;
  json report_index;
  for (const auto& report : result.reports) {
    const std::string stem = std::string("report-") + toString(report.category);
    const std::string dsv = renderReport(report, ReportFormat::dsv);
    const std::string structured = renderReport(report, ReportFormat::structured);
    const std::string table = renderReport(report, ReportFormat::text_table);
    const std::string dsv_name = content_name(stem, dsv, ".csv");
    const std::string json_name = content_name(stem, structured, ".json");
    const std::string table_name = content_name(stem, table, ".txt");
    write_file(dsv_name, dsv);
    write_file(json_name, structured);
    write_file(table_name, table);
    report_index[toString(report.category)] =
        json{{"dsv", dsv_name}, {"structured", json_name}, {"text_table", table_name}};
  }
  index["reports"] = std::move(report_index);
  if (!result.trajectory_exports.empty()) {
    fs::create_directories(outdir / "trajectories");
    for (const auto& [name, bytes] : result.trajectory_exports)
      write_file(fs::path("trajectories") / name, bytes);
  }
  write_file("latest.json", index.dump(2) + "\n");
  return outdir / "latest.json";
}

}  // namespace surveil
