#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "surveil/config.hpp"
#include "surveil/csv.hpp"
#include "surveil/pipeline.hpp"
#include "surveil/report.hpp"
#include "surveil/synthgen.hpp"

namespace {

namespace fs = std::filesystem;

int cmdGenerate(const std::string& scenario_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed_override) {
  surveil::ScenarioSpec spec = surveil::parseScenario(surveil::loadJsonFile(scenario_path));
  if (seed_override.has_value()) spec.seed = *seed_override;
  fs::create_directories(out_dir);

  std::set<std::string> dims{"therapeutic_class", "product_name"};
  for (const auto& cond : spec.conditions)
    for (const auto& treat : cond.treatments)
      for (const auto& [dim, code] : treat.attributes) dims.insert(dim);

  std::ofstream claims_out(fs::path(out_dir) / "claims.csv", std::ios::binary);
  std::ofstream enroll_out(fs::path(out_dir) / "enrollment.csv", std::ios::binary);
  if (!claims_out || !enroll_out) {
    std::cerr << "error: cannot write into " << out_dir << "\n";
    return 2;
  }
  surveil::ClaimsCsvWriter claims_writer(claims_out, {dims.begin(), dims.end()});
  surveil::EnrollmentCsvWriter enroll_writer(enroll_out);
  const surveil::GroundTruth truth = surveil::generate(
      spec, [&](const surveil::ClaimRecord& c) { claims_writer.write(c); },
      [&](const surveil::EnrollmentRecord& e) { enroll_writer.write(e); });

  std::ofstream manifest_out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  manifest_out << surveil::manifestToJson(truth).dump(2) << "\n";
  std::cout << "generated scenario into " << out_dir << " (" << truth.events.size()
            << " injected events)\n";
  return 0;
}

int cmdLearnThresholds(const std::string& config_path, std::optional<std::string> out_override) {
  surveil::json config_json = surveil::loadJsonFile(config_path);
  surveil::RunConfig cfg = surveil::parseRunConfig(config_json);
  if (out_override.has_value()) cfg.detection.thresholds_cache = *out_override;
  if (!cfg.detection.thresholds_cache.has_value())
    throw surveil::InputError("no thresholds cache path configured; pass --out");
  // Force a fresh calibration even when a cache already exists.
  surveil::NullModelSpec null_model = cfg.detection.null_model;
  null_model.series_length = (cfg.horizon.end - cfg.horizon.start) - cfg.lag;
  const surveil::ThresholdSet thresholds = surveil::learnThresholds(
      null_model, cfg.detection.drift_k, cfg.detection.targets, cfg.detection.n_sims,
      cfg.detection.grid.values(), cfg.detection.reporting, cfg.seed);
  std::ofstream out(*cfg.detection.thresholds_cache, std::ios::binary);
  if (!out)
    throw surveil::InputError("cannot write thresholds cache: " +
                              *cfg.detection.thresholds_cache);
  out << surveil::thresholdsToJson(thresholds).dump(2) << "\n";
  std::cout << "learned thresholds -> " << *cfg.detection.thresholds_cache << "\n";
  for (std::size_t i = 0; i < surveil::kTierCount; ++i)
    std::cout << "  " << surveil::toString(static_cast<surveil::Tier>(i)) << ": h = "
              << thresholds.tiers[i].h_up << " (target far " << thresholds.target_far[i] << ")\n";
  return 0;
}

int cmdRun(const std::string& config_path, std::optional<std::uint64_t> seed_override,
           std::optional<std::string> out_override) {
  surveil::json config_json = surveil::loadJsonFile(config_path);
  surveil::RunConfig cfg = surveil::parseRunConfig(config_json);
  if (seed_override.has_value()) {
    cfg.seed = *seed_override;
    config_json["seed"] = *seed_override;
  }
  if (out_override.has_value()) {
    cfg.output_dir = *out_override;
    config_json["output_dir"] = *out_override;
  }
  surveil::PipelineResult result = surveil::runPipeline(cfg);
  const fs::path index = surveil::writeRunOutputs(result, cfg, config_json);
  const auto& counts = result.run_manifest["counts"];
  std::cout << "run complete: " << counts["claims_seen"] << " claims ("
            << counts["claims_rejected"] << " rejected), " << counts["keys_qualified"]
            << " qualified keys, " << counts["keys_flagged"] << " flagged, "
            << counts["offset_networks"] << " offset networks\n"
            << "index: " << index.string() << "\n";
  return 0;
}

int cmdRender(const std::string& report_path, const std::string& format,
              std::optional<std::string> out_path) {
  const surveil::DriverReport report =
      surveil::reportFromJson(surveil::loadJsonFile(report_path));
  const std::string bytes =
      surveil::renderReport(report, surveil::reportFormatFromString(format));
  if (out_path.has_value()) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw surveil::InputError("cannot write: " + *out_path);
    out << bytes;
  } else {
    std::cout << bytes;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical KPI surveillance engine"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string generate_out = "data";
  std::optional<std::uint64_t> seed_override;
  auto* generate = app.add_subcommand("generate", "generate a synthetic claims dataset");
  generate->add_option("--scenario", scenario_path, "scenario JSON")->required();
  generate->add_option("--out", generate_out, "output directory");
  generate->add_option("--seed", seed_override, "override the scenario seed");

  std::string config_path;
  std::optional<std::string> thresholds_out;
  auto* learn = app.add_subcommand("learn-thresholds", "calibrate detection thresholds");
  learn->add_option("--config", config_path, "run config JSON")->required();
  learn->add_option("--out", thresholds_out, "thresholds cache to write");

  std::string run_config_path;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "execute the surveillance pipeline");
  run->add_option("--config", run_config_path, "run config JSON")->required();
  run->add_option("--seed", run_seed, "override the configured seed");
  run->add_option("--out", run_out, "override the output directory");

  std::string report_path;
  std::string render_format = "text_table";
  std::optional<std::string> render_out;
  auto* render = app.add_subcommand("render", "render a structured report");
  render->add_option("--report", report_path, "structured report JSON")->required();
  render->add_option("--format", render_format, "dsv | structured | text_table");
  render->add_option("--out", render_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmdGenerate(scenario_path, generate_out, seed_override);
    if (learn->parsed()) return cmdLearnThresholds(config_path, thresholds_out);
    if (run->parsed()) return cmdRun(run_config_path, run_seed, run_out);
    if (render->parsed()) return cmdRender(report_path, render_format, render_out);
  } catch (const surveil::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
