#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "surveil/csv.hpp"
#include "surveil/migration.hpp"
#include "surveil/ranking.hpp"

namespace surveil {

using json = nlohmann::json;

enum class ReportFormat { dsv, structured, text_table };

inline ReportFormat reportFormatFromString(const std::string& s) {
  if (s == "dsv") return ReportFormat::dsv;
  if (s == "structured") return ReportFormat::structured;
  if (s == "text_table") return ReportFormat::text_table;
  throw InputError("unknown report format: '" + s + "'");
}

/// One factor column block (impact / rank / rate / trend-and-confidence).
struct FactorCell {
  bool present = false;
  double impact = 0.0;
  int rank = 0;
  double rate = 0.0;
  bool rate_defined = false;
  Direction trend = Direction::none;
  Confidence conf = Confidence::N;
};

/// One report row, mirroring the driver tables: cost share and its rank,
/// total impact with rank and rate, then the price and use factor blocks.
struct ReportRow {
  std::string label;
  double cost_share = 0.0;
  int share_rank = 0;
  double impact = 0.0;
  int rank = 0;
  double rate = 0.0;
  bool rate_defined = false;
  FactorCell price;
  FactorCell use;
};

struct OffsetAnnexRow {
  std::string label;
  double utilization_delta = 0.0;
  double cost_delta = 0.0;
};

struct OffsetAnnex {
  std::string network_id;
  double total_migration = 0.0;
  double total_cost_impact = 0.0;
  std::vector<OffsetAnnexRow> rows;
};

struct DriverReport {
  Category category = Category::pharmacy_drug;
  std::vector<ReportRow> rows;
  std::vector<OffsetAnnex> annexes;
};

// ---------------------------------------------------------------------------
// Display formatting (text_table); dsv keeps full precision instead.

/// Currency to cents with a leading $, sign before the $.
inline std::string formatMoney(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s$%.2f", v < 0 && std::round(v * 100.0) != 0.0 ? "-" : "",
                std::abs(v));
  return std::string(buf);
}

/// Rates as percent at three significant figures (262%, -63.0%, 4.36%).
inline std::string formatRate(double rate, bool defined) {
  if (!defined) return "n/a";
  const double pct = rate * 100.0;
  if (pct == 0.0) return "0%";
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(pct))));
  const int decimals = std::clamp(2 - magnitude, 0, 6);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f%%", decimals, pct);
  return std::string(buf);
}

/// Trend arrow plus confidence letter: up/down map to their arrows, flat or
/// mixed trends render as an up-down arrow.
inline std::string formatTrendConfidence(Direction d, Confidence c) {
  const char* arrow = "\u2195";
  if (d == Direction::up) arrow = "\u2191";
  if (d == Direction::down) arrow = "\u2193";
  return std::string(arrow) + toString(c);
}

/// Cost share as percent points with two decimals (0.06 for 0.0006).
inline std::string formatShare(double share) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", share * 100.0);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// DSV

namespace detail {

inline const char* kDsvHeader =
    "category,label,cost_share,share_rank,impact,rank,rate,"
    "price_impact,price_rank,price_rate,price_trend,price_conf,"
    "use_impact,use_rank,use_rate,use_trend,use_conf";

inline void appendFactorDsv(std::ostringstream& out, const FactorCell& f) {
  if (!f.present) {
    out << ",,,,,";
    return;
  }
  out << "," << formatDouble(f.impact) << "," << f.rank << ","
      << (f.rate_defined ? formatDouble(f.rate) : "") << "," << toString(f.trend) << ","
      << toString(f.conf);
}

inline FactorCell parseFactorDsv(const std::vector<std::string_view>& f, std::size_t base) {
  FactorCell cell;
  if (f[base + 3].empty() && f[base].empty()) return cell;  // absent block
  cell.present = true;
  cell.impact = parseDouble(f[base], "dsv factor impact");
  cell.rank = static_cast<int>(parseLong(f[base + 1], "dsv factor rank"));
  if (!f[base + 2].empty()) {
    cell.rate = parseDouble(f[base + 2], "dsv factor rate");
    cell.rate_defined = true;
  }
  cell.trend = directionFromString(std::string(f[base + 3]));
  cell.conf = confidenceFromString(std::string(f[base + 4]));
  return cell;
}

}  // namespace detail

inline std::string renderDsv(const DriverReport& report) {
  std::ostringstream out;
  out << detail::kDsvHeader << "\n";
  for (const auto& row : report.rows) {
    out << toString(report.category) << "," << row.label << "," << formatDouble(row.cost_share)
        << "," << row.share_rank << "," << formatDouble(row.impact) << "," << row.rank << ","
        << (row.rate_defined ? formatDouble(row.rate) : "");
    detail::appendFactorDsv(out, row.price);
    detail::appendFactorDsv(out, row.use);
    out << "\n";
  }
  return out.str();
}

inline DriverReport parseDsv(const std::string& bytes) {
  DriverReport report;
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line)) throw InputError("dsv report: empty input");
  if (line != detail::kDsvHeader) throw InputError("dsv report: unexpected header");
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string_view> f = splitCsvLine(line);
    if (f.size() != 17) throw InputError("dsv report: bad field count");
    ReportRow row;
    const Category category = categoryFromString(std::string(f[0]));
    if (first) {
      report.category = category;
      first = false;
    } else if (category != report.category) {
      throw InputError("dsv report: mixed categories in one report");
    }
    row.label = std::string(f[1]);
    row.cost_share = parseDouble(f[2], "dsv cost_share");
    row.share_rank = static_cast<int>(parseLong(f[3], "dsv share_rank"));
    row.impact = parseDouble(f[4], "dsv impact");
    row.rank = static_cast<int>(parseLong(f[5], "dsv rank"));
    if (!f[6].empty()) {
      row.rate = parseDouble(f[6], "dsv rate");
      row.rate_defined = true;
    }
    row.price = detail::parseFactorDsv(f, 7);
    row.use = detail::parseFactorDsv(f, 12);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Structured (JSON)

inline json reportToJson(const DriverReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json factor = json::object();
    auto factor_json = [](const FactorCell& f) {
      json j;
      j["present"] = f.present;
      j["impact"] = f.impact;
      j["rank"] = f.rank;
      if (f.rate_defined) j["rate"] = f.rate;
      j["trend"] = toString(f.trend);
      j["confidence"] = toString(f.conf);
      return j;
    };
    json r;
    r["label"] = row.label;
    r["cost_share"] = row.cost_share;
    r["share_rank"] = row.share_rank;
    r["impact"] = row.impact;
    r["rank"] = row.rank;
    if (row.rate_defined) r["rate"] = row.rate;
    r["price"] = factor_json(row.price);
    r["use"] = factor_json(row.use);
    rows.push_back(std::move(r));
  }
  json annexes = json::array();
  for (const auto& annex : report.annexes) {
    json rows_json = json::array();
    for (const auto& arow : annex.rows)
      rows_json.push_back(json{{"label", arow.label},
                               {"utilization_delta", arow.utilization_delta},
                               {"cost_delta", arow.cost_delta}});
    annexes.push_back(json{{"network_id", annex.network_id},
                           {"total_migration", annex.total_migration},
                           {"total_cost_impact", annex.total_cost_impact},
                           {"rows", std::move(rows_json)}});
  }
  return json{{"category", toString(report.category)},
              {"rows", std::move(rows)},
              {"offset_annexes", std::move(annexes)}};
}

inline DriverReport reportFromJson(const json& doc) {
  DriverReport report;
  report.category = categoryFromString(doc.at("category").get<std::string>());
  auto factor_from = [](const json& j) {
    FactorCell f;
    f.present = j.value("present", false);
    f.impact = j.value("impact", 0.0);
    f.rank = j.value("rank", 0);
    if (j.contains("rate")) {
      f.rate = j["rate"].get<double>();
      f.rate_defined = true;
    }
    f.trend = directionFromString(j.value("trend", std::string("none")));
    f.conf = confidenceFromString(j.value("confidence", std::string("N")));
    return f;
  };
  for (const auto& r : doc.value("rows", json::array())) {
    ReportRow row;
    row.label = r.at("label").get<std::string>();
    row.cost_share = r.value("cost_share", 0.0);
    row.share_rank = r.value("share_rank", 0);
    row.impact = r.value("impact", 0.0);
    row.rank = r.value("rank", 0);
    if (r.contains("rate")) {
      row.rate = r["rate"].get<double>();
      row.rate_defined = true;
    }
    row.price = factor_from(r.at("price"));
    row.use = factor_from(r.at("use"));
    report.rows.push_back(std::move(row));
  }
  for (const auto& a : doc.value("offset_annexes", json::array())) {
    OffsetAnnex annex;
    annex.network_id = a.at("network_id").get<std::string>();
    annex.total_migration = a.value("total_migration", 0.0);
    annex.total_cost_impact = a.value("total_cost_impact", 0.0);
    for (const auto& r : a.value("rows", json::array()))
      annex.rows.push_back(OffsetAnnexRow{r.at("label").get<std::string>(),
                                          r.value("utilization_delta", 0.0),
                                          r.value("cost_delta", 0.0)});
    report.annexes.push_back(std::move(annex));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Text table

namespace detail {

inline std::size_t displayWidth(const std::string& s) {
  // The only multi-byte glyphs emitted are the trend arrows (3 bytes, 1 column).
  std::size_t width = 0;
  for (std::size_t i = 0; i < s.size();) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      i += 1;
    } else if ((c >> 5) == 0x6) {
      i += 2;
    } else if ((c >> 4) == 0xe) {
      i += 3;
    } else {
      i += 4;
    }
    ++width;
  }
  return width;
}

inline std::string padLeft(const std::string& s, std::size_t width) {
  const std::size_t w = displayWidth(s);
  return w >= width ? s : std::string(width - w, ' ') + s;
}

}  // namespace detail

/// Human-readable table mirroring the driver-report layout: cost share block,
/// total change block, then price and use factor blocks with trend arrows.
inline std::string renderTextTable(const DriverReport& report) {
  static const std::vector<std::string> headers = {
      "viewpoint", "%",      "rank", "impact", "rank",   "rate", "price",  "rank",
      "rate",      "t&c",    "use",  "rank",   "rate",   "t&c"};
  std::vector<std::vector<std::string>> grid;
  for (const auto& row : report.rows) {
    std::vector<std::string> cells;
    cells.push_back(row.label);
    cells.push_back(formatShare(row.cost_share));
    cells.push_back(std::to_string(row.share_rank));
    cells.push_back(formatMoney(row.impact));
    cells.push_back(std::to_string(row.rank));
    cells.push_back(formatRate(row.rate, row.rate_defined));
    auto factor_cells = [&cells](const FactorCell& f) {
      if (f.present) {
        cells.push_back(formatMoney(f.impact));
        cells.push_back(std::to_string(f.rank));
        cells.push_back(formatRate(f.rate, f.rate_defined));
        cells.push_back(formatTrendConfidence(f.trend, f.conf));
      } else {
        cells.insert(cells.end(), {"-", "-", "-", "-"});
      }
    };
    factor_cells(row.price);
    factor_cells(row.use);
    grid.push_back(std::move(cells));
  }
  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    widths[c] = detail::displayWidth(headers[c]);
    for (const auto& row : grid) widths[c] = std::max(widths[c], detail::displayWidth(row[c]));
  }
  std::ostringstream out;
  out << "category: " << toString(report.category) << "\n";
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << (c == 0 ? "" : " | ") << detail::padLeft(cells[c], widths[c]);
    out << "\n";
  };
  emit_row(headers);
  std::size_t total_width = 0;
  for (std::size_t c = 0; c < widths.size(); ++c) total_width += widths[c] + (c == 0 ? 0 : 3);
  out << std::string(total_width, '-') << "\n";
  for (const auto& row : grid) emit_row(row);
  for (const auto& annex : report.annexes) {
    out << "\noffset network " << annex.network_id << ": migrated "
        << formatDouble(annex.total_migration) << " units, cost impact "
        << formatMoney(annex.total_cost_impact) << " per member per period\n";
    for (const auto& arow : annex.rows)
      out << "  " << arow.label << ": " << formatDouble(arow.utilization_delta) << " units, "
          << formatMoney(arow.cost_delta) << " per member per period\n";
  }
  return out.str();
}

inline std::string renderReport(const DriverReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::dsv: return renderDsv(report);
    case ReportFormat::structured: return reportToJson(report).dump(2) + "\n";
    case ReportFormat::text_table: return renderTextTable(report);
  }
  throw InputError("unknown report format");
}

}  // namespace surveil
