#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "surveil/report.hpp"

namespace {

using surveil::Category;
using surveil::Confidence;
using surveil::Direction;
using surveil::DriverReport;
using surveil::FactorCell;
using surveil::ReportFormat;
using surveil::ReportRow;

/// Row shaped like a drug driver's year-end summary: total impact $0.28 at
/// rank 75 / rate 262%, price impact $0.30 at rank 3 / rate 369% rising very
/// strongly, use impact -$0.02 at rank -90 / rate -17.3% drifting down.
ReportRow glumetzaShapedRow() {
  ReportRow row;
  row.label = "drugs:/pharmacy/biguanides/drugG";
  row.cost_share = 0.0006;
  row.share_rank = 75;
  row.impact = 0.28;
  row.rank = 75;
  row.rate = 2.62;
  row.rate_defined = true;
  row.price = FactorCell{true, 0.30, 3, 3.69, true, Direction::up, Confidence::VS};
  row.use = FactorCell{true, -0.02, -90, -0.173, true, Direction::down, Confidence::M};
  return row;
}

TEST(Render, MoneyAndRateFormats) {
  EXPECT_EQ(surveil::formatMoney(0.28), "$0.28");
  EXPECT_EQ(surveil::formatMoney(-0.25), "-$0.25");
  EXPECT_EQ(surveil::formatMoney(1.0), "$1.00");
  EXPECT_EQ(surveil::formatMoney(-0.0001), "$0.00");
  EXPECT_EQ(surveil::formatRate(2.62, true), "262%");
  EXPECT_EQ(surveil::formatRate(3.69, true), "369%");
  EXPECT_EQ(surveil::formatRate(-0.63, true), "-63.0%");
  EXPECT_EQ(surveil::formatRate(0.0436, true), "4.36%");
  EXPECT_EQ(surveil::formatRate(-0.173, true), "-17.3%");
  EXPECT_EQ(surveil::formatRate(0.119, true), "11.9%");
  EXPECT_EQ(surveil::formatRate(0.0, true), "0%");
  EXPECT_EQ(surveil::formatRate(1.0, false), "n/a");
}

TEST(Render, TrendConfidenceArrows) {
  EXPECT_EQ(surveil::formatTrendConfidence(Direction::up, Confidence::VS), "↑VS");
  EXPECT_EQ(surveil::formatTrendConfidence(Direction::down, Confidence::M), "↓M");
  EXPECT_EQ(surveil::formatTrendConfidence(Direction::none, Confidence::N), "↕N");
  EXPECT_EQ(surveil::formatTrendConfidence(Direction::mixed, Confidence::S), "↕S");
}

TEST(Render, TextTableCarriesTheExpectedCells) {
  DriverReport report;
  report.category = Category::pharmacy_drug;
  report.rows = {glumetzaShapedRow()};
  const std::string table = surveil::renderReport(report, ReportFormat::text_table);
  for (const char* cell : {"$0.28", "75", "262%", "$0.30", "3", "369%", "↑VS", "-$0.02",
                           "-90", "-17.3%", "↓M", "0.06"})
    EXPECT_NE(table.find(cell), std::string::npos) << "missing cell " << cell << "\n" << table;
}

TEST(Render, EmptyReportIsHeaderOnly) {
  DriverReport report;
  report.category = Category::declining_cost;
  const std::string dsv = surveil::renderReport(report, ReportFormat::dsv);
  EXPECT_EQ(dsv.find('\n'), dsv.size() - 1);  // single header line
  const auto parsed = surveil::parseDsv(dsv);
  EXPECT_TRUE(parsed.rows.empty());
  EXPECT_EQ(surveil::renderReport(parsed, ReportFormat::dsv), dsv);
}

TEST(Render, DsvRoundTripIsByteIdentical) {
  DriverReport report;
  report.category = Category::pharmacy_drug;
  report.rows = {glumetzaShapedRow()};
  ReportRow second = glumetzaShapedRow();
  second.label = "drugs:/pharmacy/biguanides/drugH";
  second.rate_defined = false;
  second.use.present = false;
  second.impact = -1.0 / 3.0;  // exercise non-terminating decimals
  report.rows.push_back(second);
  const std::string dsv = surveil::renderReport(report, ReportFormat::dsv);
  const DriverReport parsed = surveil::parseDsv(dsv);
  const std::string again = surveil::renderReport(parsed, ReportFormat::dsv);
  EXPECT_EQ(dsv, again);
  ASSERT_EQ(parsed.rows.size(), 2u);
  EXPECT_EQ(parsed.rows[0].impact, 0.28);
  EXPECT_FALSE(parsed.rows[1].rate_defined);
  EXPECT_FALSE(parsed.rows[1].use.present);
}

TEST(Render, StructuredRoundTripsThroughJson) {
  DriverReport report;
  report.category = Category::condition_management;
  report.rows = {glumetzaShapedRow()};
  surveil::OffsetAnnex annex;
  annex.network_id = "g1";
  annex.total_migration = 30.0;
  annex.total_cost_impact = -0.30;
  annex.rows = {{"drugs:/pharmacy/biguanides/drugG", -30.0, -0.6}};
  report.annexes = {annex};
  const std::string bytes = surveil::renderReport(report, ReportFormat::structured);
  const DriverReport parsed = surveil::reportFromJson(surveil::json::parse(bytes));
  EXPECT_EQ(parsed.category, report.category);
  ASSERT_EQ(parsed.annexes.size(), 1u);
  EXPECT_EQ(parsed.annexes[0].total_migration, 30.0);
  EXPECT_EQ(surveil::renderReport(parsed, ReportFormat::structured), bytes);
}

TEST(Render, UnknownFormatThrows) {
  EXPECT_THROW(surveil::reportFormatFromString("pdf"), surveil::InputError);
}

TEST(Render, MixedCategoryDsvRejected) {
  DriverReport a;
  a.category = Category::pharmacy_drug;
  a.rows = {glumetzaShapedRow()};
  std::string dsv = surveil::renderReport(a, ReportFormat::dsv);
  // Splice in a row claiming another category.
  std::string row = dsv.substr(dsv.find('\n') + 1);
  row.replace(0, std::string("pharmacy_drug").size(), "rare_diseases");
  dsv += row;
  EXPECT_THROW(surveil::parseDsv(dsv), surveil::InputError);
}

}  // namespace
