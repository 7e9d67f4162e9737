// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "json.hpp"
#include "lskdet/class_loss.hpp"
#include "lskdet/coco_io.hpp"
#include "lskdet/error.hpp"
#include "lskdet/report.hpp"

namespace lskdet {
namespace {

using testing_support::source_dir;

std::string table(const char* name) { return read_text_file(source_dir() / "paper_tables" / name); }

TEST(ResultsTable, Table5RoundTripsByteIdentically) {
  const std::string text = table("table5.csv");
  const auto rows = parse_results_table_csv(text);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(results_table_csv(rows), text);
}

TEST(ResultsTable, Table5TestRowValues) {
  const auto rows = parse_results_table_csv(table("table5.csv"));
  const ResultsRow& test = rows[0];
  EXPECT_EQ(test.label, "Test");
  EXPECT_DOUBLE_EQ(*test.report.ap, 45.7);
  EXPECT_DOUBLE_EQ(*test.report.ap75, 50.6);
  EXPECT_DOUBLE_EQ(*test.report.ap50, 66.8);
  ASSERT_EQ(test.report.per_class.size(), 15u);
  const double expect[15] = {55.4, 33.4, 50.9, 25.0, 66.1, 34.1, 45.3, 58.5, 37.2, 46.6, 22.4, 25.0, 45.3, 78.8, 45.7};
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(test.report.per_class[i].name, isaid_class_names()[i]);
    EXPECT_DOUBLE_EQ(*test.report.per_class[i].ap, expect[i]) << i;
  }
  EXPECT_EQ(test.report.per_class[13].name, "plane");
}

TEST(ResultsTable, HeaderAndAbbreviations) {
  const auto& h = results_table_header();
  EXPECT_EQ(h[0], "Data");
  EXPECT_EQ(h[1], "AP");
  EXPECT_EQ(h[2], "AP75");
  EXPECT_EQ(h[3], "AP50");
  EXPECT_EQ(h[18], "Harbor");
  EXPECT_EQ(class_abbreviation("storage_tank"), "ST");
  EXPECT_EQ(class_abbreviation("Ground-Track-Field"), "GTF");
  EXPECT_EQ(class_abbreviation("small vehicle"), "SV");
  EXPECT_EQ(class_abbreviation("dog"), "");
}

TEST(ResultsTable, AbsentMetricsAsDash) {
  EvalReport r;
  r.ap = 12.345;
  r.per_class.push_back({"plane", 99.95});
  r.per_class.push_back({"ship", std::nullopt});
  const std::string csv = results_table_csv({{"X", r}});
  EXPECT_EQ(csv.substr(csv.find('\n') + 1), "X,12.3,-,-,-,-,-,-,-,-,-,-,-,-,-,-,-,100.0,-\n");
}

TEST(ResultsTable, ParseErrorsCarryLineNumbers) {
  const std::string header = table("table5.csv").substr(0, table("table5.csv").find('\n') + 1);
  try {
    parse_results_table_csv(header + "Test,1.0,2.0\n");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_results_table_csv("Data,AP\n"), IoError);
  std::string bad = table("table5.csv");
  bad.replace(bad.find("45.7"), 4, "4x.7");
  EXPECT_THROW(parse_results_table_csv(bad), IoError);
}

TEST(AblationTables, AllRoundTrip) {
  for (const char* name : {"table1.csv", "table2.csv", "table3.csv", "table4.csv"}) {
    const std::string text = table(name);
    const auto rows = parse_ablation_table_csv(text);
    EXPECT_FALSE(rows.empty()) << name;
    EXPECT_EQ(ablation_table_csv(rows), text) << name;
  }
}

TEST(AblationTables, RowFromReport) {
  EvalReport r;
  r.ap = 43.0;
  r.ap_small = 27.93;
  r.ap_medium = 50.29;
  const AblationRow row = ablation_row("Soft NMS", r);
  EXPECT_EQ(ablation_table_csv({row}), "Experiment,AP,AP_s,AP_m,AP_l\nSoft NMS,43.00,27.93,50.29,-\n");
}

TEST(ReportJson, KeysAndNulls) {
  EvalReport r;
  r.ap = 50.0;
  r.ap50 = 60.0;
  r.per_class.push_back({"plane", 70.0});
  r.per_class.push_back({"ship", std::nullopt});
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["AP"], 50.0);
  EXPECT_TRUE(j["AP75"].is_null());
  EXPECT_TRUE(j["AP_l"].is_null());
  EXPECT_EQ(j["per_class"]["plane"], 70.0);
  EXPECT_TRUE(j["per_class"]["ship"].is_null());
}

TEST(ReportFixture, ExpectedCsvMatchesFixtureReport) {
  const std::string expected = read_text_file(testing_support::fixture("eval3_expected.csv"));
  const auto rows = parse_results_table_csv(expected);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(results_table_csv(rows), expected);
}

}  // namespace
}  // namespace lskdet
