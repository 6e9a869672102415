#include "affectbench/errors.hpp"
#include "affectbench/report_io.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace affectbench;

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(gen);
    ASSERT_EQ(parse_number(format_number(v)), v);
  }
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_THROW(parse_number("1,5"), ValidationError);
}

TEST(Csv, QuotedFields) {
  EXPECT_EQ(split_csv_line("a,\"b,c\",\"d\"\"e\",\r"), (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
  EXPECT_EQ(csv_field("x,y"), "\"x,y\"");
  EXPECT_THROW(split_csv_line("\"open"), ValidationError);
}

TEST(PredictionCsv, RoundTripWithInvalidRows) {
  AffectSequence s{"p03", "lighter", {}};
  s.samples.push_back(AffectSample::make(0, 0.31, -0.55));
  s.samples.push_back(AffectSample::invalid(4));
  s.samples.push_back(AffectSample::make(12, 1.0, -1.0));
  const std::string text = prediction_csv(s);
  EXPECT_EQ(text.substr(0, text.find('\n')), kPredictionHeader);
  EXPECT_NE(text.find("p03,lighter,4,,,false"), std::string::npos);
  EXPECT_EQ(parse_prediction_csv(text), s);
  EXPECT_THROW(parse_prediction_csv("frame,a\n"), ValidationError);
}

TEST(SummaryCsv, RoundTripsThroughSchema) {
  const std::vector<SummaryTableRow> rows = {
      {"lighter", 0.0825, 0.9715, 0.0725, 0.9784}, {"darker", 0.0941, 0.969, 0.0823, 0.9818},
      {"gaussian", -0.004, 0.8099, 0.0071, 0.8568}, {"noise", 0.0358, 0.5824, -0.0414, 0.7022},
      {"motion", -0.069, 0.3639, std::nullopt, std::nullopt}};
  const std::string text = summary_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kSummaryHeader);
  EXPECT_NE(text.find("\nlighter,0.0825,0.9715,0.0725,0.9784\n"), std::string::npos);
  EXPECT_EQ(parse_summary_csv(text), rows);
  EXPECT_EQ(summary_csv(parse_summary_csv(text)), text);
}

TEST(CellJson, FieldOrderAndRoundTrip) {
  CellResult c{"p1", "noise", Dimension::valence, {}};
  c.stats = {0.25, 0.5, false, 60, 30, 10, 0.01, -0.2, 0.3, 10};
  const std::string text = cell_json(c);
  const char* keys[] = {"participant", "condition", "dimension", "ccc",       "pearson",   "pearson_degenerate",
                        "pos_pct",     "neg_pct",   "zero_pct",  "mean_delta", "min_delta", "max_delta", "n"};
  std::size_t last = 0;
  for (const char* k : keys) {
    const auto at = text.find(std::string("\"") + k + "\"");
    ASSERT_NE(at, std::string::npos) << k;
    ASSERT_GE(at, last) << k;
    last = at;
  }
  const auto back = parse_cell_json(text);
  EXPECT_EQ(back.participant_id, "p1");
  EXPECT_EQ(back.dimension, Dimension::valence);
  EXPECT_EQ(back.stats.ccc, 0.25);
  EXPECT_EQ(back.stats.n, 10);
  EXPECT_THROW(parse_cell_json("{}"), ValidationError);
}
