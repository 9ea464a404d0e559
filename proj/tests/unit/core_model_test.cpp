// Copyright 2026 The dcsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "dcsurv/core_model.hpp"
#include "dcsurv/error.hpp"
#include "dcsurv/io.hpp"
#include "dcsurv/log.hpp"
#include "dcsurv/pipeline.hpp"
#include "test_util.hpp"

namespace dcsurv {
namespace {

TEST(Partition, IdentitySchemeGivesWholeDataset) {
  const Dataset d = testing::toy_dataset(40, 4, 1);
  Rng rng(3);
  const auto blocks = partition(d, PartitionScheme::even(d.n(), d.m(), 1, 1, rng));
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].ids, d.ids());
  EXPECT_EQ(blocks[0].covariates, d.covariates());
  ASSERT_TRUE(blocks[0].holds_outcomes());
  EXPECT_EQ(blocks[0].outcomes->time, d.time());
}

TEST(Partition, TwoByTwoGivesFourBlocksOf500x3) {
  const Dataset d = testing::toy_dataset(1000, 6, 2);
  Rng rng(4);
  const auto blocks = partition(d, PartitionScheme::even(1000, 6, 2, 2, rng));
  ASSERT_EQ(blocks.size(), 4u);
  int holders = 0;
  for (const auto& b : blocks) {
    EXPECT_EQ(b.covariates.rows(), 500);
    EXPECT_EQ(b.covariates.cols(), 3);
    holders += b.holds_outcomes() ? 1 : 0;
    EXPECT_EQ(b.holds_outcomes(), b.party.group == 0);
  }
  EXPECT_EQ(holders, 2);
}

TEST(Partition, ThreeInstitutionsOn888Rows) {
  const Dataset d = testing::toy_dataset(888, 13, 5);
  Rng rng(6);
  const auto scheme = PartitionScheme::even(888, 13, 3, 1, rng);
  for (const auto& g : scheme.row_groups) EXPECT_EQ(g.size(), 296u);
  const auto blocks = partition(d, scheme);
  for (const auto& b : blocks) EXPECT_EQ(b.covariates.cols(), 13);
}

TEST(Partition, RemainderGoesToLowestInstitutions) {
  Rng rng(1);
  const auto scheme = PartitionScheme::even(11, 5, 3, 2, rng);
  EXPECT_EQ(scheme.row_groups[0].size(), 4u);
  EXPECT_EQ(scheme.row_groups[1].size(), 4u);
  EXPECT_EQ(scheme.row_groups[2].size(), 3u);
  EXPECT_EQ(scheme.col_groups[0].size(), 3u);
  EXPECT_EQ(scheme.col_groups[1].size(), 2u);
}

TEST(Partition, ReassembleIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = testing::toy_dataset(97, 7, seed);
    Rng rng(seed + 100);
    const int c = 1 + static_cast<int>(seed % 3);
    const int g = 1 + static_cast<int>(seed % 4);
    const auto blocks = partition(d, PartitionScheme::even(d.n(), d.m(), c, g, rng));
    std::size_t rows = 0;
    for (const auto& b : blocks) {
      if (b.party.group == 0) rows += b.ids.size();
    }
    EXPECT_EQ(rows, d.n());
    EXPECT_TRUE(reassemble(blocks) == d);
  }
}

TEST(Partition, RejectsOverlapAndGaps) {
  PartitionScheme s;
  s.row_groups = {{0, 1}, {1, 2}};
  s.col_groups = {{0}};
  EXPECT_THROW(s.validate(3, 1), DataError);
  s.row_groups = {{0}, {2}};
  EXPECT_THROW(s.validate(3, 1), DataError);
  s.row_groups = {{0, 1, 2}, {}};
  EXPECT_THROW(s.validate(3, 1), DataError);
  s.row_groups = {{0, 1, 2}};
  s.col_groups = {{0, 1}};
  EXPECT_THROW(s.validate(3, 1), DataError);
}

TEST(Dataset, RejectsDuplicateIdsAndBadOutcomes) {
  Outcomes o{{0, 0}, {1.0, 2.0}, {1, 0}, {0, 1}};
  EXPECT_THROW(Dataset(o, Matrix::Zero(2, 1)), DataError);
  o.ids = {0, 1};
  o.time = {-1.0, 2.0};
  EXPECT_THROW(Dataset(o, Matrix::Zero(2, 1)), DataError);
  o.time = {1.0, 2.0};
  o.event = {2, 0};
  EXPECT_THROW(Dataset(o, Matrix::Zero(2, 1)), DataError);
}

TEST(LoadCsv, ThreeRowsOneCovariate) {
  const auto table = io::parse_csv("x1,time,event,treat\n0.5,1,1,0\n1.5,2,0,1\n-2,3,1,1\n");
  SchemaConfig schema;
  schema.treatment_column = "treat";
  const auto r = load_table(table, schema);
  EXPECT_EQ(r.dataset.n(), 3u);
  EXPECT_EQ(r.dataset.m(), 1u);
  EXPECT_EQ(r.dataset.treatment(), (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(r.dropped_rows, 0u);
}

TEST(LoadCsv, TreatmentRuleThresholdsAge) {
  const auto table =
      io::parse_csv("age,bili,time,status\n70,1.2,100,1\n45,0.8,200,0\n60,2.0,300,1\n61,1.1,50,0\n");
  SchemaConfig schema;
  schema.event_column = "status";
  schema.treatment_rule = TreatmentRule::parse("age > 60");
  const auto r = load_table(table, schema);
  EXPECT_EQ(r.dataset.treatment(), (std::vector<int>{1, 0, 0, 1}));
  // The rule column does not stay a covariate unless asked for.
  EXPECT_EQ(r.dataset.covariate_names(), (std::vector<std::string>{"bili"}));
  schema.keep_rule_column = true;
  EXPECT_EQ(load_table(table, schema).dataset.m(), 2u);
}

TEST(LoadCsv, MissingCellDropsRowWithWarning) {
  const auto table = io::parse_csv("x1,x2,time,event,treat\n1,2,1,1,0\n3,NA,2,0,1\n5,6,3,1,1\n");
  SchemaConfig schema;
  schema.treatment_column = "treat";
  ScopedWarningCapture capture;
  const auto r = load_table(table, schema);
  EXPECT_EQ(r.dataset.n(), 2u);
  EXPECT_EQ(r.dropped_rows, 1u);
  EXPECT_TRUE(capture.contains("dropped 1 row"));
}

TEST(LoadCsv, NonNumericCellNamesRowAndColumn) {
  const auto table = io::parse_csv("x1,rx,time,event,treat\n1,Obs,1,1,0\n");
  SchemaConfig schema;
  schema.treatment_column = "treat";
  try {
    load_table(table, schema);
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'rx'"), std::string::npos);
  }
}

TEST(LoadCsv, MissingMandatoryColumnIsConfigError) {
  const auto table = io::parse_csv("x1,time,treat\n1,1,0\n");
  SchemaConfig schema;
  schema.treatment_column = "treat";
  EXPECT_THROW(load_table(table, schema), ConfigError);
}

TEST(LoadCsv, IsDeterministic) {
  const auto table = io::parse_csv("x1,time,event,treat\n0.1,1,1,0\n0.2,2,0,1\n");
  SchemaConfig schema;
  schema.treatment_column = "treat";
  EXPECT_TRUE(load_table(table, schema).dataset == load_table(table, schema).dataset);
}

TEST(TreatmentRule, ParsesOperators) {
  EXPECT_TRUE(TreatmentRule::parse("sex == 1").apply(1.0));
  EXPECT_FALSE(TreatmentRule::parse("sex == 1").apply(0.0));
  EXPECT_TRUE(TreatmentRule::parse("age >= 60").apply(60.0));
  EXPECT_FALSE(TreatmentRule::parse("age > 60").apply(60.0));
  EXPECT_TRUE(TreatmentRule::parse("x != 2").apply(3.0));
  EXPECT_THROW(TreatmentRule::parse("age ~ 60"), ConfigError);
  EXPECT_THROW(TreatmentRule::parse("age >"), ConfigError);
}

TEST(Preprocess, OneHotDropsFirstLevelAndImputesMean) {
  const auto table = io::parse_csv("rx,x,time\nObs,1,1\nLev,NA,2\nLev+5FU,3,3\n");
  const auto out = preprocess(table, {});
  EXPECT_EQ(out.header, (std::vector<std::string>{"rx_Lev+5FU", "rx_Obs", "x", "time"}));
  EXPECT_EQ(out.rows[0][1], "1");
  EXPECT_EQ(out.rows[1][0], "0");
  EXPECT_EQ(out.rows[2][0], "1");
  EXPECT_EQ(io::parse_double(out.rows[1][2]).value(), 2.0);
}

TEST(LoadSource, FiltersRowsAndEncodesText) {
  const auto dir = testing::scratch_dir("load_source");
  io::write_file(dir / "c.csv",
                 "\"\",id,rx,sex,age,time,status,etype\n"
                 "1,1,Obs,1,43,100,1,1\n"
                 "2,1,Obs,1,43,200,1,2\n"
                 "3,2,Lev,0,63,300,0,1\n"
                 "4,2,Lev,0,63,400,0,2\n"
                 "5,3,Lev+5FU,1,NA,50,1,2\n"
                 "6,4,Lev+5FU,0,71,70,1,2\n");
  CsvSource src;
  src.path = dir / "c.csv";
  src.schema.event_column = "status";
  src.schema.treatment_rule = TreatmentRule::parse("sex == 1");
  src.schema.exclude = {"", "id", "etype"};
  src.row_filter = TreatmentRule::parse("etype == 2");
  ScopedWarningCapture capture;
  const auto r = load_source(src);
  EXPECT_EQ(r.dataset.n(), 3u);
  EXPECT_EQ(r.dropped_rows, 1u);
  EXPECT_EQ(r.dataset.covariate_names(),
            (std::vector<std::string>{"rx_Lev+5FU", "rx_Obs", "age"}));
  EXPECT_EQ(r.dataset.time(), (std::vector<double>{200, 400, 70}));
  EXPECT_EQ(r.dataset.treatment(), (std::vector<int>{1, 0, 0}));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dcsurv
