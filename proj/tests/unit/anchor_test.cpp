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

#include "dcsurv/anchor.hpp"
#include "dcsurv/error.hpp"
#include "test_util.hpp"

namespace dcsurv {
namespace {

TEST(Anchor, EntriesStayInsideRanges) {
  const auto a = generate_anchor(std::vector<ColumnRange>(4, {0.0, 1.0}), 100, 11);
  EXPECT_EQ(a.values.rows(), 100);
  EXPECT_GE(a.values.minCoeff(), 0.0);
  EXPECT_LE(a.values.maxCoeff(), 1.0);
}

TEST(Anchor, DegenerateRangeIsConstant) {
  const auto a = generate_anchor({{-1.0, 3.0}, {2.0, 2.0}}, 50, 1);
  EXPECT_TRUE((a.values.col(1).array() == 2.0).all());
  EXPECT_GE(a.values.col(0).minCoeff(), -1.0);
  EXPECT_LE(a.values.col(0).maxCoeff(), 3.0);
}

TEST(Anchor, RejectsInvertedRangeAndZeroRows) {
  EXPECT_THROW(generate_anchor({{1.0, 0.0}}, 10, 1), DataError);
  EXPECT_THROW(generate_anchor({{0.0, 1.0}}, 0, 1), ConfigError);
}

TEST(Anchor, SameSeedSameAnchor) {
  const std::vector<ColumnRange> ranges = {{0, 1}, {-5, 5}, {10, 20}};
  const auto a = generate_anchor(ranges, 30, 42);
  const auto b = generate_anchor(ranges, 30, 42);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, generate_anchor(ranges, 30, 43).values);
}

TEST(Anchor, RangesFromData) {
  Matrix x(3, 2);
  x << 1, -2, 4, 0, 2, 7;
  const auto r = column_ranges(x);
  EXPECT_EQ(r[0].min, 1);
  EXPECT_EQ(r[0].max, 4);
  EXPECT_EQ(r[1].min, -2);
  EXPECT_EQ(r[1].max, 7);
}

TEST(Anchor, SliceIsLosslessOverColumnPartition) {
  const auto a = generate_anchor(std::vector<ColumnRange>(6, {0.0, 1.0}), 20, 5);
  EXPECT_EQ(slice_anchor(a, std::vector<std::size_t>{0, 1, 2, 3, 4, 5}), a.values);
  const Matrix left = slice_anchor(a, std::vector<std::size_t>{0, 1, 2});
  const Matrix right = slice_anchor(a, std::vector<std::size_t>{3, 4, 5});
  EXPECT_EQ(left, a.values.leftCols(3));
  Matrix joined(20, 6);
  joined << left, right;
  EXPECT_EQ(joined, a.values);
  EXPECT_THROW(slice_anchor(a, std::vector<std::size_t>{6}), DataError);
}

TEST(Anchor, SliceByName) {
  const auto a = generate_anchor(std::vector<ColumnRange>(3, {0.0, 1.0}), 5, 5, {"a", "b", "c"});
  EXPECT_EQ(slice_anchor(a, std::vector<std::string>{"c", "a"}).col(0), a.values.col(2));
  EXPECT_THROW(slice_anchor(a, std::vector<std::string>{"z"}), DataError);
}

TEST(Anchor, SaveLoadRoundTrip) {
  const auto dir = testing::scratch_dir("anchor");
  const auto a = generate_anchor({{0, 1}, {-3.5, 8.25}}, 17, 1234, {"u", "v"});
  save_anchor(a, dir);
  const auto b = load_anchor(dir);
  EXPECT_EQ(b.values, a.values);
  EXPECT_EQ(b.seed, 1234u);
  EXPECT_EQ(b.column_names, a.column_names);
  EXPECT_EQ(b.ranges[1].max, 8.25);
  std::filesystem::remove_all(dir);
}

TEST(Anchor, MissingAnchorExplainsWhatToDo) {
  const auto dir = testing::scratch_dir("anchor_missing");
  try {
    load_anchor(dir);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("anchor"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dcsurv
