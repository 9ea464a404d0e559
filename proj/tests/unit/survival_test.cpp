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

#include <cmath>

#include "../support/oracles.hpp"
#include "dcsurv/error.hpp"
#include "dcsurv/survival.hpp"

namespace dcsurv {
namespace {

TEST(KaplanMeier, ExhaustiveSmallSamplesMatchDefinition) {
  for (int n = 1; n <= 8; ++n) {
    for (const auto& times : oracle::km_time_layouts(n)) {
      for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> events(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) events[static_cast<std::size_t>(i)] = (mask >> i) & 1;
        const auto curve = kaplan_meier(times, events);
        std::vector<double> probes = {0.0};
        for (double t : times) {
          probes.push_back(t);
          probes.push_back(t + 0.25);
          probes.push_back(t - 0.25);
        }
        for (double t : probes) {
          ASSERT_NEAR(eval_step(curve, t), oracle::km_at(times, events, t), 1e-12)
              << "n=" << n << " mask=" << mask << " t=" << t;
        }
      }
    }
  }
}

TEST(KaplanMeier, TextbookExample) {
  // 6 subjects: deaths at 1, 3, 3; censored at 2, 4, 5.
  const std::vector<double> t = {1, 2, 3, 3, 4, 5};
  const std::vector<int> e = {1, 0, 1, 1, 0, 0};
  const auto c = kaplan_meier(t, e);
  ASSERT_EQ(c.times.size(), 2u);
  EXPECT_DOUBLE_EQ(c.survival[0], 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(c.survival[1], 5.0 / 6.0 * (1.0 - 2.0 / 4.0));
  EXPECT_EQ(c.at_risk[1], 4);
  EXPECT_EQ(c.events[1], 2);
}

TEST(KaplanMeier, EventsPrecedeCensoringAtTies) {
  const auto c = kaplan_meier(std::vector<double>{2, 2}, std::vector<int>{0, 1});
  EXPECT_DOUBLE_EQ(c.survival[0], 0.5);
}

TEST(KaplanMeier, AllCensoredStaysAtOne) {
  const auto c = kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<int>{0, 0, 0});
  EXPECT_TRUE(c.times.empty());
  EXPECT_EQ(eval_step(c, 10.0), 1.0);
}

TEST(KaplanMeier, RightContinuousSteps) {
  const auto c = kaplan_meier(std::vector<double>{1, 2}, std::vector<int>{1, 1});
  EXPECT_EQ(eval_step(c, 0.999), 1.0);
  EXPECT_EQ(eval_step(c, 1.0), 0.5);
  EXPECT_EQ(eval_step(c, 2.0), 0.0);
}

TEST(KaplanMeier, RejectsBadInput) {
  EXPECT_THROW(kaplan_meier(std::vector<double>{}, std::vector<int>{}), DataError);
  EXPECT_THROW(kaplan_meier(std::vector<double>{-1}, std::vector<int>{1}), DataError);
  EXPECT_THROW(kaplan_meier(std::vector<double>{1}, std::vector<int>{2}), DataError);
}

TEST(KaplanMeier, ByGroupUsesMatchedMembers) {
  Outcomes o{{1, 2, 3, 4}, {1.0, 2.0, 3.0, 4.0}, {1, 1, 0, 1}, {1, 0, 1, 0}};
  MatchedSet m;
  m.pairs = {{1, 2, 0.0}, {3, 4, 0.0}};
  const auto curves = km_by_group(m, o);
  EXPECT_EQ(curves.treated.subjects, 2u);
  EXPECT_EQ(curves.treated.group, Arm::kTreated);
  EXPECT_EQ(eval_step(curves.treated, 1.0), 0.5);
  EXPECT_EQ(eval_step(curves.control, 2.0), 0.5);
  m.pairs = {{2, 1, 0.0}};
  EXPECT_THROW(km_by_group(m, o), DataError);
  m.pairs.clear();
  EXPECT_THROW(km_by_group(m, o), DataError);
}

TEST(KaplanMeier, CsvAndSvgEmission) {
  Outcomes o{{1, 2}, {1.0, 2.0}, {1, 1}, {1, 0}};
  MatchedSet m;
  m.pairs = {{1, 2, 0.0}};
  const auto curves = km_by_group(m, o);
  const std::string csv = curves_to_csv(curves);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "group,time,survival,at_risk,events");
  EXPECT_NE(csv.find("treated,1,0,1,1"), std::string::npos);
  const std::string svg = curves_to_svg({{"demo", curves}}, "title");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

}  // namespace
}  // namespace dcsurv
