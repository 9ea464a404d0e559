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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcsurv/matching.hpp"
#include "dcsurv/types.hpp"

namespace dcsurv {

enum class Arm { kTreated, kControl };
const char* arm_name(Arm arm);

// Product-limit estimate as a right-continuous step function. times holds
// the distinct event times; survival[i] is S just after times[i].
struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<int> at_risk;
  std::vector<int> events;
  Arm group = Arm::kTreated;
  std::size_t subjects = 0;
};

// Events are processed before censorings at tied times (units censored at t
// remain at risk for events at t). All-censored input gives an empty grid.
SurvivalCurve kaplan_meier(std::span<const double> times, std::span<const int> events);
SurvivalCurve kaplan_meier(const Outcomes& outcomes, const std::vector<SampleId>& subset);

// 1 before the first grid time, post-jump value at a grid time.
double eval_step(const SurvivalCurve& curve, double t);

struct ArmCurves {
  SurvivalCurve treated;
  SurvivalCurve control;
};

// One curve per arm over the matched sample (pair multiplicity kept).
// Throws DataError naming the arm when it is empty.
ArmCurves km_by_group(const MatchedSet& matched, const Outcomes& outcomes);

// group,time,survival,at_risk,events
std::string curves_to_csv(const ArmCurves& curves);

struct PlotSeries {
  std::string label;
  ArmCurves curves;
};

// Two step curves (treated solid, control dashed) per series.
std::string curves_to_svg(const std::vector<PlotSeries>& series,
                          const std::string& title);

}  // namespace dcsurv
