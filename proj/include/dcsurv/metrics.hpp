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

#include <string>
#include <vector>

#include "dcsurv/core_model.hpp"
#include "dcsurv/matching.hpp"
#include "dcsurv/propensity.hpp"
#include "dcsurv/survival.hpp"

namespace dcsurv {

// Root-mean-square score difference over the ids of `scores`. Every id must
// have a reference score (the reference may cover more samples).
double inconsistency(const PropensityScores& scores, const PropensityScores& reference);

// (mean_T - mean_C) / sqrt((var_T + var_C) / 2), n - 1 variances.
double smd(const std::vector<double>& treated, const std::vector<double>& control);

struct BalanceReport {
  std::vector<double> per_covariate_smd;
  double masmd = 0.0;
  std::size_t treated = 0;
  std::size_t control = 0;
};

double masmd(const std::vector<double>& smds);

// Balance over the original covariates of the matched sample.
BalanceReport balance(const Dataset& dataset, const MatchedSet& matched);

// RMS of S_hat - S_ref over the reference curve's event times.
double gap(const SurvivalCurve& curve, const SurvivalCurve& reference);
double gap_on_grid(const SurvivalCurve& a, const SurvivalCurve& b,
                   const std::vector<double>& grid);

}  // namespace dcsurv
