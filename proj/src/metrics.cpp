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

#include "dcsurv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"

namespace dcsurv {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / static_cast<double>(v.size() - 1);
  return m;
}

}  // namespace

double inconsistency(const PropensityScores& scores, const PropensityScores& reference) {
  if (scores.ids.size() != scores.scores.size() ||
      reference.ids.size() != reference.scores.size()) {
    throw DataError("score vectors are not aligned with their ids");
  }
  if (scores.ids.empty()) throw DataError("inconsistency of an empty score set");
  std::unordered_map<SampleId, double> ref;
  ref.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) ref.emplace(reference.ids[i], reference.scores[i]);
  double ss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto it = ref.find(scores.ids[i]);
    if (it == ref.end()) {
      throw DataError("alignment error: sample id " + std::to_string(scores.ids[i]) +
                      " has no reference score");
    }
    const double d = scores.scores[i] - it->second;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(scores.size()));
}

double smd(const std::vector<double>& treated, const std::vector<double>& control) {
  if (treated.size() < 2 || control.size() < 2) {
    throw DataError("SMD needs at least two values per group");
  }
  const Moments t = moments(treated);
  const Moments c = moments(control);
  const double pooled = std::sqrt((t.var + c.var) / 2.0);
  const double diff = t.mean - c.mean;
  if (pooled == 0.0) {
    if (diff == 0.0) return 0.0;
    warn("SMD: both groups have zero variance but different means");
    return diff > 0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  }
  return diff / pooled;
}

double masmd(const std::vector<double>& smds) {
  double worst = 0.0;
  for (double d : smds) worst = std::max(worst, std::abs(d));
  return worst;
}

BalanceReport balance(const Dataset& dataset, const MatchedSet& matched) {
  const auto treated = matched.treated_members();
  const auto control = matched.control_members();
  if (treated.empty() || control.empty()) {
    throw DataError("balance needs a non-empty treated and control arm");
  }
  BalanceReport report;
  report.treated = treated.size();
  report.control = control.size();
  std::vector<std::size_t> t_rows;
  std::vector<std::size_t> c_rows;
  for (SampleId id : treated) t_rows.push_back(dataset.row_of(id));
  for (SampleId id : control) c_rows.push_back(dataset.row_of(id));
  const Matrix& x = dataset.covariates();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> tv;
    std::vector<double> cv;
    for (std::size_t r : t_rows) tv.push_back(x(static_cast<Eigen::Index>(r), j));
    for (std::size_t r : c_rows) cv.push_back(x(static_cast<Eigen::Index>(r), j));
    report.per_covariate_smd.push_back(smd(tv, cv));
  }
  report.masmd = masmd(report.per_covariate_smd);
  return report;
}

double gap_on_grid(const SurvivalCurve& a, const SurvivalCurve& b,
                   const std::vector<double>& grid) {
  if (grid.empty()) return 0.0;
  double ss = 0.0;
  for (double t : grid) {
    const double d = eval_step(a, t) - eval_step(b, t);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(grid.size()));
}

double gap(const SurvivalCurve& curve, const SurvivalCurve& reference) {
  if (reference.times.empty()) {
    warn("gap: reference curve has no event times; gap defined as 0");
    return 0.0;
  }
  return gap_on_grid(curve, reference, reference.times);
}

}  // namespace dcsurv
