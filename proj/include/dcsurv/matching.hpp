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

#include <cstdint>
#include <vector>

#include "dcsurv/propensity.hpp"
#include "dcsurv/types.hpp"

namespace dcsurv {

struct MatchConfig {
  double caliper_multiplier = 0.2;
  bool replacement = false;
  std::uint64_t seed = 0;  // recorded only; the greedy match is deterministic

  void validate() const;
};

struct MatchedPair {
  SampleId treated = 0;
  SampleId control = 0;
  double logit_gap = 0.0;
};

struct MatchedSet {
  std::vector<MatchedPair> pairs;  // in treated processing order
  double caliper_width = 0.0;
  std::vector<SampleId> matched_ids;  // sorted union of paired ids

  // Paired ids with multiplicity (differs from matched_ids only with
  // replacement); treated first.
  std::vector<SampleId> treated_members() const;
  std::vector<SampleId> control_members() const;
};

// Greedy 1:1 caliper matching on the logit scale. The caliper is
// multiplier * SD(logit of all scores) (n - 1 denominator). Treated units
// are visited by descending score (ties: lower id first); each takes the
// nearest available control (ties: lower id), or is skipped when none lies
// within the caliper.
MatchedSet caliper_match(const PropensityScores& scores, const std::vector<int>& z,
                         const MatchConfig& config = {});

// 2 * pairs: treated plus controls.
std::size_t matched_sample_size(const MatchedSet& set);

struct MatchAudit {
  bool within_caliper = true;
  bool unique_ids = true;
  bool greedy_consistent = true;
  std::vector<std::string> problems;

  bool ok() const { return within_caliper && unique_ids && greedy_consistent; }
};

// Replays the greedy procedure by brute force and checks every invariant of
// a MatchedSet produced from these inputs.
MatchAudit audit_matching(const PropensityScores& scores, const std::vector<int>& z,
                          const MatchConfig& config, const MatchedSet& set);

}  // namespace dcsurv
