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

#include "dcsurv/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"

namespace dcsurv {
namespace {

double pooled_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// Treated positions by descending score, ties by ascending id.
std::vector<std::size_t> treated_order(const PropensityScores& scores,
                                       const std::vector<int>& z) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == 1) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
    return scores.ids[a] < scores.ids[b];
  });
  return order;
}

void check_inputs(const PropensityScores& scores, const std::vector<int>& z) {
  if (scores.scores.size() != z.size() || scores.ids.size() != z.size()) {
    throw DataError("scores, ids and treatment are not aligned");
  }
  const auto treated = std::count(z.begin(), z.end(), 1);
  if (treated == 0 || treated == static_cast<long>(z.size())) {
    throw DataError("matching needs both treated and control units");
  }
}

}  // namespace

void MatchConfig::validate() const {
  if (!(caliper_multiplier > 0.0)) throw ConfigError("caliper multiplier must be positive");
}

std::vector<SampleId> MatchedSet::treated_members() const {
  std::vector<SampleId> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.treated);
  return out;
}

std::vector<SampleId> MatchedSet::control_members() const {
  std::vector<SampleId> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.control);
  return out;
}

MatchedSet caliper_match(const PropensityScores& scores, const std::vector<int>& z,
                         const MatchConfig& config) {
  config.validate();
  check_inputs(scores, z);
  const std::vector<double> logits = logit(scores.scores);

  MatchedSet out;
  const double sd = pooled_sd(logits);
  out.caliper_width = config.caliper_multiplier * sd;
  if (sd == 0.0) {
    warn("all propensity logits are equal; caliper width is 0 and only exact ties match");
  }

  // (logit, id, position) of every available control.
  using Entry = std::tuple<double, SampleId, std::size_t>;
  std::set<Entry> available;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == 0) available.emplace(logits[i], scores.ids[i], i);
  }

  for (std::size_t t : treated_order(scores, z)) {
    if (available.empty()) break;
    const double x = logits[t];
    auto succ = available.lower_bound(Entry{x, std::numeric_limits<SampleId>::min(), 0});
    std::set<Entry>::iterator best = available.end();
    double best_gap = std::numeric_limits<double>::infinity();
    if (succ != available.end()) {
      best = succ;
      best_gap = std::get<0>(*succ) - x;
    }
    if (succ != available.begin()) {
      const double y = std::get<0>(*std::prev(succ));
      // Lowest id among the controls sharing that logit.
      auto pred = available.lower_bound(Entry{y, std::numeric_limits<SampleId>::min(), 0});
      const double gap = x - y;
      if (gap < best_gap ||
          (gap == best_gap && best != available.end() &&
           std::get<1>(*pred) < std::get<1>(*best))) {
        best = pred;
        best_gap = gap;
      }
    }
    if (best == available.end() || best_gap > out.caliper_width) continue;
    out.pairs.push_back({scores.ids[t], std::get<1>(*best), best_gap});
    if (!config.replacement) available.erase(best);
  }

  std::set<SampleId> ids;
  for (const auto& p : out.pairs) {
    ids.insert(p.treated);
    ids.insert(p.control);
  }
  out.matched_ids.assign(ids.begin(), ids.end());
  return out;
}

std::size_t matched_sample_size(const MatchedSet& set) { return 2 * set.pairs.size(); }

MatchAudit audit_matching(const PropensityScores& scores, const std::vector<int>& z,
                          const MatchConfig& config, const MatchedSet& set) {
  MatchAudit audit;
  check_inputs(scores, z);
  const std::vector<double> logits = logit(scores.scores);
  const double width = config.caliper_multiplier * pooled_sd(logits);

  std::unordered_map<SampleId, std::size_t> pos;
  for (std::size_t i = 0; i < scores.ids.size(); ++i) pos[scores.ids[i]] = i;

  // Caliper and id-reuse checks straight from the emitted pairs.
  std::unordered_set<SampleId> seen;
  for (const auto& pair : set.pairs) {
    auto ti = pos.find(pair.treated);
    auto ci = pos.find(pair.control);
    if (ti == pos.end() || ci == pos.end()) {
      audit.within_caliper = false;
      audit.problems.push_back("pair references an unknown id");
      continue;
    }
    if (z[ti->second] != 1 || z[ci->second] != 0) {
      audit.greedy_consistent = false;
      audit.problems.push_back("pair arms are swapped for treated id " +
                               std::to_string(pair.treated));
    }
    const double gap = std::abs(logits[ti->second] - logits[ci->second]);
    if (gap > width) {
      audit.within_caliper = false;
      audit.problems.push_back("pair (" + std::to_string(pair.treated) + ", " +
                               std::to_string(pair.control) + ") exceeds the caliper");
    }
    if (!config.replacement) {
      if (!seen.insert(pair.treated).second || !seen.insert(pair.control).second) {
        audit.unique_ids = false;
        audit.problems.push_back("id reused in pair (" + std::to_string(pair.treated) +
                                 ", " + std::to_string(pair.control) + ")");
      }
    }
  }

  // Brute-force replay of the greedy pass.
  std::vector<bool> used(z.size(), false);
  std::size_t next_pair = 0;
  for (std::size_t t : treated_order(scores, z)) {
    std::size_t best = z.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < z.size(); ++c) {
      if (z[c] != 0 || used[c]) continue;
      const double gap = std::abs(logits[t] - logits[c]);
      if (gap < best_gap || (gap == best_gap && best < z.size() && scores.ids[c] < scores.ids[best])) {
        best = c;
        best_gap = gap;
      }
    }
    const bool expect_match = best < z.size() && best_gap <= width;
    const bool has_match =
        next_pair < set.pairs.size() && set.pairs[next_pair].treated == scores.ids[t];
    if (expect_match != has_match) {
      audit.greedy_consistent = false;
      audit.problems.push_back("treated id " + std::to_string(scores.ids[t]) +
                               (expect_match ? " should have been matched"
                                             : " should have been skipped"));
      if (has_match) ++next_pair;
      continue;
    }
    if (!has_match) continue;
    const auto& pair = set.pairs[next_pair++];
    const double emitted_gap = std::abs(logits[t] - logits[pos.at(pair.control)]);
    if (emitted_gap > best_gap) {
      audit.greedy_consistent = false;
      audit.problems.push_back("treated id " + std::to_string(pair.treated) +
                               " had a strictly closer available control");
    }
    if (!config.replacement) used[pos.at(pair.control)] = true;
  }
  if (next_pair != set.pairs.size()) {
    audit.greedy_consistent = false;
    audit.problems.push_back("pairs are not in greedy processing order");
  }
  return audit;
}

}  // namespace dcsurv
