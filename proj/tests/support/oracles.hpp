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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace dcsurv::oracle {

// Product-limit estimate at time t straight from the definition: one factor
// (1 - d_j / n_j) per distinct event time t_j <= t.
inline double km_at(const std::vector<double>& times, const std::vector<int>& events, double t) {
  std::set<double> event_times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (events[i] == 1 && times[i] <= t) event_times.insert(times[i]);
  }
  double s = 1.0;
  for (double tj : event_times) {
    int d = 0, at_risk = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] >= tj) ++at_risk;
      if (times[i] == tj && events[i] == 1) ++d;
    }
    s *= 1.0 - static_cast<double>(d) / at_risk;
  }
  return s;
}

// Time layouts used for exhaustive checks over n units: all distinct,
// pairwise tied, and fully tied.
inline std::vector<std::vector<double>> km_time_layouts(int n) {
  std::vector<double> distinct, paired, same;
  for (int i = 0; i < n; ++i) {
    distinct.push_back(static_cast<double>((i * 5) % n + 1));
    paired.push_back(static_cast<double>(i / 2 + 1));
    same.push_back(2.5);
  }
  return {distinct, paired, same};
}

}  // namespace dcsurv::oracle
