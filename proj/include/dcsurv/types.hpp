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

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace dcsurv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Global sample identifier. Travels with every block so per-method results
// can be aligned sample by sample; carries no covariate information.
using SampleId = std::int64_t;

// Zero-based (institution, column group) coordinates of a party. Rendered
// one-based ("(1,1)") in files, messages and configuration.
struct PartyIndex {
  int institution = 0;
  int group = 0;

  auto operator<=>(const PartyIndex&) const = default;
  std::string label() const;
};

// (t, delta, Z) for a set of samples, aligned to ids.
struct Outcomes {
  std::vector<SampleId> ids;
  std::vector<double> time;
  std::vector<int> event;
  std::vector<int> treatment;

  std::size_t size() const { return ids.size(); }
  void validate() const;
  // Rows picked by position, in the given order.
  Outcomes select(const std::vector<std::size_t>& rows) const;
  static Outcomes concat(const std::vector<Outcomes>& parts);
};

}  // namespace dcsurv
