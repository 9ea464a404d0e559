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

#include "dcsurv/types.hpp"

#include <string>

#include "dcsurv/error.hpp"

namespace dcsurv {

std::string PartyIndex::label() const {
  return "(" + std::to_string(institution + 1) + "," + std::to_string(group + 1) + ")";
}

void Outcomes::validate() const {
  const std::size_t n = ids.size();
  if (time.size() != n || event.size() != n || treatment.size() != n) {
    throw DataError("outcome vectors have different lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(time[i] >= 0.0)) {
      throw DataError("observed time must be nonnegative (sample " +
                      std::to_string(ids[i]) + ")");
    }
    if (event[i] != 0 && event[i] != 1) {
      throw DataError("event indicator must be 0 or 1 (sample " +
                      std::to_string(ids[i]) + ")");
    }
    if (treatment[i] != 0 && treatment[i] != 1) {
      throw DataError("treatment must be 0 or 1 (sample " + std::to_string(ids[i]) +
                      ")");
    }
  }
}

Outcomes Outcomes::select(const std::vector<std::size_t>& rows) const {
  Outcomes out;
  out.ids.reserve(rows.size());
  out.time.reserve(rows.size());
  out.event.reserve(rows.size());
  out.treatment.reserve(rows.size());
  for (std::size_t r : rows) {
    out.ids.push_back(ids.at(r));
    out.time.push_back(time.at(r));
    out.event.push_back(event.at(r));
    out.treatment.push_back(treatment.at(r));
  }
  return out;
}

Outcomes Outcomes::concat(const std::vector<Outcomes>& parts) {
  Outcomes out;
  for (const auto& p : parts) {
    out.ids.insert(out.ids.end(), p.ids.begin(), p.ids.end());
    out.time.insert(out.time.end(), p.time.begin(), p.time.end());
    out.event.insert(out.event.end(), p.event.begin(), p.event.end());
    out.treatment.insert(out.treatment.end(), p.treatment.begin(), p.treatment.end());
  }
  return out;
}

}  // namespace dcsurv
