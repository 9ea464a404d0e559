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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dcsurv/types.hpp"

namespace dcsurv {

struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
};

// Shared uniform-random anchor matrix. Every party applies its private
// reducer to its own column slice of it.
struct AnchorDataset {
  Matrix values;  // r x m
  std::vector<ColumnRange> ranges;
  std::vector<std::string> column_names;
  std::uint64_t seed = 0;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
};

std::vector<ColumnRange> column_ranges(const Matrix& data);

// Entries drawn i.i.d. Uniform(min_j, max_j), row-major from one stream.
AnchorDataset generate_anchor(const std::vector<ColumnRange>& ranges,
                              std::size_t rows, std::uint64_t seed,
                              std::vector<std::string> column_names = {});

Matrix slice_anchor(const AnchorDataset& anchor,
                    const std::vector<std::size_t>& columns);
// Same, selecting by column name.
Matrix slice_anchor(const AnchorDataset& anchor,
                    const std::vector<std::string>& names);

// anchor.csv + anchor.meta.json
void save_anchor(const AnchorDataset& anchor, const std::filesystem::path& dir);
AnchorDataset load_anchor(const std::filesystem::path& dir);

inline constexpr const char* kAnchorFile = "anchor.csv";
inline constexpr const char* kAnchorMetaFile = "anchor.meta.json";

}  // namespace dcsurv
