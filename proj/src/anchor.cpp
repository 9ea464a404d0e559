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

#include "dcsurv/anchor.hpp"

#include <nlohmann/json.hpp>

#include "dcsurv/error.hpp"
#include "dcsurv/io.hpp"
#include "dcsurv/rng.hpp"

namespace dcsurv {

std::vector<ColumnRange> column_ranges(const Matrix& data) {
  if (data.rows() == 0) throw DataError("cannot take column ranges of an empty matrix");
  std::vector<ColumnRange> out;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    out.push_back({data.col(j).minCoeff(), data.col(j).maxCoeff()});
  }
  return out;
}

AnchorDataset generate_anchor(const std::vector<ColumnRange>& ranges, std::size_t rows,
                              std::uint64_t seed, std::vector<std::string> column_names) {
  if (rows < 1) throw ConfigError("anchor row count r must be at least 1");
  if (ranges.empty()) throw ConfigError("anchor needs at least one column range");
  for (std::size_t j = 0; j < ranges.size(); ++j) {
    if (!(ranges[j].min <= ranges[j].max)) {
      throw DataError("anchor range for column " + std::to_string(j + 1) +
                      " has min > max");
    }
  }
  if (column_names.empty()) {
    for (std::size_t j = 0; j < ranges.size(); ++j) {
      column_names.push_back("x" + std::to_string(j + 1));
    }
  }
  if (column_names.size() != ranges.size()) {
    throw ConfigError("anchor column names do not match the number of ranges");
  }
  AnchorDataset anchor;
  anchor.ranges = ranges;
  anchor.column_names = std::move(column_names);
  anchor.seed = seed;
  anchor.values.resize(static_cast<Eigen::Index>(rows),
                       static_cast<Eigen::Index>(ranges.size()));
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < anchor.values.rows(); ++i) {
    for (std::size_t j = 0; j < ranges.size(); ++j) {
      const auto& r = ranges[j];
      anchor.values(i, static_cast<Eigen::Index>(j)) =
          r.min == r.max ? r.min : r.min + unit(rng) * (r.max - r.min);
    }
  }
  return anchor;
}

Matrix slice_anchor(const AnchorDataset& anchor, const std::vector<std::size_t>& columns) {
  Matrix out(anchor.values.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= static_cast<std::size_t>(anchor.values.cols())) {
      throw DataError("anchor column index " + std::to_string(columns[c]) + " out of range");
    }
    out.col(static_cast<Eigen::Index>(c)) =
        anchor.values.col(static_cast<Eigen::Index>(columns[c]));
  }
  return out;
}

Matrix slice_anchor(const AnchorDataset& anchor, const std::vector<std::string>& names) {
  std::vector<std::size_t> columns;
  for (const auto& name : names) {
    std::size_t idx = anchor.column_names.size();
    for (std::size_t j = 0; j < anchor.column_names.size(); ++j) {
      if (anchor.column_names[j] == name) idx = j;
    }
    if (idx == anchor.column_names.size()) {
      throw DataError("anchor has no column '" + name + "'");
    }
    columns.push_back(idx);
  }
  return slice_anchor(anchor, columns);
}

void save_anchor(const AnchorDataset& anchor, const std::filesystem::path& dir) {
  io::write_file(dir / kAnchorFile, io::matrix_to_csv(anchor.column_names, anchor.values));
  nlohmann::json meta;
  meta["seed"] = anchor.seed;
  meta["rows"] = anchor.rows();
  meta["columns"] = anchor.column_names;
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& r : anchor.ranges) ranges.push_back({r.min, r.max});
  meta["ranges"] = ranges;
  io::write_file(dir / kAnchorMetaFile, meta.dump(2) + "\n");
}

AnchorDataset load_anchor(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / kAnchorFile) ||
      !std::filesystem::exists(dir / kAnchorMetaFile)) {
    throw DataError("no anchor in '" + dir.string() +
                    "'; generate one first with the 'anchor' command");
  }
  AnchorDataset anchor;
  auto table = io::read_matrix_csv(dir / kAnchorFile);
  anchor.values = std::move(table.values);
  anchor.column_names = std::move(table.columns);
  const auto meta = nlohmann::json::parse(io::read_file(dir / kAnchorMetaFile));
  anchor.seed = meta.at("seed").get<std::uint64_t>();
  for (const auto& r : meta.at("ranges")) {
    anchor.ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  }
  if (meta.at("rows").get<std::size_t>() != anchor.rows() ||
      anchor.ranges.size() != anchor.column_names.size()) {
    throw IntegrityError("anchor.csv does not match anchor.meta.json");
  }
  return anchor;
}

}  // namespace dcsurv
