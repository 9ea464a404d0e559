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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcsurv/types.hpp"

namespace dcsurv::io {

// Round-trip exact text form of a double (17 significant digits).
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, char delimiter = ',');
CsvTable read_csv(const std::filesystem::path& path, char delimiter = ',');
std::string to_csv(const CsvTable& table, char delimiter = ',');

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Numeric matrix with optional leading "id" column.
struct LabeledMatrix {
  std::vector<std::string> columns;
  std::vector<SampleId> ids;  // empty when the file carries no id column
  Matrix values;
};

std::string matrix_to_csv(const std::vector<std::string>& columns,
                          const Matrix& values,
                          const std::vector<SampleId>* ids = nullptr);
LabeledMatrix matrix_from_csv(const CsvTable& table);
LabeledMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace dcsurv::io
