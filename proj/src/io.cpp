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

#include "dcsurv/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dcsurv/error.hpp"

namespace dcsurv::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string quote_if_needed(const std::string& cell, char delimiter) {
  if (cell.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) {
    return cell;
  }
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 17);
  if (ec != std::errc{}) throw DataError("failed to format number");
  return std::string(buf.data(), ptr);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const {
  auto idx = column(name);
  if (!idx) throw ConfigError("missing column '" + std::string(name) + "'");
  return *idx;
}

CsvTable parse_csv(std::string_view text, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  auto end_cell = [&] {
    record.push_back(std::string(trim(cell)));
    cell.clear();
    cell_started = false;
  };
  auto end_record = [&] {
    end_cell();
    // Skip blank lines.
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && !cell_started) {
      in_quotes = true;
      cell_started = true;
    } else if (c == delimiter) {
      end_cell();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      // tolerated; CRLF handled by the '\n' branch
    } else {
      cell += c;
      if (c != ' ' && c != '\t') cell_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field in CSV");
  if (!cell.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw DataError("CSV input is empty (a header row is required)");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("CSV row " + std::to_string(r) + " has " +
                      std::to_string(records[r].size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, char delimiter) {
  return parse_csv(read_file(path), delimiter);
}

std::string to_csv(const CsvTable& table, char delimiter) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += delimiter;
      out += quote_if_needed(row[i], delimiter);
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("short write to '" + path.string() + "'");
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw IntegrityError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

std::string matrix_to_csv(const std::vector<std::string>& columns, const Matrix& values,
                          const std::vector<SampleId>* ids) {
  if (static_cast<Eigen::Index>(columns.size()) != values.cols()) {
    throw DataError("column names do not match matrix width");
  }
  if (ids != nullptr && static_cast<Eigen::Index>(ids->size()) != values.rows()) {
    throw DataError("id count does not match matrix height");
  }
  std::string out;
  bool first = true;
  if (ids != nullptr) {
    out += "id";
    first = false;
  }
  for (const auto& c : columns) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    first = true;
    if (ids != nullptr) {
      out += std::to_string((*ids)[static_cast<std::size_t>(r)]);
      first = false;
    }
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (!first) out += ',';
      out += format_double(values(r, c));
      first = false;
    }
    out += '\n';
  }
  return out;
}

LabeledMatrix matrix_from_csv(const CsvTable& table) {
  LabeledMatrix m;
  std::size_t start = 0;
  const bool has_ids = !table.header.empty() && table.header.front() == "id";
  if (has_ids) start = 1;
  m.columns.assign(table.header.begin() + static_cast<std::ptrdiff_t>(start),
                   table.header.end());
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                  static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (has_ids) {
      auto id = parse_integer(row[0]);
      if (!id) throw DataError("row " + std::to_string(r + 1) + ": bad id '" + row[0] + "'");
      m.ids.push_back(*id);
    }
    for (std::size_t c = start; c < row.size(); ++c) {
      auto v = parse_double(row[c]);
      if (!v) {
        throw DataError("row " + std::to_string(r + 1) + ", column '" + table.header[c] +
                        "': not a number ('" + row[c] + "')");
      }
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - start)) = *v;
    }
  }
  return m;
}

LabeledMatrix read_matrix_csv(const std::filesystem::path& path) {
  return matrix_from_csv(read_csv(path));
}

}  // namespace dcsurv::io
