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

#include "dcsurv/core_model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"

namespace dcsurv {

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Outcomes outcomes, Matrix covariates,
                 std::vector<std::string> covariate_names)
    : outcomes_(std::move(outcomes)),
      covariates_(std::move(covariates)),
      names_(std::move(covariate_names)) {
  outcomes_.validate();
  if (static_cast<std::size_t>(covariates_.rows()) != outcomes_.size()) {
    throw DataError("covariate matrix has " + std::to_string(covariates_.rows()) +
                    " rows but there are " + std::to_string(outcomes_.size()) +
                    " samples");
  }
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < covariates_.cols(); ++j) {
      names_.push_back("x" + std::to_string(j + 1));
    }
  }
  if (names_.size() != static_cast<std::size_t>(covariates_.cols())) {
    throw DataError("covariate name count does not match column count");
  }
  index_.reserve(outcomes_.size());
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    if (!index_.emplace(outcomes_.ids[i], i).second) {
      throw DataError("duplicate sample id " + std::to_string(outcomes_.ids[i]));
    }
  }
}

std::size_t Dataset::row_of(SampleId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unknown sample id " + std::to_string(id));
  return it->second;
}

std::vector<std::pair<double, double>> Dataset::column_ranges() const {
  std::vector<std::pair<double, double>> out;
  for (Eigen::Index j = 0; j < covariates_.cols(); ++j) {
    out.emplace_back(covariates_.col(j).minCoeff(), covariates_.col(j).maxCoeff());
  }
  return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  Matrix x(static_cast<Eigen::Index>(rows.size()), covariates_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = covariates_.row(static_cast<Eigen::Index>(rows[i]));
  }
  return Dataset(outcomes_.select(rows), std::move(x), names_);
}

bool Dataset::operator==(const Dataset& other) const {
  return outcomes_.ids == other.outcomes_.ids && outcomes_.time == other.outcomes_.time &&
         outcomes_.event == other.outcomes_.event &&
         outcomes_.treatment == other.outcomes_.treatment && names_ == other.names_ &&
         covariates_.rows() == other.covariates_.rows() &&
         covariates_.cols() == other.covariates_.cols() &&
         covariates_ == other.covariates_;
}

// ---------------------------------------------------------------------------
// Partitioning

namespace {

void check_partition(const std::vector<std::vector<std::size_t>>& groups, std::size_t count,
                     const char* what) {
  if (groups.empty()) throw DataError(std::string("no ") + what + " groups");
  std::vector<int> seen(count, 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) {
      throw DataError(std::string(what) + " group " + std::to_string(g + 1) + " is empty");
    }
    for (std::size_t idx : groups[g]) {
      if (idx >= count) {
        throw DataError(std::string(what) + " index " + std::to_string(idx) +
                        " out of range");
      }
      if (seen[idx]++ > 0) {
        throw DataError(std::string(what) + " index " + std::to_string(idx) +
                        " appears in more than one group");
      }
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (seen[i] == 0) {
      throw DataError(std::string(what) + " index " + std::to_string(i) +
                      " is not covered by any group");
    }
  }
}

}  // namespace

void PartitionScheme::validate(std::size_t n, std::size_t m) const {
  check_partition(row_groups, n, "row");
  check_partition(col_groups, m, "column");
}

std::vector<std::vector<std::size_t>> PartitionScheme::contiguous(std::size_t count,
                                                                  int parts) {
  if (parts < 1) throw ConfigError("group count must be positive");
  if (static_cast<std::size_t>(parts) > count) {
    throw ConfigError("cannot split " + std::to_string(count) + " items into " +
                      std::to_string(parts) + " non-empty groups");
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(parts));
  const std::size_t base = count / static_cast<std::size_t>(parts);
  const std::size_t extra = count % static_cast<std::size_t>(parts);
  std::size_t next = 0;
  for (std::size_t g = 0; g < out.size(); ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) out[g].push_back(next++);
  }
  return out;
}

PartitionScheme PartitionScheme::even(std::size_t n, std::size_t m, int institutions,
                                      int groups, Rng& rng) {
  PartitionScheme scheme;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  auto slots = contiguous(n, institutions);
  for (auto& slot : slots) {
    for (auto& pos : slot) pos = order[pos];
    std::sort(slot.begin(), slot.end());
  }
  scheme.row_groups = std::move(slots);
  scheme.col_groups = contiguous(m, groups);
  return scheme;
}

std::vector<PartyBlock> partition(const Dataset& dataset, const PartitionScheme& scheme) {
  scheme.validate(dataset.n(), dataset.m());
  std::vector<PartyBlock> blocks;
  blocks.reserve(scheme.row_groups.size() * scheme.col_groups.size());
  for (int k = 0; k < scheme.institutions(); ++k) {
    const auto& rows = scheme.row_groups[static_cast<std::size_t>(k)];
    for (int l = 0; l < scheme.groups(); ++l) {
      const auto& cols = scheme.col_groups[static_cast<std::size_t>(l)];
      PartyBlock block;
      block.party = {k, l};
      block.columns = cols;
      block.covariates.resize(static_cast<Eigen::Index>(rows.size()),
                              static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        block.column_names.push_back(dataset.covariate_names()[cols[c]]);
      }
      for (std::size_t r = 0; r < rows.size(); ++r) {
        block.ids.push_back(dataset.ids()[rows[r]]);
        for (std::size_t c = 0; c < cols.size(); ++c) {
          block.covariates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              dataset.covariates()(static_cast<Eigen::Index>(rows[r]),
                                   static_cast<Eigen::Index>(cols[c]));
        }
      }
      if (l == 0) block.outcomes = dataset.outcomes().select(rows);
      blocks.push_back(std::move(block));
    }
  }
  return blocks;
}

const PartyBlock& find_block(const std::vector<PartyBlock>& blocks, PartyIndex party) {
  for (const auto& b : blocks) {
    if (b.party == party) return b;
  }
  throw ConfigError("party " + party.label() + " does not exist in this partition");
}

Dataset reassemble(const std::vector<PartyBlock>& blocks) {
  if (blocks.empty()) throw DataError("no blocks to reassemble");
  // Column layout from the blocks of any one institution.
  std::map<std::size_t, std::string> names;
  std::size_t m = 0;
  const int first_institution = blocks.front().party.institution;
  for (const auto& b : blocks) {
    if (b.party.institution != first_institution) continue;
    for (std::size_t c = 0; c < b.columns.size(); ++c) names[b.columns[c]] = b.column_names[c];
    m += b.columns.size();
  }
  std::vector<Outcomes> parts;
  for (const auto& b : blocks) {
    if (b.outcomes) parts.push_back(*b.outcomes);
  }
  Outcomes all = Outcomes::concat(parts);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return all.ids[a] < all.ids[b]; });
  Outcomes sorted = all.select(order);
  std::map<SampleId, Eigen::Index> row_of;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    row_of[sorted.ids[i]] = static_cast<Eigen::Index>(i);
  }
  Matrix x = Matrix::Constant(static_cast<Eigen::Index>(sorted.size()),
                              static_cast<Eigen::Index>(m),
                              std::numeric_limits<double>::quiet_NaN());
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < b.ids.size(); ++r) {
      auto it = row_of.find(b.ids[r]);
      if (it == row_of.end()) {
        throw DataError("block " + b.party.label() + " holds a sample with no outcomes");
      }
      for (std::size_t c = 0; c < b.columns.size(); ++c) {
        x(it->second, static_cast<Eigen::Index>(b.columns[c])) =
            b.covariates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  std::vector<std::string> ordered_names;
  for (auto& [idx, name] : names) ordered_names.push_back(name);
  return Dataset(std::move(sorted), std::move(x), std::move(ordered_names));
}

// ---------------------------------------------------------------------------
// CSV ingestion

TreatmentRule TreatmentRule::parse(const std::string& text) {
  static const std::vector<std::string> kOps = {">=", "<=", "==", "!=", ">", "<"};
  for (const auto& op : kOps) {
    auto pos = text.find(op);
    if (pos == std::string::npos) continue;
    TreatmentRule rule;
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    rule.column = strip(text.substr(0, pos));
    rule.op = op;
    auto value = io::parse_double(strip(text.substr(pos + op.size())));
    if (rule.column.empty() || !value) {
      throw ConfigError("bad treatment rule '" + text + "' (expected '<col> <op> <value>')");
    }
    rule.value = *value;
    return rule;
  }
  throw ConfigError("bad treatment rule '" + text + "' (no comparison operator)");
}

bool TreatmentRule::apply(double x) const {
  if (op == ">") return x > value;
  if (op == ">=") return x >= value;
  if (op == "<") return x < value;
  if (op == "<=") return x <= value;
  if (op == "==") return x == value;
  if (op == "!=") return x != value;
  throw ConfigError("unknown operator '" + op + "'");
}

std::string TreatmentRule::to_string() const {
  return column + " " + op + " " + io::format_double(value);
}

SchemaConfig SchemaConfig::from_json(const nlohmann::json& j) {
  SchemaConfig s;
  if (!j.is_object()) throw ConfigError("schema must be a JSON object");
  s.time_column = j.value("time", s.time_column);
  s.event_column = j.value("event", s.event_column);
  if (j.contains("treatment")) s.treatment_column = j.at("treatment").get<std::string>();
  if (j.contains("treatment_rule")) {
    s.treatment_rule = TreatmentRule::parse(j.at("treatment_rule").get<std::string>());
  }
  if (s.treatment_column && s.treatment_rule) {
    throw ConfigError("schema gives both 'treatment' and 'treatment_rule'");
  }
  if (!s.treatment_column && !s.treatment_rule) {
    throw ConfigError("schema needs 'treatment' or 'treatment_rule'");
  }
  s.exclude = j.value("exclude", std::vector<std::string>{});
  s.keep_rule_column = j.value("keep_rule_column", false);
  const std::string delim = j.value("delimiter", std::string(","));
  if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
  s.delimiter = delim[0];
  return s;
}

nlohmann::json SchemaConfig::to_json() const {
  nlohmann::json j;
  j["time"] = time_column;
  j["event"] = event_column;
  if (treatment_column) j["treatment"] = *treatment_column;
  if (treatment_rule) j["treatment_rule"] = treatment_rule->to_string();
  j["exclude"] = exclude;
  j["keep_rule_column"] = keep_rule_column;
  j["delimiter"] = std::string(1, delimiter);
  return j;
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "." ||
         cell == "NULL";
}

LoadResult load_table(const io::CsvTable& table, const SchemaConfig& schema) {
  const std::size_t time_col = table.require_column(schema.time_column);
  const std::size_t event_col = table.require_column(schema.event_column);
  std::optional<std::size_t> treat_col;
  std::optional<std::size_t> rule_col;
  if (schema.treatment_column) {
    treat_col = table.require_column(*schema.treatment_column);
  } else if (schema.treatment_rule) {
    rule_col = table.require_column(schema.treatment_rule->column);
  } else {
    throw ConfigError("schema names no treatment column or rule");
  }
  for (const auto& ex : schema.exclude) table.require_column(ex);

  std::vector<std::size_t> covariate_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == time_col || c == event_col || (treat_col && c == *treat_col)) continue;
    if (rule_col && c == *rule_col && !schema.keep_rule_column) continue;
    if (std::find(schema.exclude.begin(), schema.exclude.end(), table.header[c]) !=
        schema.exclude.end()) {
      continue;
    }
    covariate_cols.push_back(c);
  }

  Outcomes outcomes;
  std::vector<std::vector<double>> rows;
  std::size_t dropped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<std::size_t> needed = covariate_cols;
    needed.push_back(time_col);
    needed.push_back(event_col);
    if (treat_col) needed.push_back(*treat_col);
    if (rule_col) needed.push_back(*rule_col);
    bool missing = false;
    for (std::size_t c : needed) missing = missing || is_missing(row[c]);
    if (missing) {
      ++dropped;
      continue;
    }
    auto number = [&](std::size_t c) {
      auto v = io::parse_double(row[c]);
      if (!v) {
        throw DataError("row " + std::to_string(r + 1) + ", column '" + table.header[c] +
                        "': non-numeric value '" + row[c] +
                        "' (run the preprocess command to encode categorical columns)");
      }
      return *v;
    };
    auto binary = [&](std::size_t c) {
      const double v = number(c);
      if (v != 0.0 && v != 1.0) {
        throw DataError("row " + std::to_string(r + 1) + ", column '" + table.header[c] +
                        "': expected 0 or 1, got '" + row[c] + "'");
      }
      return static_cast<int>(v);
    };
    std::vector<double> x;
    x.reserve(covariate_cols.size());
    for (std::size_t c : covariate_cols) x.push_back(number(c));
    const double t = number(time_col);
    if (t < 0.0) {
      throw DataError("row " + std::to_string(r + 1) + ": negative time " + row[time_col]);
    }
    outcomes.ids.push_back(static_cast<SampleId>(outcomes.ids.size()));
    outcomes.time.push_back(t);
    outcomes.event.push_back(binary(event_col));
    outcomes.treatment.push_back(treat_col ? binary(*treat_col)
                                           : (schema.treatment_rule->apply(number(*rule_col))
                                                  ? 1
                                                  : 0));
    rows.push_back(std::move(x));
  }
  if (dropped > 0) {
    warn("dropped " + std::to_string(dropped) + " row(s) with missing values");
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(covariate_cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < covariate_cols.size(); ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  std::vector<std::string> names;
  for (std::size_t c : covariate_cols) names.push_back(table.header[c]);
  return LoadResult{Dataset(std::move(outcomes), std::move(x), std::move(names)), dropped};
}

LoadResult load_csv(const std::filesystem::path& path, const SchemaConfig& schema) {
  return load_table(io::read_csv(path, schema.delimiter), schema);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset,
                       bool include_ids) {
  std::string out;
  if (include_ids) out += "id,";
  for (const auto& name : dataset.covariate_names()) out += name + ",";
  out += "time,event,treat\n";
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    if (include_ids) out += std::to_string(dataset.ids()[i]) + ",";
    for (Eigen::Index j = 0; j < dataset.covariates().cols(); ++j) {
      out += io::format_double(dataset.covariates()(static_cast<Eigen::Index>(i), j));
      out += ',';
    }
    out += io::format_double(dataset.time()[i]) + "," + std::to_string(dataset.event()[i]) +
           "," + std::to_string(dataset.treatment()[i]) + "\n";
  }
  io::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Preprocessing

io::CsvTable preprocess(const io::CsvTable& table, const PreprocessOptions& options) {
  io::CsvTable out;
  const std::size_t rows = table.rows.size();
  std::vector<std::vector<std::string>> columns_out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    bool numeric = true;
    double sum = 0.0;
    std::size_t present = 0;
    std::set<std::string> levels;
    for (const auto& row : table.rows) {
      if (is_missing(row[c])) continue;
      auto v = io::parse_double(row[c]);
      if (v) {
        sum += *v;
        ++present;
      } else {
        numeric = false;
      }
      levels.insert(row[c]);
    }
    const bool passthrough = std::find(options.passthrough.begin(), options.passthrough.end(),
                                       name) != options.passthrough.end();
    if (numeric || passthrough) {
      out.header.push_back(name);
      std::vector<std::string> col;
      const std::string fill = (numeric && options.impute_mean && present > 0)
                                   ? io::format_double(sum / static_cast<double>(present))
                                   : std::string{};
      for (const auto& row : table.rows) {
        col.push_back(is_missing(row[c]) && numeric && options.impute_mean ? fill : row[c]);
      }
      columns_out.push_back(std::move(col));
      continue;
    }
    // One-hot, first (lexicographic) level as reference.
    std::vector<std::string> ordered(levels.begin(), levels.end());
    for (std::size_t li = 1; li < ordered.size(); ++li) {
      out.header.push_back(name + "_" + ordered[li]);
      std::size_t hits = 0;
      for (const auto& row : table.rows) hits += row[c] == ordered[li] ? 1 : 0;
      std::size_t nonmissing = 0;
      for (const auto& row : table.rows) nonmissing += is_missing(row[c]) ? 0 : 1;
      const std::string fill =
          options.impute_mean && nonmissing > 0
              ? io::format_double(static_cast<double>(hits) / static_cast<double>(nonmissing))
              : std::string{};
      std::vector<std::string> col;
      for (const auto& row : table.rows) {
        if (is_missing(row[c])) {
          col.push_back(fill);
        } else {
          col.push_back(row[c] == ordered[li] ? "1" : "0");
        }
      }
      columns_out.push_back(std::move(col));
    }
  }
  out.rows.assign(rows, {});
  for (std::size_t r = 0; r < rows; ++r) {
    for (const auto& col : columns_out) out.rows[r].push_back(col[r]);
  }
  return out;
}

}  // namespace dcsurv
