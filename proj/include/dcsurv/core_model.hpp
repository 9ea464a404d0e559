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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcsurv/io.hpp"
#include "dcsurv/rng.hpp"
#include "dcsurv/types.hpp"

namespace dcsurv {

// Covariates plus aligned outcomes for n samples. Immutable once built; the
// constructor enforces the shape, value-domain and id-uniqueness invariants.
class Dataset {
 public:
  Dataset(Outcomes outcomes, Matrix covariates,
          std::vector<std::string> covariate_names = {});

  std::size_t n() const { return outcomes_.size(); }
  std::size_t m() const { return static_cast<std::size_t>(covariates_.cols()); }

  const std::vector<SampleId>& ids() const { return outcomes_.ids; }
  const Matrix& covariates() const { return covariates_; }
  const std::vector<double>& time() const { return outcomes_.time; }
  const std::vector<int>& event() const { return outcomes_.event; }
  const std::vector<int>& treatment() const { return outcomes_.treatment; }
  const Outcomes& outcomes() const { return outcomes_; }
  const std::vector<std::string>& covariate_names() const { return names_; }

  // Row position of a sample id; throws DataError if unknown.
  std::size_t row_of(SampleId id) const;
  bool contains(SampleId id) const { return index_.contains(id); }

  // (min, max) of every covariate column.
  std::vector<std::pair<double, double>> column_ranges() const;

  // Dataset restricted to the given rows (in that order).
  Dataset select_rows(const std::vector<std::size_t>& rows) const;

  bool operator==(const Dataset& other) const;

 private:
  Outcomes outcomes_;
  Matrix covariates_;
  std::vector<std::string> names_;
  std::unordered_map<SampleId, std::size_t> index_;
};

// c row groups (institutions) by d column groups.
struct PartitionScheme {
  std::vector<std::vector<std::size_t>> row_groups;
  std::vector<std::vector<std::size_t>> col_groups;

  int institutions() const { return static_cast<int>(row_groups.size()); }
  int groups() const { return static_cast<int>(col_groups.size()); }

  // Throws DataError unless both group lists partition {0..n-1}, {0..m-1}
  // into non-empty sets.
  void validate(std::size_t n, std::size_t m) const;

  // Random near-equal row split (remainder to the lowest institutions; rows
  // kept ascending within a group) and contiguous near-equal column split.
  static PartitionScheme even(std::size_t n, std::size_t m, int institutions,
                              int groups, Rng& rng);
  // Near-equal contiguous split of {0..count-1}.
  static std::vector<std::vector<std::size_t>> contiguous(std::size_t count,
                                                          int parts);
};

// What party (k, l) holds. The outcome slice is attached to the l = 0 block
// of every institution only.
struct PartyBlock {
  PartyIndex party;
  std::vector<SampleId> ids;
  std::vector<std::size_t> columns;  // global covariate indices
  std::vector<std::string> column_names;
  Matrix covariates;
  std::optional<Outcomes> outcomes;

  bool holds_outcomes() const { return outcomes.has_value(); }
};

// Blocks in institution-major order: (0,0), (0,1), ..., (c-1,d-1).
std::vector<PartyBlock> partition(const Dataset& dataset,
                                  const PartitionScheme& scheme);

// Inverse of partition: rows sorted by id, columns in global order.
Dataset reassemble(const std::vector<PartyBlock>& blocks);

const PartyBlock& find_block(const std::vector<PartyBlock>& blocks,
                             PartyIndex party);

// "<column> <op> <value>" with op one of > >= < <= == !=.
struct TreatmentRule {
  std::string column;
  std::string op;
  double value = 0.0;

  static TreatmentRule parse(const std::string& text);
  bool apply(double x) const;
  std::string to_string() const;
};

struct SchemaConfig {
  std::string time_column = "time";
  std::string event_column = "event";
  std::optional<std::string> treatment_column;
  std::optional<TreatmentRule> treatment_rule;
  // Non-covariate columns to ignore (ids, study labels, ...).
  std::vector<std::string> exclude;
  // Keep the rule's source column as a covariate. Off by default: a rule
  // column left in the covariates determines Z exactly.
  bool keep_rule_column = false;
  char delimiter = ',';

  static SchemaConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct LoadResult {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

// Listwise deletion of rows with a missing cell ("", NA, NaN); sequential ids.
LoadResult load_csv(const std::filesystem::path& path, const SchemaConfig& schema);
LoadResult load_table(const io::CsvTable& table, const SchemaConfig& schema);

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset,
                       bool include_ids = false);

struct PreprocessOptions {
  bool impute_mean = true;
  // Non-numeric columns are one-hot encoded (first level dropped) unless
  // listed here, in which case they are passed through untouched.
  std::vector<std::string> passthrough;
};

io::CsvTable preprocess(const io::CsvTable& table, const PreprocessOptions& options);

bool is_missing(std::string_view cell);

}  // namespace dcsurv
