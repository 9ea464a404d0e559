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
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcsurv/anchor.hpp"
#include "dcsurv/collab.hpp"
#include "dcsurv/core_model.hpp"
#include "dcsurv/matching.hpp"
#include "dcsurv/metrics.hpp"
#include "dcsurv/propensity.hpp"
#include "dcsurv/reduce.hpp"
#include "dcsurv/survival.hpp"
#include "dcsurv/synth.hpp"

namespace dcsurv {

enum class MethodKind { kCA, kLA, kLMCA, kDCQE };
const char* method_kind_name(MethodKind kind);
MethodKind parse_method_kind(const std::string& name);

struct AnalysisOptions {
  LogisticConfig logistic;
  MatchConfig match;
};

struct MethodResult {
  std::string method;
  MethodKind kind = MethodKind::kCA;
  PropensityScores scores;
  MatchedSet matched;
  ArmCurves curves;
  BalanceReport balance;
  std::size_t sample_size = 0;
  double anchor_alignment = std::numeric_limits<double>::quiet_NaN();
};

// Analyst holds all covariates: logistic on raw covariates, match, KM.
MethodResult run_ca(const Dataset& dataset, const AnalysisOptions& options);

// One user alone on its own covariates and outcomes. `truth` is only used
// for the balance evaluation on the original covariates.
MethodResult run_la(const Dataset& truth, const Matrix& covariates,
                    const Outcomes& outcomes, const AnalysisOptions& options,
                    std::string label = "LA");

struct LocalUser {
  Matrix covariates;
  Outcomes outcomes;
};

// Each user matches locally; only matched (t, delta, Z) are pooled.
MethodResult run_lmca(const Dataset& truth, const std::vector<LocalUser>& users,
                      const AnalysisOptions& options, std::string label = "LMCA");

// Analyst side of the protocol: shares in, fused scores and curves out.
struct AnalystResult {
  CollabFit fit;
  CollabRepresentation representation;
  LogisticModel model;
  PropensityScores scores;
  Outcomes outcomes;  // aligned to representation.ids
  MatchedSet matched;
  ArmCurves curves;
  double anchor_alignment = 0.0;
};

// collab_dim 0 selects min_k m~_k. Every institution must contribute exactly
// one outcome slice.
AnalystResult analyze_shares(const std::vector<PartyShare>& shares, int collab_dim,
                             const AnalysisOptions& options,
                             const std::string& label = "DCQE");

struct DcqeOptions {
  int party_dim = 0;  // m~_kl for every party; 0: ceil(m_l / 2)
  int collab_dim = 0;
  bool standardize = false;
  bool enforce_privacy = false;
};

// In-process DC-QE over the parties in scope. Each in-scope institution's
// outcome slice is taken from its holder block.
MethodResult run_dcqe(const Dataset& truth, const std::vector<PartyBlock>& blocks,
                      const std::vector<PartyIndex>& scope, const AnchorDataset& anchor,
                      const DcqeOptions& dcqe, const AnalysisOptions& options,
                      std::string label = "DCQE");

// Shorthand scopes over a c x d grid.
std::vector<PartyIndex> resolve_scope(const std::string& name, int institutions,
                                      int groups);

// ---------------------------------------------------------------------------
// Repeated experiments

struct CsvSource {
  std::filesystem::path path;
  SchemaConfig schema;
  std::optional<TreatmentRule> row_filter;  // keep rows where the rule holds
  bool one_hot = true;                      // encode text columns before loading
};

// Reads, filters and encodes the table; missing cells cause listwise deletion.
LoadResult load_source(const CsvSource& source);

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::kCA;
  std::vector<PartyIndex> parties;  // LA: one party; LMCA/DCQE: the scope
  int party_dim = 0;
  int collab_dim = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::variant<synth::SynthConfig, CsvSource> data;
  int institutions = 1;
  int groups = 1;
  std::vector<MethodSpec> methods;
  bool standardize = false;
  std::size_t anchor_rows = 0;  // 0: n
  AnalysisOptions analysis;
  int repetitions = 1;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: hardware concurrency

  void validate() const;
  // Relative csv paths resolve against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
  // SHA-256 of the canonical JSON (workers excluded).
  std::string digest() const;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct RepetitionMetrics {
  double sample_size = 0.0;
  double masmd = 0.0;
  double inconsistency = 0.0;
  double gap_treated = 0.0;
  double gap_control = 0.0;
};

struct ReportRow {
  std::string method;
  Summary sample_size;
  Summary masmd;
  Summary inconsistency;
  Summary gap_treated;
  Summary gap_control;
};

struct ReportTable {
  std::vector<ReportRow> rows;
  int repetitions = 0;
  int failures = 0;
  std::string config_digest;

  const ReportRow& row(const std::string& method) const;
};

struct MeanCurve {
  std::string method;
  std::vector<double> grid;
  std::vector<double> treated;
  std::vector<double> control;
};

struct ExperimentReport {
  ReportTable table;
  // per_rep[method index][repetition], successful repetitions only
  std::vector<std::vector<RepetitionMetrics>> per_rep;
  std::vector<MeanCurve> mean_curves;
  std::vector<std::string> failure_messages;
  std::string la_reporting;  // which user the LA row describes
};

// Results of every configured method for one repetition (CA included).
// Synthetic data is generated from the repetition seed; csv experiments pass
// the loaded dataset as `fixed`.
std::vector<MethodResult> run_repetition(const ExperimentConfig& config, int repetition,
                                         const Dataset* fixed = nullptr);

ExperimentReport run_experiment(const ExperimentConfig& config);

std::string report_to_csv(const ReportTable& table);
std::string report_to_text(const ReportTable& table);
// report.csv, report.txt, report.json, curves_<method>.csv
void write_experiment_outputs(const ExperimentReport& report,
                              const ExperimentConfig& config,
                              const std::filesystem::path& dir);

}  // namespace dcsurv
