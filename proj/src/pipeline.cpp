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

#include "dcsurv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "dcsurv/error.hpp"
#include "dcsurv/io.hpp"
#include "dcsurv/log.hpp"
#include "dcsurv/rng.hpp"

namespace dcsurv {

const char* method_kind_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::kCA: return "CA";
    case MethodKind::kLA: return "LA";
    case MethodKind::kLMCA: return "LMCA";
    case MethodKind::kDCQE: return "DCQE";
  }
  return "?";
}

MethodKind parse_method_kind(const std::string& name) {
  if (name == "CA") return MethodKind::kCA;
  if (name == "LA") return MethodKind::kLA;
  if (name == "LMCA") return MethodKind::kLMCA;
  if (name == "DCQE" || name == "DC-QE") return MethodKind::kDCQE;
  throw ConfigError("unknown method kind '" + name + "' (expected CA, LA, LMCA or DCQE)");
}

namespace {

MethodResult finish(const Dataset& truth, std::string label, MethodKind kind,
                    PropensityScores scores, MatchedSet matched, const Outcomes& outcomes) {
  MethodResult r;
  r.method = std::move(label);
  r.kind = kind;
  r.scores = std::move(scores);
  r.scores.source = r.method;
  r.matched = std::move(matched);
  r.curves = km_by_group(r.matched, outcomes);
  r.balance = balance(truth, r.matched);
  r.sample_size = matched_sample_size(r.matched);
  return r;
}

struct LocalFit {
  PropensityScores scores;
  MatchedSet matched;
};

LocalFit fit_and_match(const Matrix& covariates, const Outcomes& outcomes,
                       const AnalysisOptions& options, const std::string& label) {
  if (static_cast<std::size_t>(covariates.rows()) != outcomes.size()) {
    throw DataError(label + ": covariate rows do not match outcome rows");
  }
  LocalFit f;
  try {
    const LogisticModel model = fit_logistic(covariates, outcomes.treatment, options.logistic);
    f.scores = score(model, covariates, outcomes.ids, label);
  } catch (const DataError& e) {
    throw DataError(label + ": " + e.what());
  }
  f.matched = caliper_match(f.scores, outcomes.treatment, options.match);
  return f;
}

}  // namespace

MethodResult run_ca(const Dataset& dataset, const AnalysisOptions& options) {
  LocalFit f = fit_and_match(dataset.covariates(), dataset.outcomes(), options, "CA");
  return finish(dataset, "CA", MethodKind::kCA, std::move(f.scores), std::move(f.matched),
                dataset.outcomes());
}

MethodResult run_la(const Dataset& truth, const Matrix& covariates, const Outcomes& outcomes,
                    const AnalysisOptions& options, std::string label) {
  LocalFit f = fit_and_match(covariates, outcomes, options, label);
  return finish(truth, std::move(label), MethodKind::kLA, std::move(f.scores),
                std::move(f.matched), outcomes);
}

MethodResult run_lmca(const Dataset& truth, const std::vector<LocalUser>& users,
                      const AnalysisOptions& options, std::string label) {
  if (users.empty()) throw DataError(label + ": no users in scope");
  std::vector<PropensityScores> parts;
  std::vector<Outcomes> outcome_parts;
  MatchedSet pooled;
  for (std::size_t u = 0; u < users.size(); ++u) {
    LocalFit f = fit_and_match(users[u].covariates, users[u].outcomes, options,
                               label + " user " + std::to_string(u + 1));
    parts.push_back(std::move(f.scores));
    outcome_parts.push_back(users[u].outcomes);
    pooled.caliper_width = std::max(pooled.caliper_width, f.matched.caliper_width);
    pooled.pairs.insert(pooled.pairs.end(), f.matched.pairs.begin(), f.matched.pairs.end());
    pooled.matched_ids.insert(pooled.matched_ids.end(), f.matched.matched_ids.begin(),
                              f.matched.matched_ids.end());
  }
  std::sort(pooled.matched_ids.begin(), pooled.matched_ids.end());
  if (std::adjacent_find(pooled.matched_ids.begin(), pooled.matched_ids.end()) !=
      pooled.matched_ids.end()) {
    throw DataError(label + ": users in scope share sample ids");
  }
  const Outcomes outcomes = Outcomes::concat(outcome_parts);
  return finish(truth, label, MethodKind::kLMCA, PropensityScores::concat(parts, label),
                std::move(pooled), outcomes);
}

AnalystResult analyze_shares(const std::vector<PartyShare>& shares, int collab_dim,
                             const AnalysisOptions& options, const std::string& label) {
  if (shares.empty()) throw DataError(label + ": no party shares");
  std::map<int, std::vector<const PartyShare*>> by_institution;
  for (const auto& s : shares) by_institution[s.party.institution].push_back(&s);

  std::vector<Matrix> anchor_reps;
  std::vector<InstitutionRep> data_reps;
  std::vector<int> institutions;
  std::vector<Outcomes> outcome_parts;
  for (auto& [k, parties] : by_institution) {
    std::sort(parties.begin(), parties.end(),
              [](const PartyShare* a, const PartyShare* b) { return a->party < b->party; });
    Eigen::Index cols = 0;
    const Eigen::Index rows = parties.front()->anchor.matrix.rows();
    const Outcomes* holder = nullptr;
    std::vector<const IntermediateRep*> data;
    for (const auto* p : parties) {
      if (p->anchor.matrix.rows() != rows) {
        throw DataError("party " + p->party.label() + " transformed a different anchor size");
      }
      cols += p->anchor.matrix.cols();
      data.push_back(&p->data);
      if (p->outcomes && !holder) holder = &*p->outcomes;
    }
    if (!holder) {
      throw DataError("institution " + std::to_string(k + 1) + " shared no outcomes");
    }
    Matrix anchor(rows, cols);
    Eigen::Index offset = 0;
    for (const auto* p : parties) {
      anchor.middleCols(offset, p->anchor.matrix.cols()) = p->anchor.matrix;
      offset += p->anchor.matrix.cols();
    }
    anchor_reps.push_back(std::move(anchor));
    data_reps.push_back(concat_institution(data));
    if (holder->ids != data_reps.back().ids) {
      throw DataError("institution " + std::to_string(k + 1) +
                      ": outcome rows are not aligned with the shared representations");
    }
    institutions.push_back(k);
    outcome_parts.push_back(*holder);
  }

  AnalystResult out;
  out.fit = build_collab_transforms(anchor_reps, collab_dim);
  for (std::size_t i = 0; i < out.fit.transforms.size(); ++i) {
    out.fit.transforms[i].institution = institutions[i];
  }
  out.anchor_alignment = anchor_alignment_error(anchor_reps, out.fit);
  out.representation = build_collab_representation(data_reps, out.fit.transforms);
  out.outcomes = Outcomes::concat(outcome_parts);
  try {
    out.model = fit_logistic(out.representation.x_check, out.outcomes.treatment,
                             options.logistic);
  } catch (const DataError& e) {
    throw DataError(label + ": " + e.what());
  }
  out.scores = score(out.model, out.representation.x_check, out.representation.ids, label);
  out.matched = caliper_match(out.scores, out.outcomes.treatment, options.match);
  out.curves = km_by_group(out.matched, out.outcomes);
  return out;
}

MethodResult run_dcqe(const Dataset& truth, const std::vector<PartyBlock>& blocks,
                      const std::vector<PartyIndex>& scope, const AnchorDataset& anchor,
                      const DcqeOptions& dcqe, const AnalysisOptions& options,
                      std::string label) {
  if (scope.empty()) throw DataError(label + ": empty collaboration scope");
  std::vector<PartyShare> shares;
  std::set<int> holders;
  for (const PartyIndex& p : scope) {
    const PartyBlock& block = find_block(blocks, p);
    ReduceOptions ro;
    ro.target_dim = dcqe.party_dim > 0 ? std::min<int>(dcqe.party_dim,
                                                       static_cast<int>(block.columns.size()))
                                       : 0;
    ro.standardize = dcqe.standardize;
    ro.enforce_privacy = dcqe.enforce_privacy;
    shares.push_back(encode_party(block, slice_anchor(anchor, block.columns), ro));
    if (shares.back().outcomes) holders.insert(p.institution);
  }
  // Outcome holders left out of the scope still share (t, delta, Z).
  for (auto& s : shares) {
    if (!holders.contains(s.party.institution)) {
      s.outcomes = find_block(blocks, {s.party.institution, 0}).outcomes;
      holders.insert(s.party.institution);
    }
  }
  AnalystResult a = analyze_shares(shares, dcqe.collab_dim, options, label);
  MethodResult r = finish(truth, std::move(label), MethodKind::kDCQE, std::move(a.scores),
                          std::move(a.matched), a.outcomes);
  r.anchor_alignment = a.anchor_alignment;
  return r;
}

std::vector<PartyIndex> resolve_scope(const std::string& name, int institutions, int groups) {
  std::vector<PartyIndex> out;
  if (name == "left") {
    for (int k = 0; k < institutions; ++k) out.push_back({k, 0});
  } else if (name == "right") {
    for (int k = 0; k < institutions; ++k) out.push_back({k, groups - 1});
  } else if (name == "top") {
    for (int l = 0; l < groups; ++l) out.push_back({0, l});
  } else if (name == "bottom") {
    for (int l = 0; l < groups; ++l) out.push_back({institutions - 1, l});
  } else if (name == "whole") {
    for (int k = 0; k < institutions; ++k) {
      for (int l = 0; l < groups; ++l) out.push_back({k, l});
    }
  } else {
    throw ConfigError("unknown scope '" + name +
                      "' (expected left, right, top, bottom or whole)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data sources

LoadResult load_source(const CsvSource& source) {
  io::CsvTable table = io::read_csv(source.path, source.schema.delimiter);
  if (source.row_filter) {
    const std::size_t col = table.require_column(source.row_filter->column);
    std::vector<std::vector<std::string>> kept;
    for (auto& row : table.rows) {
      const auto v = io::parse_double(row[col]);
      if (v && source.row_filter->apply(*v)) kept.push_back(std::move(row));
    }
    table.rows = std::move(kept);
  }
  if (source.one_hot) {
    PreprocessOptions pre;
    pre.impute_mean = false;
    pre.passthrough = source.schema.exclude;
    table = preprocess(table, pre);
  }
  return load_table(table, source.schema);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

PartyIndex party_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("a party is written as [institution, group] (1-based)");
  }
  const int k = j[0].get<int>();
  const int l = j[1].get<int>();
  if (k < 1 || l < 1) throw ConfigError("party indices are 1-based");
  return {k - 1, l - 1};
}

nlohmann::json party_to_json(PartyIndex p) {
  return nlohmann::json::array({p.institution + 1, p.group + 1});
}

std::filesystem::path resolve_data_path(const std::filesystem::path& path,
                                        const std::filesystem::path& base_dir) {
  if (path.is_absolute()) return path;
  if (const char* dir = std::getenv("DCSURV_DATA_DIR"); dir && *dir) {
    const std::filesystem::path candidate = std::filesystem::path(dir) / path.filename();
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return base_dir.empty() ? path : base_dir / path;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (institutions < 1 || groups < 1) {
    throw ConfigError("institutions and groups must be at least 1");
  }
  if (workers < 0) throw ConfigError("workers must be non-negative");
  if (methods.empty()) throw ConfigError("no methods requested");
  analysis.match.validate();
  if (const auto* s = std::get_if<synth::SynthConfig>(&data)) {
    s->validate();
    if (static_cast<int>(synth::kCovariates) < groups) {
      throw ConfigError("more covariate groups than covariates");
    }
  }
  std::set<std::string> names;
  for (const auto& m : methods) {
    if (!names.insert(m.name).second) throw ConfigError("duplicate method name '" + m.name + "'");
    for (const auto& p : m.parties) {
      if (p.institution >= institutions || p.group >= groups) {
        throw ConfigError(m.name + ": party " + p.label() + " lies outside the " +
                          std::to_string(institutions) + "x" + std::to_string(groups) +
                          " partition");
      }
    }
    switch (m.kind) {
      case MethodKind::kCA:
        break;
      case MethodKind::kLA:
        if (m.parties.size() != 1) throw ConfigError(m.name + ": LA needs exactly one party");
        break;
      case MethodKind::kLMCA: {
        if (m.parties.empty()) throw ConfigError(m.name + ": empty scope");
        std::set<int> seen;
        for (const auto& p : m.parties) {
          if (!seen.insert(p.institution).second) {
            throw ConfigError(m.name + ": LMCA takes at most one party per institution");
          }
        }
        break;
      }
      case MethodKind::kDCQE:
        if (m.parties.empty()) throw ConfigError(m.name + ": empty scope");
        if (m.party_dim < 0 || m.collab_dim < 0) {
          throw ConfigError(m.name + ": dimensions must be non-negative");
        }
        break;
    }
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  const nlohmann::json& data = j.at("data");
  const std::string type = data.value("type", std::string("synthetic"));
  if (type == "synthetic") {
    c.data = synth::SynthConfig::from_json(data);
  } else if (type == "csv") {
    CsvSource src;
    src.path = resolve_data_path(data.at("path").get<std::string>(), base_dir);
    src.schema = SchemaConfig::from_json(data.at("schema"));
    if (data.contains("filter")) {
      src.row_filter = TreatmentRule::parse(data.at("filter").get<std::string>());
    }
    src.one_hot = data.value("one_hot", true);
    c.data = std::move(src);
  } else {
    throw ConfigError("data.type must be 'synthetic' or 'csv'");
  }
  if (j.contains("partition")) {
    c.institutions = j["partition"].value("institutions", c.institutions);
    c.groups = j["partition"].value("groups", c.groups);
  }
  c.standardize = j.value("standardize", c.standardize);
  c.anchor_rows = j.value("anchor_rows", c.anchor_rows);
  if (j.contains("match")) {
    c.analysis.match.caliper_multiplier =
        j["match"].value("caliper_multiplier", c.analysis.match.caliper_multiplier);
    if (j["match"].value("replacement", false)) {
      throw ConfigError("matching with replacement is not supported by the experiment runner");
    }
  }
  if (j.contains("logistic")) {
    const auto& l = j["logistic"];
    c.analysis.logistic.max_iterations = l.value("max_iterations", c.analysis.logistic.max_iterations);
    c.analysis.logistic.gradient_tolerance =
        l.value("gradient_tolerance", c.analysis.logistic.gradient_tolerance);
    c.analysis.logistic.hessian_ridge = l.value("hessian_ridge", c.analysis.logistic.hessian_ridge);
  }
  c.repetitions = j.value("repetitions", c.repetitions);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  for (const auto& mj : j.at("methods")) {
    MethodSpec m;
    m.kind = parse_method_kind(mj.at("kind").get<std::string>());
    if (mj.contains("scope")) {
      m.parties = resolve_scope(mj["scope"].get<std::string>(), c.institutions, c.groups);
    }
    if (mj.contains("parties")) {
      if (mj.contains("scope")) throw ConfigError("give either 'scope' or 'parties', not both");
      for (const auto& p : mj["parties"]) m.parties.push_back(party_from_json(p));
    }
    if (mj.contains("party")) m.parties = {party_from_json(mj["party"])};
    m.party_dim = mj.value("party_dim", 0);
    m.collab_dim = mj.value("collab_dim", 0);
    m.name = mj.value("name", std::string(method_kind_name(m.kind)));
    c.methods.push_back(std::move(m));
  }
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  if (const auto* s = std::get_if<synth::SynthConfig>(&data)) {
    j["data"] = s->to_json();
    j["data"]["type"] = "synthetic";
  } else {
    const auto& src = std::get<CsvSource>(data);
    j["data"] = {{"type", "csv"},
                 {"path", src.path.string()},
                 {"schema", src.schema.to_json()},
                 {"one_hot", src.one_hot}};
    if (src.row_filter) j["data"]["filter"] = src.row_filter->to_string();
  }
  j["partition"] = {{"institutions", institutions}, {"groups", groups}};
  j["standardize"] = standardize;
  j["anchor_rows"] = anchor_rows;
  j["match"] = {{"caliper_multiplier", analysis.match.caliper_multiplier}};
  j["logistic"] = {{"max_iterations", analysis.logistic.max_iterations},
                   {"gradient_tolerance", analysis.logistic.gradient_tolerance},
                   {"hessian_ridge", analysis.logistic.hessian_ridge}};
  j["repetitions"] = repetitions;
  j["seed"] = seed;
  j["workers"] = workers;
  nlohmann::json methods_json = nlohmann::json::array();
  for (const auto& m : methods) {
    nlohmann::json mj = {{"name", m.name}, {"kind", method_kind_name(m.kind)}};
    nlohmann::json parties = nlohmann::json::array();
    for (const auto& p : m.parties) parties.push_back(party_to_json(p));
    mj["parties"] = parties;
    mj["party_dim"] = m.party_dim;
    mj["collab_dim"] = m.collab_dim;
    methods_json.push_back(std::move(mj));
  }
  j["methods"] = methods_json;
  return j;
}

std::string ExperimentConfig::digest() const {
  nlohmann::json j = to_json();
  j.erase("workers");
  return io::sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Experiments

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

const ReportRow& ReportTable::row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw DataError("report has no row '" + method + "'");
}

namespace {

// Report order: configured order, CA appended last when not requested.
std::vector<MethodSpec> report_methods(const ExperimentConfig& config) {
  std::vector<MethodSpec> out = config.methods;
  const bool has_ca = std::any_of(out.begin(), out.end(),
                                  [](const MethodSpec& m) { return m.kind == MethodKind::kCA; });
  if (!has_ca) out.push_back(MethodSpec{"CA", MethodKind::kCA, {}, 0, 0});
  return out;
}

Outcomes institution_outcomes(const std::vector<PartyBlock>& blocks, int institution) {
  return *find_block(blocks, {institution, 0}).outcomes;
}

Dataset load_fixed(const ExperimentConfig& config) {
  const auto& src = std::get<CsvSource>(config.data);
  return load_source(src).dataset;
}

}  // namespace

std::vector<MethodResult> run_repetition(const ExperimentConfig& config, int repetition,
                                         const Dataset* fixed) {
  const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(repetition));
  std::optional<Dataset> owned;
  if (const auto* s = std::get_if<synth::SynthConfig>(&config.data)) {
    synth::SynthConfig cfg = *s;
    cfg.seed = derive_seed(rep_seed, Stream::kData);
    owned.emplace(synth::generate(cfg).dataset);
  } else if (!fixed) {
    owned.emplace(load_fixed(config));
  }
  const Dataset& dataset = owned ? *owned : *fixed;

  Rng partition_rng(derive_seed(rep_seed, Stream::kPartition));
  const PartitionScheme scheme = PartitionScheme::even(
      dataset.n(), dataset.m(), config.institutions, config.groups, partition_rng);
  const std::vector<PartyBlock> blocks = partition(dataset, scheme);
  const std::size_t rows = config.anchor_rows > 0 ? config.anchor_rows : dataset.n();
  const AnchorDataset anchor =
      generate_anchor(column_ranges(dataset.covariates()), rows,
                      derive_seed(rep_seed, Stream::kAnchor), dataset.covariate_names());

  AnalysisOptions options = config.analysis;
  options.match.seed = derive_seed(rep_seed, Stream::kMatching);

  std::vector<MethodResult> results;
  for (const MethodSpec& m : report_methods(config)) {
    switch (m.kind) {
      case MethodKind::kCA:
        results.push_back(run_ca(dataset, options));
        results.back().method = m.name;
        results.back().scores.source = m.name;
        break;
      case MethodKind::kLA: {
        const PartyBlock& b = find_block(blocks, m.parties.front());
        results.push_back(run_la(dataset, b.covariates,
                                 institution_outcomes(blocks, b.party.institution), options,
                                 m.name));
        break;
      }
      case MethodKind::kLMCA: {
        std::vector<LocalUser> users;
        for (const auto& p : m.parties) {
          const PartyBlock& b = find_block(blocks, p);
          users.push_back({b.covariates, institution_outcomes(blocks, p.institution)});
        }
        results.push_back(run_lmca(dataset, users, options, m.name));
        break;
      }
      case MethodKind::kDCQE: {
        DcqeOptions d;
        d.party_dim = m.party_dim;
        d.collab_dim = m.collab_dim;
        d.standardize = config.standardize;
        results.push_back(run_dcqe(dataset, blocks, m.parties, anchor, d, options, m.name));
        break;
      }
    }
  }
  return results;
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::string error;
  std::vector<RepetitionMetrics> metrics;
  std::vector<ArmCurves> curves;
};

RepOutcome evaluate_repetition(const ExperimentConfig& config, int b, const Dataset* fixed) {
  RepOutcome out;
  try {
    std::vector<MethodResult> results = run_repetition(config, b, fixed);
    const MethodResult* ca = nullptr;
    for (const auto& r : results) {
      if (r.kind == MethodKind::kCA) ca = &r;
    }
    for (const auto& r : results) {
      RepetitionMetrics m;
      m.sample_size = static_cast<double>(r.sample_size);
      m.masmd = r.balance.masmd;
      m.inconsistency = inconsistency(r.scores, ca->scores);
      m.gap_treated = gap(r.curves.treated, ca->curves.treated);
      m.gap_control = gap(r.curves.control, ca->curves.control);
      out.metrics.push_back(m);
      out.curves.push_back(r.curves);
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = "repetition " + std::to_string(b + 1) + ": " + e.what();
  }
  return out;
}

constexpr int kCurveGridPoints = 201;

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::optional<Dataset> fixed;
  if (std::holds_alternative<CsvSource>(config.data)) fixed.emplace(load_fixed(config));

  const int reps = config.repetitions;
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
  int workers = config.workers > 0 ? config.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, reps);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int b = next++; b < reps; b = next++) {
      outcomes[static_cast<std::size_t>(b)] =
          evaluate_repetition(config, b, fixed ? &*fixed : nullptr);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  const std::vector<MethodSpec> methods = report_methods(config);
  ExperimentReport report;
  report.table.repetitions = reps;
  report.table.config_digest = config.digest();
  report.per_rep.resize(methods.size());
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++report.table.failures;
      report.failure_messages.push_back(o.error);
      continue;
    }
    for (std::size_t m = 0; m < methods.size(); ++m) report.per_rep[m].push_back(o.metrics[m]);
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    ReportRow row;
    row.method = methods[m].name;
    auto column = [&](double RepetitionMetrics::*field) {
      std::vector<double> v;
      for (const auto& r : report.per_rep[m]) v.push_back(r.*field);
      return summarize(v);
    };
    row.sample_size = column(&RepetitionMetrics::sample_size);
    row.masmd = column(&RepetitionMetrics::masmd);
    row.inconsistency = column(&RepetitionMetrics::inconsistency);
    row.gap_treated = column(&RepetitionMetrics::gap_treated);
    row.gap_control = column(&RepetitionMetrics::gap_control);
    report.table.rows.push_back(row);

    MeanCurve mc;
    mc.method = methods[m].name;
    double t_max = 0.0;
    std::size_t ok_reps = 0;
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      ++ok_reps;
      for (const auto* c : {&o.curves[m].treated, &o.curves[m].control}) {
        if (!c->times.empty()) t_max = std::max(t_max, c->times.back());
      }
    }
    for (int g = 0; g < kCurveGridPoints; ++g) {
      mc.grid.push_back(t_max * g / (kCurveGridPoints - 1));
    }
    mc.treated.assign(mc.grid.size(), 0.0);
    mc.control.assign(mc.grid.size(), 0.0);
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      for (std::size_t g = 0; g < mc.grid.size(); ++g) {
        mc.treated[g] += eval_step(o.curves[m].treated, mc.grid[g]);
        mc.control[g] += eval_step(o.curves[m].control, mc.grid[g]);
      }
    }
    if (ok_reps > 0) {
      for (std::size_t g = 0; g < mc.grid.size(); ++g) {
        mc.treated[g] /= static_cast<double>(ok_reps);
        mc.control[g] /= static_cast<double>(ok_reps);
      }
    }
    report.mean_curves.push_back(std::move(mc));

    if (methods[m].kind == MethodKind::kLA) {
      if (!report.la_reporting.empty()) report.la_reporting += "; ";
      report.la_reporting += methods[m].name + " reports user " + methods[m].parties[0].label();
    }
  }
  return report;
}

std::string report_to_csv(const ReportTable& table) {
  std::string out =
      "method,sample_size_mean,sample_size_sd,masmd_mean,masmd_sd,inconsistency_mean,"
      "inconsistency_sd,gap_treated_mean,gap_treated_sd,gap_control_mean,gap_control_sd\n";
  for (const auto& r : table.rows) {
    out += r.method;
    for (const Summary* s : {&r.sample_size, &r.masmd, &r.inconsistency, &r.gap_treated,
                             &r.gap_control}) {
      out += "," + io::format_double(s->mean) + "," + io::format_double(s->sd);
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string cell(const Summary& s, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f (%.*f)", decimals, s.mean, decimals, s.sd);
  return buf;
}

}  // namespace

std::string report_to_text(const ReportTable& table) {
  const std::vector<std::string> header = {"Method", "Sample size", "MASMD", "Inconsistency",
                                           "Gap (treated)", "Gap (control)"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& r : table.rows) {
    cells.push_back({r.method, cell(r.sample_size, 2), cell(r.masmd, 4),
                     cell(r.inconsistency, 4), cell(r.gap_treated, 4),
                     cell(r.gap_control, 4)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const std::string& v = cells[i][c];
      if (c == 0) {
        out += v + std::string(width[c] - v.size(), ' ');
      } else {
        out += "  " + std::string(width[c] - v.size(), ' ') + v;
      }
    }
    out += "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  out += "B = " + std::to_string(table.repetitions) + ", failed repetitions = " +
         std::to_string(table.failures) + ", config " + table.config_digest.substr(0, 12) + "\n";
  return out;
}

void write_experiment_outputs(const ExperimentReport& report, const ExperimentConfig& config,
                              const std::filesystem::path& dir) {
  io::write_file(dir / "report.csv", report_to_csv(report.table));
  io::write_file(dir / "report.txt", report_to_text(report.table));

  nlohmann::json j;
  nlohmann::json cfg = config.to_json();
  cfg.erase("workers");
  j["config"] = cfg;
  j["config_digest"] = report.table.config_digest;
  j["repetitions"] = report.table.repetitions;
  j["failures"] = report.table.failures;
  j["failure_messages"] = report.failure_messages;
  j["la_reporting"] = report.la_reporting;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t m = 0; m < report.table.rows.size(); ++m) {
    const auto& r = report.table.rows[m];
    auto pack = [](const Summary& s) {
      return nlohmann::json{{"mean", io::format_double(s.mean)}, {"sd", io::format_double(s.sd)}};
    };
    rows.push_back({{"method", r.method},
                    {"sample_size", pack(r.sample_size)},
                    {"masmd", pack(r.masmd)},
                    {"inconsistency", pack(r.inconsistency)},
                    {"gap_treated", pack(r.gap_treated)},
                    {"gap_control", pack(r.gap_control)}});
  }
  j["rows"] = rows;
  io::write_file(dir / "report.json", j.dump(2) + "\n");

  for (const auto& mc : report.mean_curves) {
    std::string out = "time,treated,control\n";
    for (std::size_t g = 0; g < mc.grid.size(); ++g) {
      out += io::format_double(mc.grid[g]) + "," + io::format_double(mc.treated[g]) + "," +
             io::format_double(mc.control[g]) + "\n";
    }
    std::string file = mc.method;
    for (char& ch : file) {
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
    }
    io::write_file(dir / ("curves_" + file + ".csv"), out);
  }
}

}  // namespace dcsurv
