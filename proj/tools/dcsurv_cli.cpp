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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcsurv/anchor.hpp"
#include "dcsurv/error.hpp"
#include "dcsurv/exchange.hpp"
#include "dcsurv/io.hpp"
#include "dcsurv/log.hpp"
#include "dcsurv/pipeline.hpp"
#include "dcsurv/synth.hpp"

namespace fs = std::filesystem;
using namespace dcsurv;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  bool quiet = false;
};

nlohmann::json read_json(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file '" + path.string() + "' not found");
  try {
    return nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

fs::path require_out(const Globals& g, const std::string& what) {
  if (g.out.empty()) throw ConfigError("--out is required (" + what + ")");
  return g.out;
}

std::vector<PartyIndex> parse_parties(const nlohmann::json& j) {
  std::vector<PartyIndex> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || p[0].get<int>() < 1 || p[1].get<int>() < 1) {
      throw ConfigError("a party is written as [institution, group] (1-based)");
    }
    out.push_back({p[0].get<int>() - 1, p[1].get<int>() - 1});
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::optional<long long> n;
  bool ids = false;
};

void cmd_synth(const SynthArgs& a, const Globals& g) {
  synth::SynthConfig cfg;
  if (!a.config.empty()) cfg = synth::SynthConfig::from_json(read_json(a.config));
  if (a.n) {
    if (*a.n < 1) throw ConfigError("synthetic sample count n must be at least 1");
    cfg.n = static_cast<std::size_t>(*a.n);
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  const fs::path out = require_out(g, "dataset CSV path");
  const auto sample = synth::generate(cfg);
  write_dataset_csv(out, sample.dataset, a.ids);
  nlohmann::json meta;
  meta["generator"] = cfg.to_json();
  meta["rows"] = sample.dataset.n();
  meta["columns"] = sample.dataset.covariate_names();
  meta["sha256"] = io::sha256_file(out);
  fs::path sidecar = out;
  sidecar += ".meta.json";
  io::write_file(sidecar, meta.dump(2) + "\n");
}

struct AnchorArgs {
  std::string data;
  std::string ranges;
  std::size_t rows = 0;
};

void cmd_anchor(const AnchorArgs& a, const Globals& g) {
  const fs::path dir = require_out(g, "exchange directory");
  std::vector<ColumnRange> ranges;
  std::vector<std::string> names;
  std::size_t rows = a.rows;
  if (!a.data.empty() == !a.ranges.empty()) {
    throw ConfigError("give exactly one of --data (benchmark ranges) or --ranges (protocol)");
  }
  if (!a.data.empty()) {
    const auto m = io::read_matrix_csv(a.data);
    names = m.columns;
    ranges = column_ranges(m.values);
    if (rows == 0) rows = static_cast<std::size_t>(m.values.rows());
  } else {
    const auto j = read_json(a.ranges);
    names = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("ranges")) ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    if (rows == 0) rows = j.value("rows", std::size_t{0});
  }
  if (rows == 0) throw ConfigError("anchor row count must be positive (--rows)");
  if (names.size() != ranges.size()) throw ConfigError("ranges and columns differ in length");
  const auto anchor = generate_anchor(ranges, rows, g.seed.value_or(0), names);
  exchange::publish_anchor(dir, anchor);
}

struct SplitArgs {
  std::string data;
  std::string schema;
  int institutions = 1;
  int groups = 1;
};

void cmd_split(const SplitArgs& a, const Globals& g) {
  SchemaConfig schema;
  schema.treatment_column = "treat";
  if (!a.schema.empty()) schema = SchemaConfig::from_json(read_json(a.schema));
  const Dataset d = load_csv(a.data, schema).dataset;
  Rng rng(derive_seed(g.seed.value_or(0), Stream::kPartition));
  const auto scheme = PartitionScheme::even(d.n(), d.m(), a.institutions, a.groups, rng);
  exchange::write_party_raw_files(partition(d, scheme), require_out(g, "party directory"));
}

struct EncodeArgs {
  std::string party;
  std::string data;
  std::optional<int> dim;
  bool benchmark = false;
};

void cmd_user_encode(const EncodeArgs& a, const Globals& g) {
  exchange::PartyConfig cfg = exchange::PartyConfig::from_json(read_json(a.party));
  if (a.dim) cfg.reduce.target_dim = *a.dim;
  if (a.benchmark) cfg.reduce.enforce_privacy = false;
  const fs::path dir = require_out(g, "exchange directory");
  if (!fs::exists(dir / kAnchorFile)) {
    throw DataError("no anchor in '" + dir.string() +
                    "'; generate one first with the 'anchor' command");
  }
  const PartyBlock block = exchange::load_party_block(a.data, cfg);
  exchange::user_encode(dir, block, cfg.reduce);
}

struct AnalystArgs {
  std::string exchange;
  std::string config;
  bool collab = false;
  bool svg = true;
  bool benchmark = false;
};

void cmd_analyst(const AnalystArgs& a, const Globals& g) {
  const fs::path dir = a.exchange;
  const fs::path out = require_out(g, "output directory");
  nlohmann::json cfg = a.config.empty() ? nlohmann::json::object() : read_json(a.config);

  std::vector<PartyIndex> parties;
  if (cfg.contains("parties")) {
    parties = parse_parties(cfg["parties"]);
  } else if (cfg.contains("institutions") || cfg.contains("scope")) {
    parties = resolve_scope(cfg.value("scope", std::string("whole")),
                            cfg.value("institutions", 1), cfg.value("groups", 1));
  } else {
    for (const auto& e : exchange::Manifest::load(dir).entries) {
      if (e.role == "data" && e.party) parties.push_back(*e.party);
    }
    if (parties.empty()) throw DataError("exchange '" + dir.string() + "' holds no party data");
  }

  const auto report = exchange::audit(dir, !a.benchmark);
  if (!report.ok()) {
    std::string msg = "exchange audit failed:";
    bool privacy = false;
    for (const auto& v : report.violations) {
      msg += "\n  " + v;
      privacy = privacy || v.rfind("privacy", 0) == 0;
    }
    if (privacy) throw PrivacyError(msg);
    throw IntegrityError(msg);
  }

  AnalysisOptions options;
  options.match.caliper_multiplier =
      cfg.value("caliper_multiplier", options.match.caliper_multiplier);
  options.match.seed = g.seed.value_or(0);
  const auto shares = exchange::read_shares(dir, parties);
  const auto result = analyze_shares(shares, cfg.value("collab_dim", 0), options, "DCQE");

  io::write_file(out / "curves.csv", curves_to_csv(result.curves));
  if (a.svg) {
    io::write_file(out / "curves.svg",
                   curves_to_svg({{"DC-QE", result.curves}}, "Kaplan-Meier, matched sample"));
  }
  {
    std::string s = "id,score\n";
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
      s += std::to_string(result.scores.ids[i]) + "," +
           io::format_double(result.scores.scores[i]) + "\n";
    }
    io::write_file(out / "scores.csv", s);
  }
  {
    std::string s = "treated,control,logit_gap\n";
    for (const auto& p : result.matched.pairs) {
      s += std::to_string(p.treated) + "," + std::to_string(p.control) + "," +
           io::format_double(p.logit_gap) + "\n";
    }
    io::write_file(out / "pairs.csv", s);
  }
  if (a.collab) {
    std::vector<std::string> cols;
    for (Eigen::Index j = 0; j < result.representation.x_check.cols(); ++j) {
      cols.push_back("c" + std::to_string(j + 1));
    }
    io::write_file(out / "collab.csv", io::matrix_to_csv(cols, result.representation.x_check,
                                                         &result.representation.ids));
  }
  nlohmann::json m;
  nlohmann::json pj = nlohmann::json::array();
  for (const auto& p : parties) pj.push_back({p.institution + 1, p.group + 1});
  m["parties"] = pj;
  m["samples"] = result.representation.ids.size();
  m["collab_dim"] = result.representation.x_check.cols();
  m["numerical_rank"] = result.fit.numerical_rank;
  m["anchor_alignment"] = io::format_double(result.anchor_alignment);
  m["logistic"] = {{"converged", result.model.converged},
                   {"iterations", result.model.iterations},
                   {"intercept", io::format_double(result.model.intercept)}};
  m["caliper_width"] = io::format_double(result.matched.caliper_width);
  m["pairs"] = result.matched.pairs.size();
  m["matched_sample_size"] = matched_sample_size(result.matched);
  m["treated_subjects"] = result.curves.treated.subjects;
  m["control_subjects"] = result.curves.control.subjects;
  io::write_file(out / "metrics.json", m.dump(2) + "\n");
}

struct ExperimentArgs {
  std::string config;
  std::optional<int> repetitions;
};

int cmd_experiment(const ExperimentArgs& a, const Globals& g) {
  const fs::path path = a.config;
  ExperimentConfig cfg = ExperimentConfig::from_json(read_json(path), path.parent_path());
  if (g.seed) cfg.seed = *g.seed;
  if (g.workers) cfg.workers = *g.workers;
  if (a.repetitions) cfg.repetitions = *a.repetitions;
  cfg.validate();
  const fs::path out = require_out(g, "output directory");
  const ExperimentReport report = run_experiment(cfg);
  write_experiment_outputs(report, cfg, out);
  std::cout << report_to_text(report.table);
  if (!report.la_reporting.empty()) std::cout << report.la_reporting << "\n";
  for (const auto& msg : report.failure_messages) std::cerr << msg << "\n";
  return report.table.failures == 0 ? 0 : static_cast<int>(ErrorKind::kData);
}

struct PreprocessArgs {
  std::string input;
  std::vector<std::string> passthrough;
  bool no_impute = false;
};

void cmd_preprocess(const PreprocessArgs& a, const Globals& g) {
  PreprocessOptions opts;
  opts.impute_mean = !a.no_impute;
  opts.passthrough = a.passthrough;
  const auto table = preprocess(io::read_csv(a.input), opts);
  io::write_file(require_out(g, "output CSV path"), io::to_csv(table));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative propensity-matched survival analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--workers", g.workers, "Worker threads for experiments (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output file or directory");
  app.add_flag("-q,--quiet", g.quiet, "Suppress warnings");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", synth_args.config, "Generator config (JSON)");
  synth_cmd->add_option("--n", synth_args.n, "Sample count");
  synth_cmd->add_flag("--ids", synth_args.ids, "Write a leading id column");

  AnchorArgs anchor_args;
  auto* anchor_cmd = app.add_subcommand("anchor", "Generate and publish the anchor dataset");
  anchor_cmd->add_option("--data", anchor_args.data, "Take column ranges from this CSV");
  anchor_cmd->add_option("--ranges", anchor_args.ranges, "Column ranges (JSON)");
  anchor_cmd->add_option("--rows", anchor_args.rows, "Anchor rows");

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Partition a dataset into party raw files");
  split_cmd->add_option("--data", split_args.data, "Dataset CSV")->required();
  split_cmd->add_option("--schema", split_args.schema, "Column schema (JSON)");
  split_cmd->add_option("--institutions", split_args.institutions)->check(CLI::PositiveNumber);
  split_cmd->add_option("--groups", split_args.groups)->check(CLI::PositiveNumber);

  EncodeArgs encode_args;
  auto* encode_cmd = app.add_subcommand("user-encode", "Share one party's representations");
  encode_cmd->add_option("--party", encode_args.party, "Party config (JSON)")->required();
  encode_cmd->add_option("--data", encode_args.data, "Party raw CSV")->required();
  encode_cmd->add_option("--dim", encode_args.dim, "Reduced dimension");
  encode_cmd->add_flag("--benchmark", encode_args.benchmark,
                       "Allow reduced dimension equal to the covariate count");

  AnalystArgs analyst_args;
  auto* analyst_cmd = app.add_subcommand("analyst", "Run the analyst side on an exchange");
  analyst_cmd->add_option("--exchange", analyst_args.exchange, "Exchange directory")->required();
  analyst_cmd->add_option("--config", analyst_args.config, "Analysis config (JSON)");
  analyst_cmd->add_flag("--collab", analyst_args.collab, "Also write collab.csv");
  analyst_cmd->add_flag("!--no-svg", analyst_args.svg, "Skip curves.svg");
  analyst_cmd->add_flag("--benchmark", analyst_args.benchmark,
                        "Audit without the strict dimension rule");

  ExperimentArgs experiment_args;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run a repeated experiment");
  experiment_cmd->add_option("--config", experiment_args.config, "Experiment config (JSON)")
      ->required();
  experiment_cmd->add_option("--repetitions", experiment_args.repetitions)
      ->check(CLI::PositiveNumber);

  PreprocessArgs pre_args;
  auto* pre_cmd = app.add_subcommand("preprocess", "Impute and one-hot encode a CSV");
  pre_cmd->add_option("--in", pre_args.input, "Input CSV")->required();
  pre_cmd->add_option("--passthrough", pre_args.passthrough, "Columns left as text");
  pre_cmd->add_flag("--no-impute", pre_args.no_impute, "Keep missing cells");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }
  set_quiet(g.quiet);

  try {
    if (*synth_cmd) cmd_synth(synth_args, g);
    if (*anchor_cmd) cmd_anchor(anchor_args, g);
    if (*split_cmd) cmd_split(split_args, g);
    if (*encode_cmd) cmd_user_encode(encode_args, g);
    if (*analyst_cmd) cmd_analyst(analyst_args, g);
    if (*experiment_cmd) return cmd_experiment(experiment_args, g);
    if (*pre_cmd) cmd_preprocess(pre_args, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad configuration: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kConfig);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
  return 0;
}
