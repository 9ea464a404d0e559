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

#include "dcsurv/exchange.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dcsurv/error.hpp"
#include "dcsurv/io.hpp"

namespace dcsurv::exchange {
namespace {

std::string party_stem(PartyIndex p) {
  return "party_" + std::to_string(p.institution + 1) + "_" + std::to_string(p.group + 1);
}

PartyIndex parse_party(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("a party is written as [institution, group] (1-based)");
  }
  const int k = j[0].get<int>();
  const int l = j[1].get<int>();
  if (k < 1 || l < 1) throw ConfigError("party indices are 1-based");
  return {k - 1, l - 1};
}

std::vector<std::string> rep_columns(int dims) {
  std::vector<std::string> cols;
  for (int i = 0; i < dims; ++i) cols.push_back("z" + std::to_string(i + 1));
  return cols;
}

void register_file(Manifest& manifest, const std::filesystem::path& dir, const std::string& file,
                   const std::string& role, std::optional<PartyIndex> party = std::nullopt,
                   int source_dim = 0, int reduced_dim = 0) {
  manifest.upsert({file, role, io::sha256_file(dir / file), party, source_dim, reduced_dim});
}

}  // namespace

const ManifestEntry* Manifest::find(const std::string& file) const {
  for (const auto& e : entries) {
    if (e.file == file) return &e;
  }
  return nullptr;
}

void Manifest::upsert(ManifestEntry entry) {
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const ManifestEntry& e) { return e.file == entry.file; });
  if (it != entries.end()) {
    *it = std::move(entry);
  } else {
    entries.push_back(std::move(entry));
  }
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.file < b.file; });
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j = {{"file", e.file}, {"role", e.role}, {"sha256", e.sha256}};
    if (e.party) {
      j["party"] = {e.party->institution + 1, e.party->group + 1};
    }
    if (e.role == "data" || e.role == "anchor-rep") {
      j["source_dim"] = e.source_dim;
      j["reduced_dim"] = e.reduced_dim;
    }
    files.push_back(std::move(j));
  }
  return {{"files", files}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    for (const auto& f : j.at("files")) {
      ManifestEntry e;
      e.file = f.at("file").get<std::string>();
      e.role = f.at("role").get<std::string>();
      e.sha256 = f.at("sha256").get<std::string>();
      if (f.contains("party")) e.party = parse_party(f["party"]);
      e.source_dim = f.value("source_dim", 0);
      e.reduced_dim = f.value("reduced_dim", 0);
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest Manifest::load(const std::filesystem::path& dir) {
  const auto path = dir / kManifestFile;
  if (!std::filesystem::exists(path)) return {};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

void Manifest::save(const std::filesystem::path& dir) const {
  io::write_file(dir / kManifestFile, to_json().dump(2) + "\n");
}

std::string data_file(PartyIndex party) { return party_stem(party) + ".data.csv"; }
std::string anchor_rep_file(PartyIndex party) { return party_stem(party) + ".anchor.csv"; }
std::string outcomes_file(int institution) {
  return "party_" + std::to_string(institution + 1) + ".outcomes.csv";
}
std::string raw_file(PartyIndex party) { return party_stem(party) + ".raw.csv"; }

void publish_anchor(const std::filesystem::path& dir, const AnchorDataset& anchor) {
  save_anchor(anchor, dir);
  Manifest m = Manifest::load(dir);
  register_file(m, dir, kAnchorFile, "anchor");
  register_file(m, dir, kAnchorMetaFile, "anchor-meta");
  m.save(dir);
}

PartyConfig PartyConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("party config must be a JSON object");
  PartyConfig c;
  c.party = parse_party(j.at("party"));
  c.columns = j.at("columns").get<std::vector<std::string>>();
  if (c.columns.empty()) throw ConfigError("party config lists no covariate columns");
  c.id_column = j.value("id_column", c.id_column);
  c.outcome_holder = j.value("outcome_holder", c.outcome_holder);
  c.time_column = j.value("time", c.time_column);
  c.event_column = j.value("event", c.event_column);
  c.treatment_column = j.value("treatment", c.treatment_column);
  c.reduce.target_dim = j.value("reduced_dim", c.reduce.target_dim);
  c.reduce.standardize = j.value("standardize", c.reduce.standardize);
  c.reduce.enforce_privacy = j.value("protocol", c.reduce.enforce_privacy);
  if (c.reduce.target_dim < 0) throw ConfigError("reduced_dim must be non-negative");
  return c;
}

nlohmann::json PartyConfig::to_json() const {
  return {{"party", {party.institution + 1, party.group + 1}},
          {"columns", columns},
          {"id_column", id_column},
          {"outcome_holder", outcome_holder},
          {"time", time_column},
          {"event", event_column},
          {"treatment", treatment_column},
          {"reduced_dim", reduce.target_dim},
          {"standardize", reduce.standardize},
          {"protocol", reduce.enforce_privacy}};
}

PartyBlock load_party_block(const std::filesystem::path& csv, const PartyConfig& config) {
  const io::CsvTable table = io::read_csv(csv);
  const std::size_t id_col = table.require_column(config.id_column);
  std::vector<std::size_t> cols;
  for (const auto& name : config.columns) cols.push_back(table.require_column(name));

  PartyBlock block;
  block.party = config.party;
  block.column_names = config.columns;
  for (std::size_t j = 0; j < cols.size(); ++j) block.columns.push_back(j);
  block.covariates.resize(static_cast<Eigen::Index>(table.rows.size()),
                          static_cast<Eigen::Index>(cols.size()));
  auto number = [&](std::size_t r, std::size_t c) {
    const auto v = io::parse_double(table.rows[r][c]);
    if (!v) {
      throw DataError("row " + std::to_string(r + 1) + ", column '" + table.header[c] +
                      "': not a number ('" + table.rows[r][c] + "')");
    }
    return *v;
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto id = io::parse_integer(table.rows[r][id_col]);
    if (!id) throw DataError("row " + std::to_string(r + 1) + ": bad id");
    block.ids.push_back(*id);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      block.covariates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          number(r, cols[j]);
    }
  }
  if (config.outcome_holder) {
    const std::size_t t = table.require_column(config.time_column);
    const std::size_t e = table.require_column(config.event_column);
    const std::size_t z = table.require_column(config.treatment_column);
    Outcomes o;
    o.ids = block.ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      o.time.push_back(number(r, t));
      o.event.push_back(static_cast<int>(number(r, e)));
      o.treatment.push_back(static_cast<int>(number(r, z)));
    }
    o.validate();
    block.outcomes = std::move(o);
  }
  return block;
}

void write_party_raw_files(const std::vector<PartyBlock>& blocks,
                           const std::filesystem::path& dir) {
  for (const auto& b : blocks) {
    std::string out = "id";
    for (const auto& name : b.column_names) out += "," + name;
    if (b.outcomes) out += ",time,event,treat";
    out += "\n";
    for (Eigen::Index r = 0; r < b.covariates.rows(); ++r) {
      out += std::to_string(b.ids[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < b.covariates.cols(); ++c) {
        out += "," + io::format_double(b.covariates(r, c));
      }
      if (b.outcomes) {
        const auto i = static_cast<std::size_t>(r);
        out += "," + io::format_double(b.outcomes->time[i]) + "," +
               std::to_string(b.outcomes->event[i]) + "," +
               std::to_string(b.outcomes->treatment[i]);
      }
      out += "\n";
    }
    io::write_file(dir / raw_file(b.party), out);

    PartyConfig cfg;
    cfg.party = b.party;
    cfg.columns = b.column_names;
    cfg.outcome_holder = b.outcomes.has_value();
    io::write_file(dir / (party_stem(b.party) + ".json"), cfg.to_json().dump(2) + "\n");
  }
}

void write_share(const std::filesystem::path& dir, const PartyShare& share) {
  const auto cols = rep_columns(share.reduced_dim());
  const std::string data = data_file(share.party);
  const std::string anchor = anchor_rep_file(share.party);
  io::write_file(dir / data, io::matrix_to_csv(cols, share.data.matrix, &share.data.ids));
  io::write_file(dir / anchor, io::matrix_to_csv(cols, share.anchor.matrix));

  Manifest m = Manifest::load(dir);
  register_file(m, dir, data, "data", share.party, share.source_dim, share.reduced_dim());
  register_file(m, dir, anchor, "anchor-rep", share.party, share.source_dim,
                share.reduced_dim());
  if (share.outcomes) {
    const std::string file = outcomes_file(share.party.institution);
    std::string out = "id,time,event,treat\n";
    const Outcomes& o = *share.outcomes;
    for (std::size_t i = 0; i < o.size(); ++i) {
      out += std::to_string(o.ids[i]) + "," + io::format_double(o.time[i]) + "," +
             std::to_string(o.event[i]) + "," + std::to_string(o.treatment[i]) + "\n";
    }
    io::write_file(dir / file, out);
    register_file(m, dir, file, "outcomes", PartyIndex{share.party.institution, share.party.group});
  }
  m.save(dir);
}

PartyShare user_encode(const std::filesystem::path& dir, const PartyBlock& block,
                       const ReduceOptions& options) {
  const AnchorDataset anchor = load_anchor(dir);
  const Manifest m = Manifest::load(dir);
  for (const char* file : {kAnchorFile, kAnchorMetaFile}) {
    const ManifestEntry* e = m.find(file);
    if (e && e->sha256 != io::sha256_file(dir / file)) {
      throw IntegrityError(std::string(file) + " does not match its manifest digest");
    }
  }
  PartyShare share = encode_party(block, slice_anchor(anchor, block.column_names), options);
  write_share(dir, share);
  return share;
}

AuditResult audit(const std::filesystem::path& dir, bool protocol_mode) {
  AuditResult r;
  if (!std::filesystem::is_directory(dir)) {
    r.violations.push_back("exchange directory '" + dir.string() + "' does not exist");
    return r;
  }
  const Manifest m = Manifest::load(dir);
  std::set<std::string> listed;
  for (const auto& e : m.entries) {
    listed.insert(e.file);
    const auto path = dir / e.file;
    if (!std::filesystem::exists(path)) {
      r.violations.push_back("integrity: " + e.file + " is listed but missing");
      continue;
    }
    if (io::sha256_file(path) != e.sha256) {
      r.violations.push_back("integrity: " + e.file + " does not match its manifest digest");
      continue;
    }
    if (e.role != "data" && e.role != "anchor-rep") continue;
    const auto mat = io::read_matrix_csv(path);
    const std::string who = e.party ? e.party->label() : "?";
    if (mat.values.cols() != e.reduced_dim) {
      r.violations.push_back("privacy: " + e.file + " has " +
                             std::to_string(mat.values.cols()) +
                             " columns but party " + who + " declared " +
                             std::to_string(e.reduced_dim));
    }
    if (protocol_mode && mat.values.cols() >= e.source_dim) {
      r.violations.push_back("privacy: " + e.file + " carries " +
                             std::to_string(mat.values.cols()) + " columns for party " + who +
                             ", which holds only " + std::to_string(e.source_dim) +
                             " covariates");
    }
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == kManifestFile || listed.contains(name)) continue;
    r.violations.push_back("privacy: unlisted file '" + name + "' in the exchange directory");
  }
  return r;
}

std::vector<PartyShare> read_shares(const std::filesystem::path& dir,
                                    const std::vector<PartyIndex>& expected) {
  const Manifest m = Manifest::load(dir);
  std::vector<std::string> missing;
  for (const auto& p : expected) {
    if (!m.find(data_file(p)) || !m.find(anchor_rep_file(p))) missing.push_back(p.label());
  }
  std::set<int> institutions;
  for (const auto& p : expected) institutions.insert(p.institution);
  for (int k : institutions) {
    if (!m.find(outcomes_file(k))) missing.push_back("outcomes of institution " + std::to_string(k + 1));
  }
  if (!missing.empty()) {
    std::string msg = "exchange is incomplete; missing:";
    for (const auto& s : missing) msg += " " + s;
    throw DataError(msg);
  }

  std::vector<PartyShare> shares;
  std::set<int> attached;
  std::vector<PartyIndex> ordered = expected;
  std::sort(ordered.begin(), ordered.end());
  for (const auto& p : ordered) {
    for (const std::string& file : {data_file(p), anchor_rep_file(p)}) {
      if (io::sha256_file(dir / file) != m.find(file)->sha256) {
        throw IntegrityError(file + " does not match its manifest digest");
      }
    }
    const ManifestEntry& e = *m.find(data_file(p));
    PartyShare s;
    s.party = p;
    s.source_dim = e.source_dim;
    auto data = io::read_matrix_csv(dir / data_file(p));
    if (data.ids.size() != static_cast<std::size_t>(data.values.rows())) {
      throw DataError(data_file(p) + " has no id column");
    }
    s.data = {p, RepKind::kData, std::move(data.values), std::move(data.ids)};
    s.anchor = {p, RepKind::kAnchor, io::read_matrix_csv(dir / anchor_rep_file(p)).values, {}};
    if (!attached.contains(p.institution)) {
      const std::string file = outcomes_file(p.institution);
      if (io::sha256_file(dir / file) != m.find(file)->sha256) {
        throw IntegrityError(file + " does not match its manifest digest");
      }
      const auto table = io::read_csv(dir / file);
      Outcomes o;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto id = io::parse_integer(row.at(0));
        const auto t = io::parse_double(row.at(1));
        const auto ev = io::parse_integer(row.at(2));
        const auto z = io::parse_integer(row.at(3));
        if (!id || !t || !ev || !z) {
          throw DataError(file + ": malformed row " + std::to_string(r + 1));
        }
        o.ids.push_back(*id);
        o.time.push_back(*t);
        o.event.push_back(static_cast<int>(*ev));
        o.treatment.push_back(static_cast<int>(*z));
      }
      o.validate();
      s.outcomes = std::move(o);
      attached.insert(p.institution);
    }
    shares.push_back(std::move(s));
  }
  return shares;
}

}  // namespace dcsurv::exchange
