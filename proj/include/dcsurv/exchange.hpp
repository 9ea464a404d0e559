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
#include <vector>

#include <nlohmann/json.hpp>

#include "dcsurv/anchor.hpp"
#include "dcsurv/core_model.hpp"
#include "dcsurv/reduce.hpp"

// File-based realization of the two-role protocol. Users write their shares
// into an exchange directory; the analyst reads them back. manifest.json
// records a SHA-256 digest and the declared dimensions of every file.
namespace dcsurv::exchange {

inline constexpr const char* kManifestFile = "manifest.json";

struct ManifestEntry {
  std::string file;
  std::string role;  // anchor, anchor-meta, data, anchor-rep, outcomes
  std::string sha256;
  std::optional<PartyIndex> party;
  int source_dim = 0;   // m_l (data / anchor-rep)
  int reduced_dim = 0;  // m~_kl (data / anchor-rep)
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& file) const;
  void upsert(ManifestEntry entry);
  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  static Manifest load(const std::filesystem::path& dir);  // empty if absent
  void save(const std::filesystem::path& dir) const;
};

std::string data_file(PartyIndex party);
std::string anchor_rep_file(PartyIndex party);
std::string outcomes_file(int institution);

// Writes the anchor files and registers them in the manifest.
void publish_anchor(const std::filesystem::path& dir, const AnchorDataset& anchor);

// What a user needs to know about its own raw file.
struct PartyConfig {
  PartyIndex party;
  std::vector<std::string> columns;  // covariate columns held by this party
  std::string id_column = "id";
  bool outcome_holder = false;
  std::string time_column = "time";
  std::string event_column = "event";
  std::string treatment_column = "treat";
  ReduceOptions reduce{.target_dim = 0, .standardize = true, .enforce_privacy = true};

  static PartyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

PartyBlock load_party_block(const std::filesystem::path& csv, const PartyConfig& config);

// Per-party raw files for a simulated deployment: party_k_l.raw.csv with an
// id column, the party's covariates and, for l = 1, time/event/treat. These
// stay on the user side and never go into the exchange directory.
void write_party_raw_files(const std::vector<PartyBlock>& blocks,
                           const std::filesystem::path& dir);
std::string raw_file(PartyIndex party);

// User side: encode and publish. Refuses (PrivacyError) when the reduced
// dimension is not strictly below the party's covariate count and privacy
// is enforced; fails (DataError) when the anchor is missing.
PartyShare user_encode(const std::filesystem::path& dir, const PartyBlock& block,
                       const ReduceOptions& options);
void write_share(const std::filesystem::path& dir, const PartyShare& share);

struct AuditResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Digest check plus privacy audit: only known file names, each
// representation file has exactly its declared m~_kl columns (plus id), and
// m~_kl < m_l when protocol_mode is set.
AuditResult audit(const std::filesystem::path& dir, bool protocol_mode = true);

// Analyst side: reads every expected share after verifying completeness and
// digests (IntegrityError listing missing parties or mismatching files).
std::vector<PartyShare> read_shares(const std::filesystem::path& dir,
                                    const std::vector<PartyIndex>& expected);

}  // namespace dcsurv::exchange
