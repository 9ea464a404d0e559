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

#include <optional>
#include <vector>

#include "dcsurv/anchor.hpp"
#include "dcsurv/core_model.hpp"
#include "dcsurv/types.hpp"

namespace dcsurv {

// Per-party PCA. A ReducerModel is private to the party that fitted it:
// there is deliberately no way to serialize one.
class ReducerModel {
 public:
  const Vector& col_means() const { return means_; }
  const Vector& col_scales() const { return scales_; }
  const Matrix& components() const { return components_; }  // m_l x target
  const Vector& singular_values() const { return singular_values_; }
  int target_dim() const { return static_cast<int>(components_.cols()); }
  int source_dim() const { return static_cast<int>(components_.rows()); }
  // Share of total (centered, scaled) variance captured by the kept components.
  double explained_variance_fraction() const;

 private:
  friend ReducerModel fit_reducer(const Matrix&, int, bool);
  Vector means_;
  Vector scales_;
  Matrix components_;
  Vector singular_values_;  // all of them, descending
};

// Top target_dim right singular vectors of the centered (optionally
// standardized) block, each sign-flipped so its largest-magnitude entry is
// positive. Zero-variance columns get scale 1 and a warning.
ReducerModel fit_reducer(const Matrix& block, int target_dim, bool standardize);
ReducerModel fit_reducer(const PartyBlock& block, int target_dim, bool standardize);

// ((rows - means) / scales) * components
Matrix apply_reducer(const ReducerModel& model, const Matrix& rows);

enum class RepKind { kData, kAnchor };

struct IntermediateRep {
  PartyIndex party;
  RepKind kind = RepKind::kData;
  Matrix matrix;
  std::vector<SampleId> ids;  // data kind only
};

struct ReduceOptions {
  int target_dim = 0;  // 0: ceil(m_l / 2)
  bool standardize = true;
  // Protocol mode: require target_dim < m_l.
  bool enforce_privacy = false;
};

int default_target_dim(int source_dim);

// Everything party (k, l) sends to the analyst.
struct PartyShare {
  PartyIndex party;
  int source_dim = 0;  // m_l, declared for the privacy audit
  IntermediateRep data;
  IntermediateRep anchor;
  std::optional<Outcomes> outcomes;

  int reduced_dim() const { return static_cast<int>(data.matrix.cols()); }
};

// User side: fit f_{k,l} on the local block, apply it to the block and to
// the party's anchor slice. The reducer goes out of scope here.
PartyShare encode_party(const PartyBlock& block, const Matrix& anchor_slice,
                        const ReduceOptions& options);

}  // namespace dcsurv
