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

#include <map>
#include <vector>

#include "dcsurv/reduce.hpp"
#include "dcsurv/types.hpp"

namespace dcsurv {

struct TruncatedSvd {
  Matrix u;       // rows x rank, orthonormal columns
  Vector s;       // rank, nonincreasing
  Matrix v;       // cols x rank, orthonormal columns
  Vector all_singular_values;

  Matrix reconstruct() const { return u * s.asDiagonal() * v.transpose(); }
};

TruncatedSvd truncated_svd(const Matrix& a, int rank);

// Singular values below rel_tol * sigma_max are treated as zero. A negative
// rel_tol selects 1e-12 * max(rows, cols).
Matrix pseudoinverse(const Matrix& a, double rel_tol = -1.0);

struct CollabTransform {
  int institution = 0;
  Matrix g;  // m~_k x m~
  int target_dim() const { return static_cast<int>(g.cols()); }
};

struct CollabFit {
  std::vector<CollabTransform> transforms;
  Matrix u1;                 // r x m~ target of every projected anchor
  Vector singular_values;    // of the concatenated anchor representations
  int numerical_rank = 0;
};

// anchor_reps[k] is institution k's r x m~_k anchor representation.
CollabFit build_collab_transforms(const std::vector<Matrix>& anchor_reps,
                                  int target_dim);

// max over institution pairs of ||A_k G_k - A_k' G_k'||_F / ||U_1||_F.
double anchor_alignment_error(const std::vector<Matrix>& anchor_reps,
                              const CollabFit& fit);

struct InstitutionRep {
  int institution = 0;
  std::vector<SampleId> ids;
  Matrix matrix;  // n_k x m~_k
};

struct CollabRepresentation {
  std::vector<SampleId> ids;
  Matrix x_check;  // n x m~
  std::map<SampleId, int> institution_of;
};

CollabRepresentation build_collab_representation(
    const std::vector<InstitutionRep>& data_reps,
    const std::vector<CollabTransform>& transforms);

// Horizontal concatenation of one institution's party representations
// (ordered by column group). Row ids must agree across parties.
InstitutionRep concat_institution(const std::vector<const IntermediateRep*>& parts);

}  // namespace dcsurv
