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

#include "dcsurv/collab.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"

namespace dcsurv {
namespace {

double default_cutoff(const Matrix& a) {
  return 1e-12 * static_cast<double>(std::max(a.rows(), a.cols()));
}

}  // namespace

TruncatedSvd truncated_svd(const Matrix& a, int rank) {
  const Eigen::Index limit = std::min(a.rows(), a.cols());
  if (rank < 1 || rank > limit) {
    throw DataError("truncation rank " + std::to_string(rank) + " must lie in [1, " +
                    std::to_string(limit) + "]");
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(rank);
  out.s = svd.singularValues().head(rank);
  out.v = svd.matrixV().leftCols(rank);
  out.all_singular_values = svd.singularValues();
  return out;
}

Matrix pseudoinverse(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  if (rel_tol < 0.0) rel_tol = default_cutoff(a);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

CollabFit build_collab_transforms(const std::vector<Matrix>& anchor_reps, int target_dim) {
  if (anchor_reps.empty()) throw DataError("no anchor representations supplied");
  const Eigen::Index r = anchor_reps.front().rows();
  Eigen::Index total_cols = 0;
  Eigen::Index min_cols = anchor_reps.front().cols();
  for (std::size_t k = 0; k < anchor_reps.size(); ++k) {
    if (anchor_reps[k].rows() != r) {
      throw DataError("anchor representation of institution " + std::to_string(k + 1) +
                      " has " + std::to_string(anchor_reps[k].rows()) + " rows, expected " +
                      std::to_string(r));
    }
    if (anchor_reps[k].cols() < 1) {
      throw DataError("anchor representation of institution " + std::to_string(k + 1) +
                      " has no columns");
    }
    total_cols += anchor_reps[k].cols();
    min_cols = std::min(min_cols, anchor_reps[k].cols());
  }
  if (target_dim == 0) target_dim = static_cast<int>(min_cols);
  if (target_dim < 1) throw ConfigError("collaboration dimension must be positive");
  if (target_dim > r) {
    throw DataError("collaboration dimension " + std::to_string(target_dim) +
                    " exceeds the anchor row count " + std::to_string(r));
  }
  if (target_dim > total_cols) {
    throw DataError("collaboration dimension " + std::to_string(target_dim) +
                    " exceeds the " + std::to_string(total_cols) +
                    " concatenated intermediate dimensions");
  }

  Matrix concat(r, total_cols);
  Eigen::Index offset = 0;
  for (const auto& a : anchor_reps) {
    concat.middleCols(offset, a.cols()) = a;
    offset += a.cols();
  }
  const TruncatedSvd svd = truncated_svd(concat, target_dim);

  CollabFit fit;
  fit.u1 = svd.u;
  fit.singular_values = svd.all_singular_values;
  const double cutoff = default_cutoff(concat) *
                        (fit.singular_values.size() > 0 ? fit.singular_values(0) : 0.0);
  fit.numerical_rank =
      static_cast<int>((fit.singular_values.array() > cutoff).count());
  if (target_dim > fit.numerical_rank) {
    warn("collaboration dimension " + std::to_string(target_dim) +
         " exceeds the numerical rank " + std::to_string(fit.numerical_rank) +
         " of the concatenated anchor representations");
  }
  for (std::size_t k = 0; k < anchor_reps.size(); ++k) {
    fit.transforms.push_back({static_cast<int>(k), pseudoinverse(anchor_reps[k]) * fit.u1});
  }
  return fit;
}

double anchor_alignment_error(const std::vector<Matrix>& anchor_reps, const CollabFit& fit) {
  if (anchor_reps.size() != fit.transforms.size()) {
    throw DataError("anchor representations and transforms differ in count");
  }
  std::vector<Matrix> projected;
  for (std::size_t k = 0; k < anchor_reps.size(); ++k) {
    projected.push_back(anchor_reps[k] * fit.transforms[k].g);
  }
  const double scale = fit.u1.norm();
  double worst = 0.0;
  for (std::size_t a = 0; a < projected.size(); ++a) {
    for (std::size_t b = a + 1; b < projected.size(); ++b) {
      worst = std::max(worst, (projected[a] - projected[b]).norm());
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

CollabRepresentation build_collab_representation(
    const std::vector<InstitutionRep>& data_reps,
    const std::vector<CollabTransform>& transforms) {
  if (data_reps.empty()) throw DataError("no institution representations supplied");
  std::vector<const InstitutionRep*> ordered;
  for (const auto& rep : data_reps) ordered.push_back(&rep);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const InstitutionRep* a, const InstitutionRep* b) {
                     return a->institution < b->institution;
                   });

  auto transform_for = [&](int institution) -> const CollabTransform& {
    for (const auto& t : transforms) {
      if (t.institution == institution) return t;
    }
    throw DataError("no collaboration transform for institution " +
                    std::to_string(institution + 1));
  };

  Eigen::Index rows = 0;
  Eigen::Index dim = -1;
  for (const auto* rep : ordered) {
    const auto& t = transform_for(rep->institution);
    if (rep->matrix.cols() != t.g.rows()) {
      throw DataError("institution " + std::to_string(rep->institution + 1) + " supplies " +
                      std::to_string(rep->matrix.cols()) +
                      " intermediate dimensions but its transform expects " +
                      std::to_string(t.g.rows()));
    }
    if (static_cast<Eigen::Index>(rep->ids.size()) != rep->matrix.rows()) {
      throw DataError("institution " + std::to_string(rep->institution + 1) +
                      ": id count does not match representation rows");
    }
    if (dim >= 0 && t.g.cols() != dim) {
      throw DataError("collaboration transforms disagree on the target dimension");
    }
    dim = t.g.cols();
    rows += rep->matrix.rows();
  }

  CollabRepresentation out;
  out.x_check.resize(rows, dim);
  Eigen::Index offset = 0;
  for (const auto* rep : ordered) {
    const auto& t = transform_for(rep->institution);
    out.x_check.middleRows(offset, rep->matrix.rows()) = rep->matrix * t.g;
    offset += rep->matrix.rows();
    for (SampleId id : rep->ids) {
      if (!out.institution_of.emplace(id, rep->institution).second) {
        throw DataError("sample id " + std::to_string(id) +
                        " appears in more than one institution");
      }
      out.ids.push_back(id);
    }
  }
  return out;
}

InstitutionRep concat_institution(const std::vector<const IntermediateRep*>& parts) {
  if (parts.empty()) throw DataError("institution has no party representations");
  InstitutionRep out;
  out.institution = parts.front()->party.institution;
  out.ids = parts.front()->ids;
  Eigen::Index cols = 0;
  for (const auto* p : parts) {
    if (p->kind != RepKind::kData) throw DataError("expected data representations");
    if (p->party.institution != out.institution) {
      throw DataError("party " + p->party.label() + " belongs to another institution");
    }
    if (p->ids != out.ids) {
      throw DataError("party " + p->party.label() +
                      " rows are not aligned with the other parties of its institution");
    }
    cols += p->matrix.cols();
  }
  out.matrix.resize(static_cast<Eigen::Index>(out.ids.size()), cols);
  Eigen::Index offset = 0;
  for (const auto* p : parts) {
    out.matrix.middleCols(offset, p->matrix.cols()) = p->matrix;
    offset += p->matrix.cols();
  }
  return out;
}

}  // namespace dcsurv
