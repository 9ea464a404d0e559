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

#include "dcsurv/reduce.hpp"

#include <cmath>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"

namespace dcsurv {

double ReducerModel::explained_variance_fraction() const {
  const double total = singular_values_.squaredNorm();
  if (total == 0.0) return 1.0;
  return singular_values_.head(target_dim()).squaredNorm() / total;
}

ReducerModel fit_reducer(const Matrix& block, int target_dim, bool standardize) {
  const Eigen::Index n = block.rows();
  const Eigen::Index m = block.cols();
  if (target_dim < 1 || target_dim > m) {
    throw DataError("reduced dimension " + std::to_string(target_dim) +
                    " must lie in [1, " + std::to_string(m) + "]");
  }
  if (n < 2) throw DataError("PCA needs at least two rows");

  ReducerModel model;
  model.means_ = block.colwise().mean().transpose();
  Matrix centered = block.rowwise() - model.means_.transpose();
  model.scales_ = Vector::Ones(m);
  if (standardize) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n - 1));
      if (sd > 0.0) {
        model.scales_(j) = sd;
      } else {
        warn("column " + std::to_string(j + 1) +
             " has zero variance; its standardization scale is set to 1");
      }
    }
    centered = centered.array().rowwise() / model.scales_.transpose().array();
  }

  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  model.singular_values_ = svd.singularValues();
  model.components_ = svd.matrixV().leftCols(target_dim);
  for (Eigen::Index c = 0; c < model.components_.cols(); ++c) {
    Eigen::Index pivot = 0;
    model.components_.col(c).cwiseAbs().maxCoeff(&pivot);
    if (model.components_(pivot, c) < 0.0) model.components_.col(c) *= -1.0;
  }
  return model;
}

ReducerModel fit_reducer(const PartyBlock& block, int target_dim, bool standardize) {
  return fit_reducer(block.covariates, target_dim, standardize);
}

Matrix apply_reducer(const ReducerModel& model, const Matrix& rows) {
  if (rows.cols() != model.source_dim()) {
    throw DataError("reducer expects " + std::to_string(model.source_dim()) +
                    " columns, got " + std::to_string(rows.cols()));
  }
  const Matrix scaled = ((rows.rowwise() - model.col_means().transpose()).array().rowwise() /
                         model.col_scales().transpose().array())
                            .matrix();
  return scaled * model.components();
}

int default_target_dim(int source_dim) { return (source_dim + 1) / 2; }

PartyShare encode_party(const PartyBlock& block, const Matrix& anchor_slice,
                        const ReduceOptions& options) {
  const int source_dim = static_cast<int>(block.covariates.cols());
  const int target = options.target_dim > 0 ? options.target_dim : default_target_dim(source_dim);
  if (options.enforce_privacy && target >= source_dim) {
    throw PrivacyError("party " + block.party.label() + ": reduced dimension " +
                       std::to_string(target) + " must be strictly below its " +
                       std::to_string(source_dim) + " covariates");
  }
  if (anchor_slice.cols() != source_dim) {
    throw DataError("party " + block.party.label() + ": anchor slice has " +
                    std::to_string(anchor_slice.cols()) + " columns, block has " +
                    std::to_string(source_dim));
  }
  const ReducerModel model = fit_reducer(block.covariates, target, options.standardize);

  PartyShare share;
  share.party = block.party;
  share.source_dim = source_dim;
  share.data = {block.party, RepKind::kData, apply_reducer(model, block.covariates), block.ids};
  share.anchor = {block.party, RepKind::kAnchor, apply_reducer(model, anchor_slice), {}};
  share.outcomes = block.outcomes;
  return share;
}

}  // namespace dcsurv
