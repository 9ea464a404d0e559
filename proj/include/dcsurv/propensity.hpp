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

#include <string>
#include <vector>

#include "dcsurv/types.hpp"

namespace dcsurv {

struct LogisticConfig {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;  // on max |dlogL/dbeta|
  double hessian_ridge = 1e-8;       // added to non-intercept diagonal only
  double separation_threshold = 30.0;
};

struct LogisticModel {
  double intercept = 0.0;
  Vector weights;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;  // max-abs gradient of the log-likelihood
  bool quasi_separated = false;

  int dim() const { return static_cast<int>(weights.size()); }
};

// Bernoulli log-likelihood of Z under logistic(intercept + features * w),
// and its gradient ordered (intercept, w...).
double log_likelihood(const Matrix& features, const std::vector<int>& z,
                      double intercept, const Vector& weights);
Vector log_likelihood_gradient(const Matrix& features, const std::vector<int>& z,
                               double intercept, const Vector& weights);

// Maximum-likelihood logistic regression with an intercept, by damped Newton
// iterations with step halving. Throws DataError when only one class is
// present.
LogisticModel fit_logistic(const Matrix& features, const std::vector<int>& z,
                           const LogisticConfig& config = {});

inline constexpr double kScoreClamp = 1e-12;

struct PropensityScores {
  std::vector<SampleId> ids;
  std::vector<double> scores;  // in [1e-12, 1 - 1e-12]
  std::string source;          // "CA", "LA(1,1)", "DCQE(W-clb)", ...

  std::size_t size() const { return ids.size(); }
  static PropensityScores concat(const std::vector<PropensityScores>& parts,
                                 std::string source);
};

double logistic(double eta);

PropensityScores score(const LogisticModel& model, const Matrix& features,
                       const std::vector<SampleId>& ids, std::string source = {});

// Elementwise log(p / (1 - p)); DataError outside (0, 1).
std::vector<double> logit(const std::vector<double>& scores);

}  // namespace dcsurv
