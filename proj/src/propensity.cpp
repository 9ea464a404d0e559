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

#include "dcsurv/propensity.hpp"

#include <algorithm>
#include <cmath>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"

namespace dcsurv {
namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Vector linear_part(const Matrix& features, double intercept, const Vector& weights) {
  if (features.cols() != weights.size()) {
    throw DataError("feature dimension " + std::to_string(features.cols()) +
                    " does not match model dimension " + std::to_string(weights.size()));
  }
  return (features * weights).array() + intercept;
}

void check_inputs(const Matrix& features, const std::vector<int>& z) {
  if (static_cast<std::size_t>(features.rows()) != z.size()) {
    throw DataError("feature rows (" + std::to_string(features.rows()) +
                    ") do not match treatment length (" + std::to_string(z.size()) + ")");
  }
}

}  // namespace

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double log_likelihood(const Matrix& features, const std::vector<int>& z, double intercept,
                      const Vector& weights) {
  check_inputs(features, z);
  const Vector eta = linear_part(features, intercept, weights);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += z[static_cast<std::size_t>(i)] * eta(i) - softplus(eta(i));
  }
  return ll;
}

Vector log_likelihood_gradient(const Matrix& features, const std::vector<int>& z,
                               double intercept, const Vector& weights) {
  check_inputs(features, z);
  const Vector eta = linear_part(features, intercept, weights);
  Vector residual(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    residual(i) = z[static_cast<std::size_t>(i)] - logistic(eta(i));
  }
  Vector grad(weights.size() + 1);
  grad(0) = residual.sum();
  grad.tail(weights.size()) = features.transpose() * residual;
  return grad;
}

LogisticModel fit_logistic(const Matrix& features, const std::vector<int>& z,
                           const LogisticConfig& config) {
  check_inputs(features, z);
  if (z.size() < 2) throw DataError("logistic regression needs at least two samples");
  const auto treated = std::count(z.begin(), z.end(), 1);
  if (treated == 0 || treated == static_cast<long>(z.size())) {
    throw DataError("degenerate labels: only one treatment class is present");
  }
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  Matrix design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = features;
  Vector zv(n);
  for (Eigen::Index i = 0; i < n; ++i) zv(i) = z[static_cast<std::size_t>(i)];

  auto objective = [&](const Vector& beta) {
    const Vector eta = design * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += zv(i) * eta(i) - softplus(eta(i));
    return ll;
  };

  Vector beta = Vector::Zero(p + 1);
  const double rate = static_cast<double>(treated) / static_cast<double>(n);
  beta(0) = std::log(rate / (1.0 - rate));

  LogisticModel model;
  double ll = objective(beta);
  Vector grad;
  for (;;) {
    const Vector eta = design * beta;
    Vector prob(n);
    for (Eigen::Index i = 0; i < n; ++i) prob(i) = logistic(eta(i));
    grad = design.transpose() * (zv - prob);
    model.final_grad_norm = grad.cwiseAbs().maxCoeff();
    if (model.final_grad_norm <= config.gradient_tolerance) {
      model.converged = true;
      break;
    }
    if (model.iterations >= config.max_iterations) break;

    const Vector w = prob.array() * (1.0 - prob.array());
    Matrix hessian = design.transpose() * w.asDiagonal() * design;
    for (Eigen::Index j = 1; j <= p; ++j) hessian(j, j) += config.hessian_ridge;
    const Vector step = hessian.ldlt().solve(grad);

    double t = 1.0;
    Vector candidate = beta + step;
    double candidate_ll = objective(candidate);
    while (!(candidate_ll >= ll) && t > 1e-10) {
      t *= 0.5;
      candidate = beta + t * step;
      candidate_ll = objective(candidate);
    }
    ++model.iterations;
    if (!(candidate_ll >= ll)) break;  // no ascent possible at machine precision
    beta = candidate;
    ll = candidate_ll;
  }

  model.intercept = beta(0);
  model.weights = beta.tail(p);
  const double max_eta = (design * beta).cwiseAbs().maxCoeff();
  if (max_eta > config.separation_threshold) {
    model.quasi_separated = true;
    warn("logistic regression: quasi-separation detected (|linear predictor| up to " +
         std::to_string(max_eta) + "); scores will be clamped");
  }
  if (!model.converged) {
    warn("logistic regression stopped after " + std::to_string(model.iterations) +
         " iterations with max |gradient| " + std::to_string(model.final_grad_norm));
  }
  return model;
}

PropensityScores PropensityScores::concat(const std::vector<PropensityScores>& parts,
                                          std::string source) {
  PropensityScores out;
  out.source = std::move(source);
  for (const auto& p : parts) {
    out.ids.insert(out.ids.end(), p.ids.begin(), p.ids.end());
    out.scores.insert(out.scores.end(), p.scores.begin(), p.scores.end());
  }
  return out;
}

PropensityScores score(const LogisticModel& model, const Matrix& features,
                       const std::vector<SampleId>& ids, std::string source) {
  if (static_cast<std::size_t>(features.rows()) != ids.size()) {
    throw DataError("feature rows do not match id count");
  }
  const Vector eta = linear_part(features, model.intercept, model.weights);
  PropensityScores out;
  out.ids = ids;
  out.source = std::move(source);
  out.scores.resize(ids.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out.scores[static_cast<std::size_t>(i)] =
        std::clamp(logistic(eta(i)), kScoreClamp, 1.0 - kScoreClamp);
  }
  return out;
}

std::vector<double> logit(const std::vector<double>& scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double p : scores) {
    if (!(p > 0.0 && p < 1.0)) {
      throw DataError("logit undefined for score " + std::to_string(p));
    }
    out.push_back(std::log(p / (1.0 - p)));
  }
  return out;
}

}  // namespace dcsurv
