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

#include <gtest/gtest.h>

#include <cmath>

#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"
#include "dcsurv/propensity.hpp"
#include "test_util.hpp"

namespace dcsurv {
namespace {

struct Problem {
  Matrix x;
  std::vector<int> z;
  std::vector<SampleId> ids;
};

Problem make_problem(int n, int m, std::uint64_t seed) {
  Problem p;
  p.x = testing::random_matrix(n, m, seed);
  Rng rng(seed + 1);
  for (int i = 0; i < n; ++i) {
    const double eta = 0.3 + p.x.row(i).sum() * 0.4;
    p.z.push_back(uniform_open(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0);
    p.ids.push_back(i);
  }
  return p;
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const Problem p = make_problem(120, 4, 3);
  Vector w(4);
  w << 0.2, -0.5, 0.1, 0.7;
  const double b = -0.3;
  const Vector g = log_likelihood_gradient(p.x, p.z, b, w);
  const double h = 1e-6;
  for (int j = 0; j <= 4; ++j) {
    double bp = b, bm = b;
    Vector wp = w, wm = w;
    if (j == 0) {
      bp += h;
      bm -= h;
    } else {
      wp(j - 1) += h;
      wm(j - 1) -= h;
    }
    const double fd = (log_likelihood(p.x, p.z, bp, wp) - log_likelihood(p.x, p.z, bm, wm)) / (2 * h);
    EXPECT_LE(std::abs(fd - g(j)), 1e-4 * std::max(1.0, std::abs(g(j)))) << "coordinate " << j;
  }
}

TEST(Logistic, ConvergesToStationaryPoint) {
  const Problem p = make_problem(400, 3, 5);
  const auto model = fit_logistic(p.x, p.z);
  EXPECT_TRUE(model.converged);
  EXPECT_LT(log_likelihood_gradient(p.x, p.z, model.intercept, model.weights).cwiseAbs().maxCoeff(),
            1e-6);
}

TEST(Logistic, AffineInvariantProbabilities) {
  const Problem p = make_problem(300, 4, 7);
  const auto base = score(fit_logistic(p.x, p.z), p.x, p.ids);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Matrix a = testing::random_matrix(4, 4, 100 + s);
    a.diagonal().array() += 2.0;
    const Vector shift = testing::random_matrix(4, 1, 200 + s).col(0) * 10.0;
    const Matrix y = (p.x * a).rowwise() + shift.transpose();
    const auto moved = score(fit_logistic(y, p.z), y, p.ids);
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_NEAR(moved.scores[i], base.scores[i], 1e-6);
    }
  }
}

TEST(Logistic, SingleClassIsDegenerate) {
  const Matrix x = testing::random_matrix(10, 2, 1);
  EXPECT_THROW(fit_logistic(x, std::vector<int>(10, 1)), DataError);
  EXPECT_THROW(fit_logistic(x, std::vector<int>(10, 0)), DataError);
}

TEST(Logistic, SeparationWarns) {
  Matrix x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  const std::vector<int> z = {0, 0, 0, 0, 1, 1, 1, 1};
  ScopedWarningCapture capture;
  const auto model = fit_logistic(x, z);
  EXPECT_TRUE(model.quasi_separated);
  EXPECT_FALSE(capture.messages().empty());
}

TEST(Logistic, NoCovariatesGivesBaseRate) {
  const Matrix x(6, 0);
  const std::vector<int> z = {1, 0, 0, 1, 1, 1};
  const auto model = fit_logistic(x, z);
  const auto s = score(model, x, {0, 1, 2, 3, 4, 5});
  for (double v : s.scores) EXPECT_NEAR(v, 4.0 / 6.0, 1e-10);
}

TEST(Scores, ClampedAwayFromZeroAndOne) {
  LogisticModel m;
  m.intercept = 0.0;
  m.weights = Vector::Constant(1, 1.0);
  Matrix x(2, 1);
  x << 1000, -1000;
  const auto s = score(m, x, {0, 1});
  EXPECT_EQ(s.scores[0], 1.0 - kScoreClamp);
  EXPECT_EQ(s.scores[1], kScoreClamp);
  EXPECT_TRUE(std::isfinite(logit(s.scores)[0]));
  EXPECT_THROW(logit({0.0}), DataError);
}

TEST(Scores, ConcatKeepsIdOrder) {
  PropensityScores a{{1, 2}, {0.1, 0.2}, "a"};
  PropensityScores b{{7}, {0.7}, "b"};
  const auto c = PropensityScores::concat({a, b}, "ab");
  EXPECT_EQ(c.ids, (std::vector<SampleId>{1, 2, 7}));
  EXPECT_EQ(c.scores[2], 0.7);
}

}  // namespace
}  // namespace dcsurv
