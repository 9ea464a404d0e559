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

#include <cstdint>

#include <nlohmann/json.hpp>

#include "dcsurv/core_model.hpp"
#include "dcsurv/rng.hpp"
#include "dcsurv/types.hpp"

// Synthetic confounded survival benchmark: six correlated Gaussian
// covariates, logistic treatment assignment, Weibull event times with a
// multiplicative treatment effect, Bernoulli(0.5) event indicators and
// observed times shrunk by a Uniform(0.8, 1) factor for events.
//
// The event indicator is drawn independently of the time (there is no
// censoring-time race); that is how the benchmark is defined.
namespace dcsurv::synth {

inline constexpr int kCovariates = 6;

struct SynthConfig {
  std::size_t n = 1000;
  double lambda = 2.0;  // Weibull scale
  double shape = 2.0;   // Weibull shape
  double gamma = -1.0;  // treatment effect on the log hazard
  std::uint64_t seed = 0;

  void validate() const;
  static SynthConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// 6x6 covariance: two 3x3 blocks with unit diagonal and 0.5 off-diagonal.
Matrix covariance();
Matrix covariance_cholesky();

// (1/3) * sum of the covariates.
double linear_predictor(const Eigen::Ref<const Vector>& row);
double treatment_probability(const Eigen::Ref<const Vector>& row);

// Inverse-CDF Weibull time for one uniform draw u in (0, 1).
double weibull_time(double u, double linear_predictor, int treatment,
                    const SynthConfig& config);

Matrix gen_covariates(std::size_t n, Rng& rng);
std::vector<int> assign_treatment(const Matrix& covariates, Rng& rng);

struct SurvivalDraw {
  std::vector<double> latent_time;    // t
  std::vector<int> event;             // delta
  std::vector<double> observed_time;  // T*
};

SurvivalDraw gen_survival(const Matrix& covariates, const std::vector<int>& treatment,
                          const SynthConfig& config, Rng& rng);

struct SyntheticSample {
  Dataset dataset;  // time column holds T*
  std::vector<double> latent_time;
};

// Ids 0..n-1, covariates named x1..x6.
SyntheticSample generate(const SynthConfig& config);

}  // namespace dcsurv::synth
