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

#include "dcsurv/synth.hpp"

#include <cmath>

#include "dcsurv/error.hpp"

namespace dcsurv::synth {

void SynthConfig::validate() const {
  if (n < 1) throw ConfigError("synthetic sample count n must be at least 1");
  if (!(lambda > 0.0)) throw ConfigError("Weibull scale lambda must be positive");
  if (!(shape > 0.0)) throw ConfigError("Weibull shape v must be positive");
  if (!std::isfinite(gamma)) throw ConfigError("treatment effect gamma must be finite");
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  if (j.contains("n")) {
    const auto n = j.at("n").get<long long>();
    if (n < 1) throw ConfigError("synthetic sample count n must be at least 1");
    c.n = static_cast<std::size_t>(n);
  }
  c.lambda = j.value("lambda", c.lambda);
  c.shape = j.value("shape", c.shape);
  c.gamma = j.value("gamma", c.gamma);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json SynthConfig::to_json() const {
  return {{"n", n}, {"lambda", lambda}, {"shape", shape}, {"gamma", gamma}, {"seed", seed}};
}

Matrix covariance() {
  Matrix s = Matrix::Zero(kCovariates, kCovariates);
  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) s(3 * block + i, 3 * block + j) = i == j ? 1.0 : 0.5;
    }
  }
  return s;
}

Matrix covariance_cholesky() {
  static const Matrix kL = Eigen::LLT<Matrix>(covariance()).matrixL();
  return kL;
}

double linear_predictor(const Eigen::Ref<const Vector>& row) { return row.sum() / 3.0; }

double treatment_probability(const Eigen::Ref<const Vector>& row) {
  return 1.0 / (1.0 + std::exp(-linear_predictor(row)));
}

double weibull_time(double u, double linear_predictor, int treatment,
                    const SynthConfig& config) {
  const double rate = config.lambda * std::exp(-linear_predictor + config.gamma * treatment);
  return std::pow(-std::log(u) / rate, 1.0 / config.shape);
}

Matrix gen_covariates(std::size_t n, Rng& rng) {
  if (n < 1) throw ConfigError("n must be at least 1");
  const Matrix l = covariance_cholesky();
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), kCovariates);
  Vector z(kCovariates);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < kCovariates; ++j) z(j) = normal(rng);
    x.row(i) = (l * z).transpose();
  }
  return x;
}

std::vector<int> assign_treatment(const Matrix& covariates, Rng& rng) {
  if (covariates.cols() != kCovariates) {
    throw DataError("treatment assignment expects 6 covariates");
  }
  std::vector<int> z(static_cast<std::size_t>(covariates.rows()));
  for (Eigen::Index i = 0; i < covariates.rows(); ++i) {
    std::bernoulli_distribution coin(treatment_probability(covariates.row(i).transpose()));
    z[static_cast<std::size_t>(i)] = coin(rng) ? 1 : 0;
  }
  return z;
}

SurvivalDraw gen_survival(const Matrix& covariates, const std::vector<int>& treatment,
                          const SynthConfig& config, Rng& rng) {
  config.validate();
  if (static_cast<std::size_t>(covariates.rows()) != treatment.size()) {
    throw DataError("covariates and treatment are not aligned");
  }
  const std::size_t n = treatment.size();
  SurvivalDraw draw;
  draw.latent_time.resize(n);
  draw.event.resize(n);
  draw.observed_time.resize(n);
  std::bernoulli_distribution event_coin(0.5);
  std::uniform_real_distribution<double> shrink(0.8, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform_open(rng);
    const double t = weibull_time(
        u, linear_predictor(covariates.row(static_cast<Eigen::Index>(i)).transpose()),
        treatment[i], config);
    const int delta = event_coin(rng) ? 1 : 0;
    const double eps = shrink(rng);
    draw.latent_time[i] = t;
    draw.event[i] = delta;
    draw.observed_time[i] = delta == 1 ? eps * t : t;
  }
  return draw;
}

SyntheticSample generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Matrix x = gen_covariates(config.n, rng);
  std::vector<int> z = assign_treatment(x, rng);
  SurvivalDraw draw = gen_survival(x, z, config, rng);
  Outcomes outcomes;
  outcomes.ids.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) outcomes.ids[i] = static_cast<SampleId>(i);
  outcomes.time = draw.observed_time;
  outcomes.event = draw.event;
  outcomes.treatment = std::move(z);
  return SyntheticSample{Dataset(std::move(outcomes), std::move(x)),
                         std::move(draw.latent_time)};
}

}  // namespace dcsurv::synth
