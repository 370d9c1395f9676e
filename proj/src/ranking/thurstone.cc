// Copyright 2026 The madseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "madseg/ranking.h"

namespace madseg {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double NormalCdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double NormalPdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void CenterInPlace(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  for (double& x : v) x -= mean;
}

void CheckMatrix(const PairMatrix& m) {
  if (m.size() < 2) throw InvalidArgument("ranking needs at least two models");
  if (m.values.size() != static_cast<std::size_t>(m.size()) * m.size()) {
    throw InvalidArgument("pair matrix shape does not match its model list");
  }
  for (int i = 0; i < m.size(); ++i) {
    for (int j = 0; j < m.size(); ++j) {
      if (i != j && (!std::isfinite(m.at(i, j)) || m.at(i, j) < 0.0)) {
        throw InvalidArgument("pair matrix entry (" + m.model_ids[i] + ", " +
                              m.model_ids[j] + ") is not a finite nonnegative value");
      }
    }
  }
}

}  // namespace

std::string_view GaugeName(Gauge gauge) {
  switch (gauge) {
    case Gauge::kZeroSum:
      return "zero-sum";
    case Gauge::kFirstZero:
      return "first-zero";
    case Gauge::kUnitSum:
      return "unit-sum";
  }
  return "unknown";
}

Gauge ParseGauge(std::string_view name) {
  if (name == "zero-sum") return Gauge::kZeroSum;
  if (name == "first-zero") return Gauge::kFirstZero;
  if (name == "unit-sum") return Gauge::kUnitSum;
  throw InvalidArgument("unknown gauge '" + std::string(name) +
                        "' (expected zero-sum, first-zero or unit-sum)");
}

void RankingConfig::Validate() const {
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
  if (!(phi_floor > 0.0 && phi_floor < 0.5)) {
    throw InvalidArgument("phi_floor must lie in (0, 0.5)");
  }
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
  if (!(afc_smoothing >= 0.0)) throw InvalidArgument("2AFC smoothing must be nonnegative");
}

std::vector<int> RankingVector::Ranks() const {
  std::vector<int> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [this](int a, int b) { return mu[a] > mu[b]; });
  std::vector<int> ranks(mu.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = static_cast<int>(pos) + 1;
  }
  return ranks;
}

std::vector<std::string> RankingVector::Order() const {
  const auto ranks = Ranks();
  std::vector<std::string> order(model_ids.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) order[ranks[i] - 1] = model_ids[i];
  return order;
}

double LogLikelihood(const PairMatrix& m, std::span<const double> mu,
                     const RankingConfig& config) {
  double total = 0.0;
  for (int i = 0; i < m.size(); ++i) {
    for (int j = 0; j < m.size(); ++j) {
      if (i == j || m.at(i, j) == 0.0) continue;
      const double phi = std::max(NormalCdf(mu[i] - mu[j]), config.phi_floor);
      total += m.at(i, j) * std::log(phi);
    }
  }
  return total;
}

std::vector<double> LogLikelihoodGradient(const PairMatrix& m,
                                          std::span<const double> mu,
                                          const RankingConfig& config) {
  const int n = m.size();
  std::vector<double> grad(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || m.at(i, j) == 0.0) continue;
      const double d = mu[i] - mu[j];
      // d/dd log(max(Phi(d), floor)) vanishes where the clamp is active.
      const double cdf = NormalCdf(d);
      const double ratio = cdf > config.phi_floor ? NormalPdf(d) / cdf : 0.0;
      grad[i] += m.at(i, j) * ratio;
      grad[j] -= m.at(i, j) * ratio;
    }
  }
  return grad;
}

RankingVector MleRank(const PairMatrix& m, const RankingConfig& config) {
  config.Validate();
  CheckMatrix(m);
  const int n = m.size();

  double scale = 1.0;
  double max_weight = 0.0;
  for (int i = 0; i < n; ++i) {
    double weight = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      scale = std::max(scale, m.at(i, j));
      weight += m.at(i, j) + m.at(j, i);
    }
    max_weight = std::max(max_weight, weight);
  }
  const double threshold = config.tolerance * scale;

  // Curvature of log Phi at 0 is about -0.64 per unit weight, so 1/weight is a
  // near-Newton first step; backtracking corrects it from there.
  double step = max_weight > 0.0 ? 1.0 / max_weight : 1.0;
  std::vector<double> mu(n, 0.0);
  double value = LogLikelihood(m, mu, config);
  auto grad = LogLikelihoodGradient(m, mu, config);
  CenterInPlace(grad);
  double grad_norm = Norm(grad);

  std::vector<double> trial(n);
  int iteration = 0;
  for (; iteration < config.max_iterations && grad_norm > threshold; ++iteration) {
    bool accepted = false;
    while (!accepted && step > 1e-300) {
      for (int i = 0; i < n; ++i) trial[i] = mu[i] + step * grad[i];
      const double trial_value = LogLikelihood(m, trial, config);
      auto trial_grad = LogLikelihoodGradient(m, trial, config);
      CenterInPlace(trial_grad);
      // L is concave along the ray, so a nonnegative directional derivative
      // at the trial point means the step did not overshoot. This keeps the
      // iteration moving once value differences fall below rounding.
      const double slope =
          std::inner_product(trial_grad.begin(), trial_grad.end(), grad.begin(), 0.0);
      if (trial_value > value || slope >= 0.0) {
        mu = trial;
        value = trial_value;
        grad = std::move(trial_grad);
        grad_norm = Norm(grad);
        accepted = true;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
  }
  if (grad_norm > threshold) {
    throw ConvergenceError("MLE ranking did not converge after " +
                               std::to_string(iteration) +
                               " iterations; gradient norm " + std::to_string(grad_norm),
                           grad_norm);
  }

  CenterInPlace(mu);
  switch (config.gauge) {
    case Gauge::kZeroSum:
      break;
    case Gauge::kFirstZero: {
      const double first = mu[0];
      for (double& x : mu) x -= first;
      break;
    }
    case Gauge::kUnitSum:
      for (double& x : mu) x += 1.0 / n;
      break;
  }

  RankingVector out;
  out.model_ids = m.model_ids;
  out.mu = std::move(mu);
  out.gauge = config.gauge;
  out.log_likelihood = LogLikelihood(m, out.mu, config);
  out.iterations = iteration;
  return out;
}

}  // namespace madseg
