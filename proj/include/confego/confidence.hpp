// Copyright 2026 The confego Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFEGO_CONFIDENCE_HPP_
#define CONFEGO_CONFIDENCE_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "confego/common.hpp"
#include "confego/gp.hpp"
#include "confego/kernels.hpp"

namespace confego {

enum class BetaMode { Theory, GreedyGamma, Fixed };

BetaMode parse_beta_mode(const std::string& name);
std::string to_string(BetaMode mode);

/// Confidence-width settings shared by the N+1 surrogates.
struct ConfidenceConfig {
  std::vector<double> rkhs_bounds;  // B_0 (objective), B_1..B_N (constraints)
  double noise_sigma = 0.0;         // sub-Gaussian noise scale
  double delta = 0.05;
  int num_constraints = 1;
  BetaMode beta_mode = BetaMode::GreedyGamma;
  double beta_fixed = 2.0;  // used by BetaMode::Fixed

  void validate() const;
};

enum class GammaMethod { Greedy, Realized, Combined };

/// Per-function information-gain estimates at a given step.
struct GammaEstimate {
  std::vector<double> values;
  GammaMethod method = GammaMethod::Greedy;
};

/// Greedy maximization of 1/2 log det(I + K_X / lambda) over subsets of a grid.
///
/// values[t] is the greedy objective after t picks (values[0] == 0); picks
/// holds the chosen grid indices in order. Each pick takes the grid point of
/// largest posterior variance given the earlier picks, lowest index first on
/// ties. Because the objective is monotone submodular, values[t] is within a
/// factor (1 - 1/e) of the true maximum over sets of size t.
struct GreedyGammaTable {
  std::vector<double> values;
  std::vector<Index> picks;

  // gamma at step t, holding the last value past the table end.
  double at(Index t) const;
};

GreedyGammaTable greedy_gamma_table(const KernelSpec<double>& kernel, const MatrixXd& grid, Index horizon,
                                    double lambda);

/// Greedy estimate of the maximum information gain for sets of size t.
/// t larger than the grid is capped at the grid size with a warning.
double estimate_gamma(const KernelSpec<double>& kernel, const MatrixXd& grid, Index t, double lambda);

/// beta^{1/2}_{i,t} = B_i + sigma sqrt(2 (gamma_{i,t-1} + 1 + ln((N + 1) / delta))),
/// or the configured constant in Fixed mode. `function_index` 0 is the objective.
double beta_sqrt(const ConfidenceConfig& cfg, int function_index, int step, double gamma_prev);

template <typename Derived>
double lcb(const GpPosterior<double>& gp, double beta, const Eigen::MatrixBase<Derived>& x) {
  return gp.mean(x) - beta * std::sqrt(gp.variance(x));
}

template <typename Derived>
double ucb(const GpPosterior<double>& gp, double beta, const Eigen::MatrixBase<Derived>& x) {
  return gp.mean(x) + beta * std::sqrt(gp.variance(x));
}

VectorXd lcb(const GridPosterior<double>& grid, double beta);
VectorXd ucb(const GridPosterior<double>& grid, double beta);

}  // namespace confego

#endif  // CONFEGO_CONFIDENCE_HPP_
