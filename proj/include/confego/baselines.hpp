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

#ifndef CONFEGO_BASELINES_HPP_
#define CONFEGO_BASELINES_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confego/algorithm.hpp"
#include "confego/gp.hpp"
#include "confego/surrogates.hpp"

namespace confego {

enum class BaselineAlgorithm { CEI, PrimalDual };

BaselineAlgorithm parse_baseline(const std::string& name);
std::string to_string(BaselineAlgorithm algorithm);

struct BaselineSettings {
  BaselineAlgorithm algorithm = BaselineAlgorithm::CEI;
  double primal_dual_step = 0.1;           // eta
  double cei_feasibility_threshold = 0.5;  // incumbent gate

  void validate() const;
};

/// Pr[g_i(x) <= 0] under each constraint posterior, multiplied.
double feasibility_probability(std::span<const GpPosterior<double>> gps, const VectorXd& x);

/// Expected improvement below `incumbent` for a Gaussian with the given moments.
double expected_improvement(double mean, double sd, double incumbent);

/// EI of the objective posterior times the feasibility probability, or the
/// feasibility probability alone without an incumbent. gps[0] is the objective.
double cei_acquisition(std::span<const GpPosterior<double>> gps, std::optional<double> incumbent, const VectorXd& x);

/// Best observed objective among sampled points whose posterior feasibility
/// probability exceeds `threshold`.
std::optional<double> cei_incumbent(std::span<const GpPosterior<double>> gps, double threshold);

struct PrimalDualChoice {
  VectorXd x;
  Index grid_index = 0;
  std::vector<double> duals;
};

/// argmin over the grid of l_0 + sum_i dual_i l_i (lowest index on ties);
/// duals then move to max(0, dual_i + eta u_i(x)).
PrimalDualChoice primal_dual_step(const SurrogateBank& bank, const std::vector<double>& beta_sqrt,
                                  const std::vector<double>& duals, double eta);

/// Run a comparison method with the same budget, noise and bookkeeping as
/// run_config. Baselines never declare infeasibility.
RunTrace run_baseline(const ConstrainedProblem& problem, const ConfigRunSettings& settings,
                      const BaselineSettings& baseline);

}  // namespace confego

#endif  // CONFEGO_BASELINES_HPP_
