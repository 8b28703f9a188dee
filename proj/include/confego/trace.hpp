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

#ifndef CONFEGO_TRACE_HPP_
#define CONFEGO_TRACE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confego/common.hpp"
#include "confego/confidence.hpp"
#include "confego/metrics.hpp"

namespace confego {

struct StepRecord {
  int step = 0;
  // False for the record of a halting infeasibility declaration.
  bool sampled = true;
  VectorXd x;
  std::optional<Index> grid_index;
  VectorXd observations;  // y_0..y_N
  VectorXd true_values;   // f(x_t), g_1(x_t)..g_N(x_t)
  VectorXd beta_sqrt;     // beta^{1/2}_{i,t}; empty if the acquisition uses none
  VectorXd posterior_sd;  // sigma_{i,t-1}(x_t)
  VectorXd gamma_prev;    // gamma_{i,t-1} fed to beta
  std::optional<bool> coverage;  // truth inside [lcb, ucb] on the whole grid, all functions
  VectorXd duals;         // primal-dual only
  bool infeasible_declared = false;
};

struct InfeasibilityRecord {
  int step = 0;
  int constraint_index = 0;
  double min_lcb = 0.0;
};

struct RunTrace {
  std::string algorithm;
  std::optional<BetaMode> beta_mode;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int dimension = 0;
  int num_constraints = 0;
  bool has_truth = false;
  std::vector<StepRecord> steps;
  MetricSeries metrics;
  std::optional<InfeasibilityRecord> infeasibility;
  bool incomplete = false;
  std::string failure;
  // Per function, after the last update.
  VectorXd final_realized_gain;
  VectorXd final_greedy_gamma;

  int evaluated_steps() const;
  const StepRecord* last_sampled() const;
};

}  // namespace confego

#endif  // CONFEGO_TRACE_HPP_
