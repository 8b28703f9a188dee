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

#ifndef CONFEGO_SRC_RUN_SUPPORT_HPP_
#define CONFEGO_SRC_RUN_SUPPORT_HPP_

// Pieces shared by the CONFIG loop and the baseline loops.

#include <memory>
#include <optional>

#include "confego/algorithm.hpp"
#include "confego/surrogates.hpp"

namespace confego::detail {

inline RunTrace start_trace(const std::string& algorithm, const ConstrainedProblem& problem,
                            const ConfigRunSettings& settings) {
  RunTrace trace;
  trace.algorithm = algorithm;
  trace.lambda = settings.effective_lambda();
  trace.seed = settings.rng_seed;
  trace.dimension = static_cast<int>(settings.domain.dimension());
  trace.num_constraints = problem.num_constraints();
  trace.has_truth = problem.truth && problem.truth->feasible();
  trace.metrics = MetricSeries(problem.num_constraints(), trace.has_truth);
  return trace;
}

/// Evaluate every function at x with noise, fill the record and metrics, and
/// return the observations.
inline VectorXd evaluate_and_record(const ConstrainedProblem& problem, const ConfigRunSettings& settings,
                                    RunTrace& trace, StepRecord& record) {
  const int n = problem.num_constraints();
  record.true_values.resize(n + 1);
  record.observations.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double v = problem.value(i, record.x, record.grid_index);
    record.true_values(i) = v;
    record.observations(i) = v + observation_noise(settings.rng_seed, i, record.step, problem.noise_std);
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) g[static_cast<std::size_t>(i - 1)] = record.true_values(i);
  if (trace.has_truth) {
    trace.metrics.append(step_metrics(record.true_values(0), problem.truth->optimum->f_star, g));
  } else {
    for (double& gi : g) gi = positive_part(gi);
    trace.metrics.append(g);
  }
  return record.observations;
}

inline VectorXd posterior_sd_at(const SurrogateBank& bank, const VectorXd& x, std::optional<Index> grid_index) {
  VectorXd sd(bank.functions());
  for (int i = 0; i < bank.functions(); ++i) {
    sd(i) = grid_index ? std::sqrt(bank.on_grid(i).variance_at(*grid_index))
                       : std::sqrt(bank.gp(i).variance(x));
  }
  return sd;
}

inline void finish_trace(RunTrace& trace, const SurrogateBank& bank, const GreedyGammaTable& greedy) {
  const int functions = bank.functions();
  trace.final_realized_gain.resize(functions);
  trace.final_greedy_gamma.resize(functions);
  const int evaluated = trace.evaluated_steps();
  for (int i = 0; i < functions; ++i) {
    trace.final_realized_gain(i) = bank.gp(i).info_gain();
    trace.final_greedy_gamma(i) = greedy.at(evaluated);
  }
}

}  // namespace confego::detail

#endif  // CONFEGO_SRC_RUN_SUPPORT_HPP_
