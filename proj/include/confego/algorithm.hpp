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

#ifndef CONFEGO_ALGORITHM_HPP_
#define CONFEGO_ALGORITHM_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "confego/acquisition.hpp"
#include "confego/confidence.hpp"
#include "confego/domain.hpp"
#include "confego/kernels.hpp"
#include "confego/problems.hpp"
#include "confego/trace.hpp"

namespace confego {

struct ConfigRunSettings {
  int horizon = 50;
  ConfidenceConfig confidence;
  DomainBox domain;
  KernelSpec<double> kernel;  // shared by the N + 1 surrogates
  double lambda = 0.0;        // <= 0 selects default_lambda(confidence.noise_sigma)
  std::uint64_t rng_seed = 0;
  bool stop_on_infeasibility = true;
  // Local refinement of the auxiliary solution; unset means "only for d >= 3".
  std::optional<bool> refine;
  // Exogenous gamma_{i,t} tables (index t) for BetaMode::Theory, one per
  // function. Empty means the greedy grid estimate.
  std::vector<std::vector<double>> gamma_tables;

  double effective_lambda() const;
  bool effective_refine() const;
  void validate(const ConstrainedProblem& problem) const;
};

/// lambda = sigma^2 for sigma > 0, else 1e-6.
double default_lambda(double noise_sigma);

/// Zero-mean Gaussian noise for function `index` at `step`, a pure function
/// of its arguments.
double observation_noise(std::uint64_t seed, int index, int step, double sigma);

/// Greedy gamma table for (kernel, domain grid, lambda), memoized across
/// calls and threads. The returned table covers at least `horizon` steps.
std::shared_ptr<const GreedyGammaTable> shared_greedy_gamma(const KernelSpec<double>& kernel,
                                                            const DomainBox& domain, double lambda, int horizon);

/// Lower-confidence-bound constrained optimization loop.
///
/// Each step builds l_i = mu_i - beta_i sigma_i for all functions, declares
/// infeasibility when some constraint LCB is positive on the whole grid
/// (halting unless `stop_on_infeasibility` is false), and otherwise samples
/// argmin l_0 subject to l_i <= 0. Noisy observations of every function at
/// the chosen point update the posteriors.
RunTrace run_config(const ConstrainedProblem& problem, const ConfigRunSettings& settings);

/// Best sampled point: minimal [f - f*]+ + sum_i [g_i]+ when the optimum is
/// known, otherwise minimal observed objective among points observed
/// feasible, falling back to the minimal observed total violation.
VectorXd select_reported_solution(const RunTrace& trace);

}  // namespace confego

#endif  // CONFEGO_ALGORITHM_HPP_
