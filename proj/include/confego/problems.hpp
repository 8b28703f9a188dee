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

#ifndef CONFEGO_PROBLEMS_HPP_
#define CONFEGO_PROBLEMS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "confego/common.hpp"
#include "confego/domain.hpp"
#include "confego/kernels.hpp"

namespace confego {

using Oracle = std::function<double(const VectorXd&)>;

struct Optimum {
  double f_star = 0.0;
  VectorXd x_star;
  Index grid_index = -1;
};

/// Noiseless values of every function on the domain grid.
struct ProblemTruth {
  MatrixXd grid_values;  // grid_size x (N + 1); column 0 is the objective
  std::vector<bool> feasible_mask;
  std::optional<Optimum> optimum;  // empty when no grid point is feasible

  bool feasible() const { return optimum.has_value(); }
};

/// min f(x) s.t. g_i(x) <= 0 over a box. Oracles are noiseless; observation
/// noise is added by the optimization loops, never here.
struct ConstrainedProblem {
  std::string name;
  DomainBox domain;
  Oracle objective;
  std::vector<Oracle> constraints;
  double noise_std = 0.0;
  std::optional<ProblemTruth> truth;
  // RKHS norms of f, g_1..g_N under `kernel`, when the construction knows them.
  std::vector<double> rkhs_norms;
  std::optional<KernelSpec<double>> kernel;

  int num_constraints() const { return static_cast<int>(constraints.size()); }

  /// Noiseless value of function `index` (0 = objective) at x. A grid index
  /// reads the tabulated truth so that grid metrics are exact.
  double value(int index, const VectorXd& x, std::optional<Index> grid_index = std::nullopt) const;
};

/// Tabulate every oracle on the grid and locate the grid-feasible minimum
/// (lowest grid index on ties).
ProblemTruth compute_truth(const ConstrainedProblem& problem);

/// Copy of `problem` with `offset` added to function `index`; truth is recomputed.
ConstrainedProblem shifted(const ConstrainedProblem& problem, int index, double offset);

/// Exact GP-prior draws on a tensor grid.
///
/// Draws are exact multivariate normal samples at a set of anchor points
/// (the domain grid itself when it has at most `max_anchors` points, else a
/// coarser tensor grid), taken through the eigendecomposition of the anchor
/// Gram matrix. Off-anchor values are the noiseless conditional mean given
/// the anchor values, so every draw is a finite kernel expansion
/// f = sum_a c_a k(., a) whose RKHS norm is known exactly. Eigen-directions
/// below 1e-9 of the leading eigenvalue are dropped.
///
/// The decomposition is independent of the seed; share one sampler across
/// draws.
class GpPriorSampler {
 public:
  struct Draw {
    VectorXd coefficients;  // c, one per anchor
    VectorXd grid_values;   // f on the domain grid
    double rkhs_norm = 0.0;
  };

  GpPriorSampler(KernelSpec<double> kernel, DomainBox domain, Index max_anchors = 400);

  const KernelSpec<double>& kernel() const { return kernel_; }
  const DomainBox& domain() const { return domain_; }
  const MatrixXd& anchors() const { return *anchors_; }
  std::shared_ptr<const MatrixXd> shared_anchors() const { return anchors_; }
  Index rank() const { return basis_.cols(); }

  Draw draw(std::mt19937_64& rng) const;
  double evaluate(const VectorXd& coefficients, const VectorXd& x) const;

  /// RKHS norm of the kernel expansion that matches `anchor_values` after
  /// projection onto the retained eigen-directions.
  double projected_norm(const VectorXd& anchor_values) const;

 private:
  KernelSpec<double> kernel_;
  DomainBox domain_;
  std::shared_ptr<const MatrixXd> anchors_;
  MatrixXd eigvecs_;     // retained eigenvectors of K_AA
  VectorXd eigvals_;     // retained eigenvalues
  MatrixXd basis_;       // eigvecs * diag(eigvals^{-1/2}); c = basis * z
  MatrixXd grid_basis_;  // K(grid, anchors) * basis
};

/// Objective and constraints drawn independently from GP(0, kernel).
/// Returns empty when no grid point satisfies every constraint.
std::optional<ConstrainedProblem> sample_gp_problem(std::uint64_t seed, const GpPriorSampler& sampler,
                                                    int n_constraints, double noise_std = 0.1);
std::optional<ConstrainedProblem> sample_gp_problem(std::uint64_t seed, const KernelSpec<double>& kernel,
                                                    const DomainBox& domain, int n_constraints,
                                                    double noise_std = 0.1);

/// GP-sampled problem whose first constraint is shifted to have grid
/// minimum exactly `epsilon` > 0.
ConstrainedProblem make_infeasible_problem(std::uint64_t seed, const GpPriorSampler& sampler, double epsilon,
                                           int n_constraints = 1, double noise_std = 0.1);
ConstrainedProblem make_infeasible_problem(std::uint64_t seed, const KernelSpec<double>& kernel,
                                           const DomainBox& domain, double epsilon, int n_constraints = 1,
                                           double noise_std = 0.1);

/// Fixed fixtures: "quad-sine-2d", "always-feasible-1d", "boundary-active-1d".
/// `grid_per_dim` 0 keeps the fixture default.
ConstrainedProblem analytic_problem(const std::string& name, double noise_std = 0.1, int grid_per_dim = 0);
std::vector<std::string> analytic_problem_names();

/// Deterministic 64-bit mixing of a seed with stream identifiers.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace confego

#endif  // CONFEGO_PROBLEMS_HPP_
