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

#include "confego/problems.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Eigenvalues>

namespace confego {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kDroppedSpectrum = 1e-9;

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

double ConstrainedProblem::value(int index, const VectorXd& x, std::optional<Index> grid_index) const {
  if (index < 0 || index > num_constraints()) throw InputError("problem function index out of range");
  if (grid_index && truth) return truth->grid_values(*grid_index, index);
  return index == 0 ? objective(x) : constraints[static_cast<std::size_t>(index - 1)](x);
}

ProblemTruth compute_truth(const ConstrainedProblem& problem) {
  const MatrixXd grid = problem.domain.grid_points();
  const int n = problem.num_constraints();
  ProblemTruth truth;
  truth.grid_values.resize(grid.rows(), n + 1);
  truth.feasible_mask.assign(static_cast<std::size_t>(grid.rows()), true);
  for (Index g = 0; g < grid.rows(); ++g) {
    const VectorXd x = grid.row(g).transpose();
    truth.grid_values(g, 0) = problem.objective(x);
    for (int i = 1; i <= n; ++i) {
      const double v = problem.constraints[static_cast<std::size_t>(i - 1)](x);
      truth.grid_values(g, i) = v;
      if (!(v <= 0.0)) truth.feasible_mask[static_cast<std::size_t>(g)] = false;
    }
  }
  for (Index g = 0; g < grid.rows(); ++g) {
    if (!truth.feasible_mask[static_cast<std::size_t>(g)]) continue;
    if (!truth.optimum || truth.grid_values(g, 0) < truth.optimum->f_star) {
      truth.optimum = Optimum{truth.grid_values(g, 0), grid.row(g).transpose(), g};
    }
  }
  return truth;
}

ConstrainedProblem shifted(const ConstrainedProblem& problem, int index, double offset) {
  if (index < 0 || index > problem.num_constraints()) throw InputError("shifted: function index out of range");
  ConstrainedProblem out = problem;
  Oracle& target = index == 0 ? out.objective : out.constraints[static_cast<std::size_t>(index - 1)];
  target = [base = target, offset](const VectorXd& x) { return base(x) + offset; };
  if (problem.truth) {
    // Shift the table directly so tabulated values stay bit-consistent.
    ProblemTruth truth;
    truth.grid_values = problem.truth->grid_values;
    truth.grid_values.col(index).array() += offset;
    const MatrixXd grid = out.domain.grid_points();
    truth.feasible_mask.assign(static_cast<std::size_t>(grid.rows()), true);
    for (Index g = 0; g < grid.rows(); ++g) {
      for (int i = 1; i <= out.num_constraints(); ++i) {
        if (!(truth.grid_values(g, i) <= 0.0)) truth.feasible_mask[static_cast<std::size_t>(g)] = false;
      }
      if (truth.feasible_mask[static_cast<std::size_t>(g)] &&
          (!truth.optimum || truth.grid_values(g, 0) < truth.optimum->f_star)) {
        truth.optimum = Optimum{truth.grid_values(g, 0), grid.row(g).transpose(), g};
      }
    }
    out.truth = std::move(truth);
  }
  if (!out.rkhs_norms.empty()) {
    // A constant offset is not a finite kernel expansion.
    out.rkhs_norms.clear();
  }
  return out;
}

GpPriorSampler::GpPriorSampler(KernelSpec<double> kernel, DomainBox domain, Index max_anchors)
    : kernel_(std::move(kernel)), domain_(std::move(domain)) {
  kernel_.validate();
  domain_.validate();
  if (kernel_.dimension != domain_.dimension()) throw InputError("sampler: kernel and domain dimensions differ");
  if (max_anchors < 2) throw InputError("sampler: need at least two anchors");
  if (domain_.grid_size() <= max_anchors) {
    anchors_ = std::make_shared<const MatrixXd>(domain_.grid_points());
  } else {
    int per_dim = static_cast<int>(std::floor(std::pow(static_cast<double>(max_anchors),
                                                       1.0 / static_cast<double>(domain_.dimension())) + 1e-9));
    per_dim = std::max(per_dim, 2);
    anchors_ = std::make_shared<const MatrixXd>(DomainBox(domain_.lower, domain_.upper, per_dim).grid_points());
  }
  const MatrixXd gram = gram_matrix(kernel_, *anchors_);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("sampler: eigendecomposition of anchor Gram matrix failed");
  const VectorXd& values = eig.eigenvalues();  // ascending
  const double top = values(values.size() - 1);
  Index keep = 0;
  while (keep < values.size() && values(values.size() - 1 - keep) > kDroppedSpectrum * top) ++keep;
  if (keep == 0) throw NumericalError("sampler: anchor Gram matrix has no usable spectrum");
  eigvals_ = values.tail(keep).reverse();
  eigvecs_ = eig.eigenvectors().rightCols(keep).rowwise().reverse();
  basis_ = eigvecs_ * eigvals_.cwiseSqrt().cwiseInverse().asDiagonal();
  const MatrixXd cross = cross_covariance(kernel_, domain_.grid_points(), *anchors_);
  grid_basis_ = cross * basis_;
}

GpPriorSampler::Draw GpPriorSampler::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd z(rank());
  for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  Draw d;
  d.coefficients = basis_ * z;
  d.grid_values = grid_basis_ * z;
  d.rkhs_norm = z.norm();
  return d;
}

double GpPriorSampler::evaluate(const VectorXd& coefficients, const VectorXd& x) const {
  return kernel_column(kernel_, x, *anchors_).dot(coefficients);
}

double GpPriorSampler::projected_norm(const VectorXd& anchor_values) const {
  if (anchor_values.size() != anchors_->rows()) throw InputError("projected_norm: one value per anchor expected");
  const VectorXd z = eigvals_.cwiseSqrt().cwiseInverse().asDiagonal() * (eigvecs_.transpose() * anchor_values);
  return z.norm();
}

namespace {

struct DrawnFunctions {
  std::vector<GpPriorSampler::Draw> draws;  // objective first
};

DrawnFunctions draw_functions(std::uint64_t seed, const GpPriorSampler& sampler, int n_constraints) {
  if (n_constraints < 1) throw InputError("problem needs at least one constraint");
  std::mt19937_64 rng(mix_seed(seed, 0x70726f62ULL));
  DrawnFunctions out;
  for (int i = 0; i <= n_constraints; ++i) out.draws.push_back(sampler.draw(rng));
  return out;
}

Oracle expansion_oracle(const KernelSpec<double>& kernel, std::shared_ptr<const MatrixXd> anchors,
                        VectorXd coefficients, double offset = 0.0) {
  return [kernel, anchors = std::move(anchors), c = std::move(coefficients), offset](const VectorXd& x) {
    return kernel_column(kernel, x, *anchors).dot(c) + offset;
  };
}

ConstrainedProblem assemble(const std::string& name, const GpPriorSampler& sampler, const DrawnFunctions& fns,
                            double noise_std, const std::vector<double>& offsets) {
  ConstrainedProblem p;
  p.name = name;
  p.domain = sampler.domain();
  p.noise_std = noise_std;
  p.kernel = sampler.kernel();
  const int n = static_cast<int>(fns.draws.size()) - 1;
  p.objective = expansion_oracle(sampler.kernel(), sampler.shared_anchors(), fns.draws[0].coefficients, offsets[0]);
  for (int i = 1; i <= n; ++i) {
    p.constraints.push_back(expansion_oracle(sampler.kernel(), sampler.shared_anchors(), fns.draws[static_cast<std::size_t>(i)].coefficients,
                                             offsets[static_cast<std::size_t>(i)]));
  }
  ProblemTruth truth;
  truth.grid_values.resize(sampler.domain().grid_size(), n + 1);
  for (int i = 0; i <= n; ++i) {
    truth.grid_values.col(i) = fns.draws[static_cast<std::size_t>(i)].grid_values.array() + offsets[static_cast<std::size_t>(i)];
  }
  const MatrixXd grid = sampler.domain().grid_points();
  truth.feasible_mask.assign(static_cast<std::size_t>(grid.rows()), true);
  for (Index g = 0; g < grid.rows(); ++g) {
    for (int i = 1; i <= n; ++i) {
      if (!(truth.grid_values(g, i) <= 0.0)) truth.feasible_mask[static_cast<std::size_t>(g)] = false;
    }
    if (truth.feasible_mask[static_cast<std::size_t>(g)] &&
        (!truth.optimum || truth.grid_values(g, 0) < truth.optimum->f_star)) {
      truth.optimum = Optimum{truth.grid_values(g, 0), grid.row(g).transpose(), g};
    }
  }
  p.truth = std::move(truth);
  for (int i = 0; i <= n; ++i) {
    const auto& d = fns.draws[static_cast<std::size_t>(i)];
    if (offsets[static_cast<std::size_t>(i)] == 0.0) {
      p.rkhs_norms.push_back(d.rkhs_norm);
    } else {
      // Norm of the anchor interpolant of the shifted function.
      VectorXd at_anchors(sampler.anchors().rows());
      for (Index a = 0; a < at_anchors.size(); ++a) {
        at_anchors(a) = sampler.evaluate(d.coefficients, sampler.anchors().row(a).transpose()) +
                        offsets[static_cast<std::size_t>(i)];
      }
      p.rkhs_norms.push_back(sampler.projected_norm(at_anchors));
    }
  }
  return p;
}

}  // namespace

std::optional<ConstrainedProblem> sample_gp_problem(std::uint64_t seed, const GpPriorSampler& sampler,
                                                    int n_constraints, double noise_std) {
  const DrawnFunctions fns = draw_functions(seed, sampler, n_constraints);
  ConstrainedProblem p = assemble("gp-sample", sampler, fns, noise_std,
                                  std::vector<double>(static_cast<std::size_t>(n_constraints) + 1, 0.0));
  if (!p.truth->feasible()) return std::nullopt;
  return p;
}

std::optional<ConstrainedProblem> sample_gp_problem(std::uint64_t seed, const KernelSpec<double>& kernel,
                                                    const DomainBox& domain, int n_constraints, double noise_std) {
  return sample_gp_problem(seed, GpPriorSampler(kernel, domain), n_constraints, noise_std);
}

ConstrainedProblem make_infeasible_problem(std::uint64_t seed, const GpPriorSampler& sampler, double epsilon,
                                           int n_constraints, double noise_std) {
  if (!(epsilon > 0.0)) throw InputError("make_infeasible_problem: epsilon must be positive");
  const DrawnFunctions fns = draw_functions(seed, sampler, n_constraints);
  std::vector<double> offsets(static_cast<std::size_t>(n_constraints) + 1, 0.0);
  offsets[1] = epsilon - fns.draws[1].grid_values.minCoeff();
  ConstrainedProblem p = assemble("infeasible-gp", sampler, fns, noise_std, offsets);
  // (v - m) + eps hits eps exactly at the minimizer; (v + (eps - m)) may not.
  const double lowest = fns.draws[1].grid_values.minCoeff();
  p.truth->grid_values.col(1) = (fns.draws[1].grid_values.array() - lowest) + epsilon;
  return p;
}

ConstrainedProblem make_infeasible_problem(std::uint64_t seed, const KernelSpec<double>& kernel,
                                           const DomainBox& domain, double epsilon, int n_constraints,
                                           double noise_std) {
  return make_infeasible_problem(seed, GpPriorSampler(kernel, domain), epsilon, n_constraints, noise_std);
}

std::vector<std::string> analytic_problem_names() {
  return {"quad-sine-2d", "always-feasible-1d", "boundary-active-1d"};
}

ConstrainedProblem analytic_problem(const std::string& name, double noise_std, int grid_per_dim) {
  constexpr double pi = std::numbers::pi;
  ConstrainedProblem p;
  p.name = "analytic:" + name;
  p.noise_std = noise_std;
  if (name == "quad-sine-2d") {
    p.domain = DomainBox::unit_cube(2, grid_per_dim);
    p.objective = [](const VectorXd& x) {
      return (x(0) - 0.75) * (x(0) - 0.75) + (x(1) - 0.7) * (x(1) - 0.7);
    };
    p.constraints.push_back([pi](const VectorXd& x) { return x(1) - 0.45 - 0.15 * std::sin(2.0 * pi * x(0)); });
  } else if (name == "always-feasible-1d") {
    p.domain = DomainBox::unit_cube(1, grid_per_dim > 0 ? grid_per_dim : 101);
    p.objective = [](const VectorXd& x) { return std::sin(6.0 * x(0)) + (x(0) - 0.3) * (x(0) - 0.3); };
    p.constraints.push_back([](const VectorXd&) { return -1.0; });
  } else if (name == "boundary-active-1d") {
    p.domain = DomainBox::unit_cube(1, grid_per_dim > 0 ? grid_per_dim : 101);
    p.objective = [](const VectorXd& x) { return (x(0) - 0.8) * (x(0) - 0.8); };
    p.constraints.push_back([](const VectorXd& x) { return x(0) - 0.5; });
  } else {
    throw InputError("unknown analytic problem '" + name + "'");
  }
  p.truth = compute_truth(p);
  return p;
}

}  // namespace confego
