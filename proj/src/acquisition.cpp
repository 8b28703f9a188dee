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

#include "confego/acquisition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace confego {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lcb_feasible(const std::vector<LcbFunction>& constraints, const VectorXd& x) {
  for (const auto& c : constraints) {
    if (!(c(x) <= 0.0)) return false;
  }
  return true;
}

// Projected coordinate search from one start; returns (point, objective LCB).
std::pair<VectorXd, double> coordinate_search(const LcbFunction& objective, const std::vector<LcbFunction>& constraints,
                                              const DomainBox& domain, VectorXd x, int budget) {
  double value = objective(x);
  VectorXd step(domain.dimension());
  for (Index a = 0; a < domain.dimension(); ++a) step(a) = domain.spacing(a);
  const VectorXd min_step = step * 1e-3;
  int evaluations = 0;
  while (evaluations < budget && (step.array() > min_step.array()).any()) {
    bool improved = false;
    for (Index a = 0; a < domain.dimension() && evaluations < budget; ++a) {
      for (double sign : {-1.0, 1.0}) {
        VectorXd trial = x;
        trial(a) += sign * step(a);
        trial = domain.project(trial);
        if (trial == x) continue;
        ++evaluations;
        if (!lcb_feasible(constraints, trial)) continue;
        const double v = objective(trial);
        if (v < value) {
          value = v;
          x = trial;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {x, value};
}

}  // namespace

std::optional<InfeasibleDeclared> check_lcb_feasibility(const std::vector<VectorXd>& constraint_lcbs) {
  for (std::size_t i = 0; i < constraint_lcbs.size(); ++i) {
    const VectorXd& values = constraint_lcbs[i];
    if (values.size() == 0) continue;
    const double lowest = values.minCoeff();
    if (lowest > 0.0) return InfeasibleDeclared{static_cast<int>(i) + 1, lowest};
  }
  return std::nullopt;
}

std::optional<InfeasibleDeclared> check_lcb_feasibility(const std::vector<LcbFunction>& constraint_lcbs,
                                                        const DomainBox& domain) {
  const MatrixXd grid = domain.grid_points();
  std::vector<VectorXd> values;
  values.reserve(constraint_lcbs.size());
  for (const auto& c : constraint_lcbs) {
    VectorXd v(grid.rows());
    for (Index g = 0; g < grid.rows(); ++g) v(g) = c(grid.row(g).transpose());
    values.push_back(std::move(v));
  }
  return check_lcb_feasibility(values);
}

AuxiliaryResult solve_auxiliary(const GridLcbs& lcbs, const MatrixXd& grid, const DomainBox& domain,
                                const AcquisitionOptions& options, const LcbFunction* objective,
                                const std::vector<LcbFunction>* constraints) {
  const Index size = grid.rows();
  if (lcbs.objective.size() != size) throw InputError("solve_auxiliary: objective LCB size does not match grid");
  for (const auto& c : lcbs.constraints) {
    if (c.size() != size) throw InputError("solve_auxiliary: constraint LCB size does not match grid");
  }
  if (auto declared = check_lcb_feasibility(lcbs.constraints)) return {*declared};

  // Worst constraint LCB per grid point; feasible where <= 0.
  VectorXd worst = VectorXd::Constant(size, -kInf);
  for (const auto& c : lcbs.constraints) worst = worst.cwiseMax(c);

  Index best = -1;
  for (Index g = 0; g < size; ++g) {
    if (!(worst(g) <= 0.0)) continue;
    if (best < 0 || lcbs.objective(g) < lcbs.objective(best)) best = g;
  }
  if (best < 0) {
    Index argmin = 0;
    for (Index g = 1; g < size; ++g) {
      if (worst(g) < worst(argmin)) argmin = g;
    }
    int which = 1;
    for (std::size_t i = 0; i < lcbs.constraints.size(); ++i) {
      if (lcbs.constraints[i](argmin) == worst(argmin)) {
        which = static_cast<int>(i) + 1;
        break;
      }
    }
    return {InfeasibleDeclared{which, worst(argmin)}};
  }

  AuxiliaryPoint result{grid.row(best).transpose(), lcbs.objective(best), best};
  if (!options.refine || objective == nullptr || constraints == nullptr) return {result};

  std::vector<Index> feasible;
  for (Index g = 0; g < size; ++g) {
    if (worst(g) <= 0.0) feasible.push_back(g);
  }
  const auto starts = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.refine_starts, 0)), feasible.size());
  std::partial_sort(feasible.begin(), feasible.begin() + static_cast<std::ptrdiff_t>(starts), feasible.end(),
                    [&](Index a, Index b) {
                      if (lcbs.objective(a) != lcbs.objective(b)) return lcbs.objective(a) < lcbs.objective(b);
                      return a < b;
                    });
  for (std::size_t s = 0; s < starts; ++s) {
    auto [x, value] =
        coordinate_search(*objective, *constraints, domain, grid.row(feasible[s]).transpose(), options.refine_evaluations);
    if (value < result.lcb_value && lcb_feasible(*constraints, x)) {
      result = AuxiliaryPoint{std::move(x), value, std::nullopt};
    }
  }
  return {result};
}

AuxiliaryResult solve_auxiliary(const LcbFunction& objective_lcb, const std::vector<LcbFunction>& constraint_lcbs,
                                const DomainBox& domain, const AcquisitionOptions& options) {
  const MatrixXd grid = domain.grid_points();
  GridLcbs lcbs;
  lcbs.objective.resize(grid.rows());
  for (Index g = 0; g < grid.rows(); ++g) lcbs.objective(g) = objective_lcb(grid.row(g).transpose());
  for (const auto& c : constraint_lcbs) {
    VectorXd v(grid.rows());
    for (Index g = 0; g < grid.rows(); ++g) v(g) = c(grid.row(g).transpose());
    lcbs.constraints.push_back(std::move(v));
  }
  return solve_auxiliary(lcbs, grid, domain, options, &objective_lcb, &constraint_lcbs);
}

}  // namespace confego
