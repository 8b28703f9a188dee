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

#ifndef CONFEGO_ACQUISITION_HPP_
#define CONFEGO_ACQUISITION_HPP_

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "confego/common.hpp"
#include "confego/domain.hpp"

namespace confego {

using LcbFunction = std::function<double(const VectorXd&)>;

struct AuxiliaryPoint {
  VectorXd x;
  double lcb_value = 0.0;
  std::optional<Index> grid_index;  // empty when local refinement moved off the grid
};

/// Some constraint LCB is positive everywhere on the search set.
/// `constraint_index` is 1-based (constraint g_i), `min_lcb` > 0.
struct InfeasibleDeclared {
  int constraint_index = 0;
  double min_lcb = 0.0;
};

struct AuxiliaryResult {
  std::variant<AuxiliaryPoint, InfeasibleDeclared> outcome;

  bool declared() const { return std::holds_alternative<InfeasibleDeclared>(outcome); }
  const AuxiliaryPoint& point() const { return std::get<AuxiliaryPoint>(outcome); }
  const InfeasibleDeclared& declaration() const { return std::get<InfeasibleDeclared>(outcome); }
};

struct AcquisitionOptions {
  bool refine = false;
  int refine_starts = 5;
  int refine_evaluations = 400;  // per start
};

/// LCB values of all functions evaluated at the grid points of a domain.
struct GridLcbs {
  VectorXd objective;
  std::vector<VectorXd> constraints;
};

/// First constraint (1-based) whose grid minimum is strictly positive.
std::optional<InfeasibleDeclared> check_lcb_feasibility(const std::vector<VectorXd>& constraint_lcbs);
std::optional<InfeasibleDeclared> check_lcb_feasibility(const std::vector<LcbFunction>& constraint_lcbs,
                                                        const DomainBox& domain);

/// Minimize the objective LCB subject to every constraint LCB <= 0.
///
/// Grid search over `grid` (the rows are the grid points of `domain`, in
/// order). Ties go to the lowest grid index. When `options.refine` is set and
/// evaluators are supplied, the five best feasible grid points seed a
/// projected coordinate search; a refined point replaces the grid optimum
/// only if it stays LCB-feasible and lowers the objective LCB.
///
/// If no single constraint is positive everywhere but the constraints have
/// no common LCB-feasible point, the declaration names the constraint that
/// is largest at the minimizer of max_i l_i and reports that min-max value.
AuxiliaryResult solve_auxiliary(const GridLcbs& lcbs, const MatrixXd& grid, const DomainBox& domain,
                                const AcquisitionOptions& options = {}, const LcbFunction* objective = nullptr,
                                const std::vector<LcbFunction>* constraints = nullptr);

/// Function-valued form: evaluates every LCB on the domain grid first.
AuxiliaryResult solve_auxiliary(const LcbFunction& objective_lcb, const std::vector<LcbFunction>& constraint_lcbs,
                                const DomainBox& domain, const AcquisitionOptions& options = {});

}  // namespace confego

#endif  // CONFEGO_ACQUISITION_HPP_
