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

#include <doctest.h>

#include <cmath>
#include <random>

#include "confego/acquisition.hpp"
#include "confego/confidence.hpp"

using namespace confego;

namespace {

DomainBox square(int n) { return DomainBox(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), n); }

}  // namespace

TEST_CASE("unconstrained quadratic") {
  const LcbFunction l0 = [](const VectorXd& x) { return x.squaredNorm(); };
  const std::vector<LcbFunction> cons{[](const VectorXd&) { return -1.0; }};
  const auto result = solve_auxiliary(l0, cons, square(100));
  REQUIRE_FALSE(result.declared());
  const double h = 2.0 / 99.0;
  CHECK(result.point().x.cwiseAbs().maxCoeff() <= h / 2 + 1e-12);
  CHECK(result.point().lcb_value == doctest::Approx(2 * (h / 2) * (h / 2)));

  AcquisitionOptions refine;
  refine.refine = true;
  const auto refined = solve_auxiliary(l0, cons, square(100), refine);
  CHECK(refined.point().lcb_value <= result.point().lcb_value);
  CHECK(refined.point().x.norm() < 1e-4);
}

TEST_CASE("constraint bounded away from zero is declared") {
  const LcbFunction l0 = [](const VectorXd& x) { return x.sum(); };
  const std::vector<LcbFunction> cons{[](const VectorXd& x) { return x.squaredNorm() + 0.5; }};
  const auto result = solve_auxiliary(l0, cons, square(100));
  REQUIRE(result.declared());
  CHECK(result.declaration().constraint_index == 1);
  CHECK(result.declaration().min_lcb == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(result.declaration().min_lcb > 0.0);
}

TEST_CASE("boundary-active optimum against a dense scan") {
  const DomainBox line(VectorXd::Zero(1), VectorXd::Ones(1), 100);
  const LcbFunction l0 = [](const VectorXd& x) { return x(0); };
  const std::vector<LcbFunction> cons{[](const VectorXd& x) { return 0.5 - x(0); }};
  double dense = 1.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = i / 9999.0;
    if (0.5 - x <= 0.0) dense = std::min(dense, x);
  }
  const auto result = solve_auxiliary(l0, cons, line);
  REQUIRE_FALSE(result.declared());
  CHECK(result.point().x(0) == doctest::Approx(50.0 / 99.0));  // first grid point past the boundary
  CHECK(std::abs(result.point().x(0) - dense) <= line.spacing(0));
  AcquisitionOptions refine;
  refine.refine = true;
  const auto refined = solve_auxiliary(l0, cons, line, refine);
  CHECK(std::abs(refined.point().x(0) - dense) < 1e-3);
  CHECK(0.5 - refined.point().x(0) <= 0.0);
}

TEST_CASE("feasibility check") {
  std::vector<VectorXd> ok{VectorXd::LinSpaced(5, -1.0, 1.0), VectorXd::LinSpaced(5, 0.0, 2.0)};
  CHECK_FALSE(check_lcb_feasibility(ok).has_value());
  std::vector<VectorXd> bad{VectorXd::LinSpaced(5, -1.0, 1.0), VectorXd::LinSpaced(5, 0.3, 2.0),
                            VectorXd::LinSpaced(5, 0.1, 2.0)};
  const auto d = check_lcb_feasibility(bad);
  REQUIRE(d.has_value());
  CHECK(d->constraint_index == 2);
  CHECK(d->min_lcb == doctest::Approx(0.3));

  // Prior-stage LCBs are -beta * sqrt(variance) < 0 everywhere.
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  GpPosterior<double> prior(k, 0.01);
  const std::vector<LcbFunction> prior_lcbs{[&](const VectorXd& x) { return lcb(prior, 1.5, x); },
                                            [&](const VectorXd& x) { return lcb(prior, 0.1, x); }};
  CHECK_FALSE(check_lcb_feasibility(prior_lcbs, DomainBox::unit_cube(2, 20)).has_value());
}

TEST_CASE("jointly infeasible constraints name the binding one") {
  GridLcbs lcbs;
  lcbs.objective = VectorXd::Zero(3);
  VectorXd a(3), b(3);
  a << -1.0, 0.2, 1.0;
  b << 1.0, 0.1, -1.0;
  lcbs.constraints = {a, b};
  const MatrixXd grid = MatrixXd::Zero(3, 1);
  const auto r = solve_auxiliary(lcbs, grid, DomainBox(VectorXd::Zero(1), VectorXd::Ones(1), 3));
  REQUIRE(r.declared());
  CHECK(r.declaration().constraint_index == 1);
  CHECK(r.declaration().min_lcb == doctest::Approx(0.2));
}

TEST_CASE("grid optimum dominates every LCB-feasible grid point") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  const DomainBox box = DomainBox::unit_cube(2, 15);
  const MatrixXd grid = box.grid_points();
  for (int trial = 0; trial < 20; ++trial) {
    GridLcbs lcbs;
    lcbs.objective = VectorXd::NullaryExpr(grid.rows(), [&] { return std::round(n(rng) * 4) / 4; });
    for (int c = 0; c < 2; ++c) lcbs.constraints.push_back(VectorXd::NullaryExpr(grid.rows(), [&] { return n(rng); }));
    const auto r = solve_auxiliary(lcbs, grid, box);
    const auto again = solve_auxiliary(lcbs, grid, box);
    if (r.declared()) continue;
    const Index picked = *r.point().grid_index;
    CHECK(*again.point().grid_index == picked);
    for (const auto& c : lcbs.constraints) CHECK(c(picked) <= 0.0);
    for (Index g = 0; g < grid.rows(); ++g) {
      if (lcbs.constraints[0](g) > 0.0 || lcbs.constraints[1](g) > 0.0) continue;
      CHECK(r.point().lcb_value <= lcbs.objective(g));
      if (lcbs.objective(g) == r.point().lcb_value) CHECK(picked <= g);  // lexicographic tie-break
    }
  }
}

TEST_CASE("refinement stays LCB-feasible and never worsens") {
  const DomainBox box = DomainBox::unit_cube(3, 6);
  const LcbFunction l0 = [](const VectorXd& x) { return std::sin(4 * x(0)) + std::cos(5 * x(1)) + x(2); };
  const std::vector<LcbFunction> cons{[](const VectorXd& x) { return 0.8 - x(0) - x(1); },
                                      [](const VectorXd& x) { return x(2) - 0.6; }};
  const auto plain = solve_auxiliary(l0, cons, box);
  AcquisitionOptions opt;
  opt.refine = true;
  const auto refined = solve_auxiliary(l0, cons, box, opt);
  REQUIRE_FALSE(refined.declared());
  CHECK(refined.point().lcb_value <= plain.point().lcb_value);
  for (const auto& c : cons) CHECK(c(refined.point().x) <= 0.0);
  CHECK(box.contains(refined.point().x));
}
