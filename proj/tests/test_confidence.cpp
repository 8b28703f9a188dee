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
#include <string>
#include <vector>

#include "confego/confidence.hpp"
#include "confego/domain.hpp"

using namespace confego;

namespace {

double subset_gain(const KernelSpec<double>& k, const MatrixXd& grid, const std::vector<Index>& subset, double lambda) {
  MatrixXd X(static_cast<Index>(subset.size()), grid.cols());
  for (std::size_t i = 0; i < subset.size(); ++i) X.row(static_cast<Index>(i)) = grid.row(subset[i]);
  const MatrixXd M = MatrixXd::Identity(X.rows(), X.rows()) + gram_matrix(k, X) / lambda;
  return 0.5 * std::log(M.fullPivLu().determinant());
}

// Exhaustive max over all size-t subsets (with repetition excluded).
double brute_force_gamma(const KernelSpec<double>& k, const MatrixXd& grid, Index t, double lambda) {
  const Index n = grid.rows();
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != t) continue;
    std::vector<Index> subset;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) subset.push_back(i);
    }
    best = std::max(best, subset_gain(k, grid, subset, lambda));
  }
  return best;
}

ConfidenceConfig config(double B, double sigma) {
  ConfidenceConfig c;
  c.rkhs_bounds = {B, B};
  c.noise_sigma = sigma;
  c.delta = 0.05;
  c.num_constraints = 1;
  c.beta_mode = BetaMode::Theory;
  return c;
}

}  // namespace

TEST_CASE("beta schedule") {
  const ConfidenceConfig noiseless = config(2.0, 0.0);
  for (int t : {1, 5, 50}) CHECK(beta_sqrt(noiseless, 0, t, 3.0 * t) == 2.0);

  const ConfidenceConfig c = config(2.0, 0.1);
  CHECK(beta_sqrt(c, 1, 1, 0.0) == doctest::Approx(2.0 + 0.1 * std::sqrt(2.0 * (1.0 + std::log(2.0 / 0.05)))));

  double previous = 0.0;
  for (int t = 1; t <= 30; ++t) {
    const double b = beta_sqrt(c, 0, t, std::log1p(t));
    CHECK(b >= previous);
    previous = b;
  }

  ConfidenceConfig fixed = c;
  fixed.beta_mode = BetaMode::Fixed;
  fixed.beta_fixed = 2.0;
  CHECK(beta_sqrt(fixed, 0, 7, 100.0) == 2.0);

  ConfidenceConfig greedy = c;
  greedy.beta_mode = BetaMode::GreedyGamma;
  CHECK(beta_sqrt(greedy, 0, 3, 4.0) == beta_sqrt(c, 0, 3, 4.0));
}

TEST_CASE("confidence config validation") {
  ConfidenceConfig c = config(2.0, 0.1);
  CHECK_NOTHROW(c.validate());
  c.rkhs_bounds = {2.0, 0.0};
  CHECK_THROWS_AS(c.validate(), InputError);
  c = config(2.0, 0.1);
  c.rkhs_bounds = {2.0};
  CHECK_THROWS_AS(c.validate(), InputError);
  c = config(2.0, 0.1);
  c.delta = 1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = config(2.0, -0.1);
  CHECK_THROWS_AS(c.validate(), InputError);
  CHECK(parse_beta_mode("theory") == BetaMode::Theory);
  CHECK(parse_beta_mode("greedy-gamma") == BetaMode::GreedyGamma);
  CHECK(parse_beta_mode("fixed") == BetaMode::Fixed);
  CHECK_THROWS_AS(parse_beta_mode("bogus"), InputError);
  CHECK(parse_beta_mode(to_string(BetaMode::GreedyGamma)) == BetaMode::GreedyGamma);
}

TEST_CASE("greedy information gain, small cases") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  const MatrixXd grid = DomainBox::unit_cube(2, 5).grid_points();
  CHECK(estimate_gamma(k, grid, 1, 0.01) == doctest::Approx(0.5 * std::log1p(2.0 / 0.01)));

  MatrixXd two(2, 2);
  two << 0.0, 0.0, 0.6, 0.2;
  CHECK(estimate_gamma(k, two, 2, 0.1) == doctest::Approx(brute_force_gamma(k, two, 2, 0.1)).epsilon(1e-12));
}

TEST_CASE("greedy is within the submodular ratio of the exhaustive optimum") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto k = KernelSpec<double>::matern(1.5, 1.0, 0.3, 2);
  MatrixXd grid(10, 2);
  for (Index i = 0; i < 10; ++i) grid.row(i) << u(rng), u(rng);
  for (Index t = 1; t <= 5; ++t) {
    const double greedy = estimate_gamma(k, grid, t, 0.05);
    const double exact = brute_force_gamma(k, grid, t, 0.05);
    CHECK(greedy <= exact + 1e-10);
    CHECK(greedy >= (1.0 - std::exp(-1.0)) * exact);
  }
}

TEST_CASE("greedy table structure") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  const MatrixXd grid = DomainBox::unit_cube(2, 12).grid_points();
  const auto table = greedy_gamma_table(k, grid, 40, 0.01);
  REQUIRE(table.values.size() == 41);
  CHECK(table.values[0] == 0.0);
  CHECK(table.picks.size() == 40);
  CHECK(table.picks[0] == 0);  // all variances tie at the prior; lowest index wins
  std::vector<Index> sorted = table.picks;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  for (std::size_t t = 1; t < table.values.size(); ++t) {
    CHECK(table.values[t] >= table.values[t - 1]);
    if (t >= 2) CHECK(table.values[t] - table.values[t - 1] <= table.values[t - 1] - table.values[t - 2] + 1e-12);
    // Gains of the picked set, recomputed from scratch.
    if (t % 10 == 0) {
      std::vector<Index> prefix(table.picks.begin(), table.picks.begin() + static_cast<std::ptrdiff_t>(t));
      CHECK(table.values[t] == doctest::Approx(subset_gain(k, grid, prefix, 0.01)).epsilon(1e-9));
    }
  }
  CHECK(table.at(7) == table.values[7]);
}

TEST_CASE("squared exponential gain grows polylogarithmically") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 1);
  const MatrixXd grid = DomainBox::unit_cube(1, 400).grid_points();
  const auto table = greedy_gamma_table(k, grid, 256, 0.01);
  // (log T)^{d+1} with d = 1: the ratio gamma / log^2 T should settle, not grow like T.
  std::vector<double> ratio;
  for (Index T : {16, 64, 256}) ratio.push_back(table.at(T) / std::pow(std::log(static_cast<double>(T)), 2.0));
  CHECK(ratio[2] <= ratio[1] * 1.5);
  CHECK(table.at(256) < 4.0 * table.at(64));
  CHECK(table.at(256) < 0.25 * 256 * table.at(1));
}

TEST_CASE("gamma beyond the grid size is capped with a warning") {
  const auto k = KernelSpec<double>::squared_exponential(1.0, 1.0, 1);
  const MatrixXd grid = DomainBox::unit_cube(1, 4).grid_points();
  std::vector<std::string> warnings;
  set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  const double capped = estimate_gamma(k, grid, 10, 0.1);
  set_warning_handler(nullptr);
  CHECK(capped == doctest::Approx(estimate_gamma(k, grid, 4, 0.1)));
  CHECK(warnings.size() == 1);
}

TEST_CASE("lcb and ucb") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  GpPosterior<double> prior(k, 0.01);
  const Eigen::Vector2d x(0.3, 0.3);
  CHECK(lcb(prior, 1.0, x) == doctest::Approx(-std::sqrt(2.0)));
  CHECK(ucb(prior, 1.0, x) == doctest::Approx(std::sqrt(2.0)));

  GpPosterior<double> gp = prior.update(Eigen::Vector2d(0.1, 0.2), 0.8).update(Eigen::Vector2d(0.7, 0.5), -0.2);
  CHECK(lcb(gp, 0.0, x) == gp.mean(x));
  CHECK(ucb(gp, 0.0, x) == gp.mean(x));
  const double beta = 2.7;
  CHECK(ucb(gp, beta, x) - lcb(gp, beta, x) == doctest::Approx(2.0 * beta * std::sqrt(gp.variance(x))));
  CHECK(lcb(gp, beta, x) <= ucb(gp, beta, x));

  auto grid = std::make_shared<const MatrixXd>(DomainBox::unit_cube(2, 7).grid_points());
  GridPosterior<double> on_grid(grid, k);
  on_grid.absorb(gp);
  const VectorXd lower = lcb(on_grid, beta);
  const VectorXd upper = ucb(on_grid, beta);
  for (Index g = 0; g < grid->rows(); ++g) {
    CHECK(lower(g) == doctest::Approx(lcb(gp, beta, grid->row(g))).epsilon(1e-10));
    CHECK(upper(g) == doctest::Approx(ucb(gp, beta, grid->row(g))).epsilon(1e-10));
  }
}
