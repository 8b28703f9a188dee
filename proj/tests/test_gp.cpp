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
#include <memory>
#include <random>

#include "confego/gp.hpp"

using namespace confego;

namespace {

MatrixXd uniform(std::mt19937_64& rng, Index n, Index d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd X(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) X(i, j) = u(rng);
  }
  return X;
}

VectorXd targets(std::mt19937_64& rng, const MatrixXd& X) {
  std::normal_distribution<double> n(0.0, 0.1);
  VectorXd y(X.rows());
  for (Index i = 0; i < X.rows(); ++i) y(i) = std::cos(3.0 * X(i, 0)) + X.row(i).sum() + n(rng);
  return y;
}

// Dense reference without factor reuse.
struct DenseGp {
  KernelSpec<double> k;
  MatrixXd X;
  MatrixXd inverse;
  VectorXd alpha;
  DenseGp(const KernelSpec<double>& kernel, const MatrixXd& inputs, const VectorXd& y, double lambda)
      : k(kernel), X(inputs) {
    MatrixXd S = gram_matrix(k, X);
    S.diagonal().array() += lambda;
    inverse = S.fullPivLu().inverse();
    alpha = inverse * y;
  }
  double mean(const VectorXd& x) const { return kernel_column(k, x, X).dot(alpha); }
  double var(const VectorXd& x) const {
    const VectorXd c = kernel_column(k, x, X);
    return eval_kernel(k, x, x) - c.dot(inverse * c);
  }
};

}  // namespace

TEST_CASE("prior posterior") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  GpPosterior<double> gp(k, 0.01);
  const Eigen::Vector2d x(0.4, 0.9);
  CHECK(gp.size() == 0);
  CHECK(posterior_mean(gp, x) == 0.0);
  CHECK(posterior_var(gp, x) == 2.0);
  CHECK(gp.info_gain() == 0.0);
}

TEST_CASE("one observation closed form") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  MatrixXd X(1, 2);
  X << 0.2, 0.3;
  VectorXd y(1);
  y << 1.7;
  const auto gp = fit(k, X, y, 0.01);
  const VectorXd x1 = X.row(0).transpose();
  CHECK(gp.mean(x1) == doctest::Approx(2.0 / 2.01 * 1.7).epsilon(1e-14));
  CHECK(gp.variance(x1) == doctest::Approx(0.01 * 2.0 / 2.01).epsilon(1e-12));
  CHECK(gp.variance(x1) < 2.0);
  CHECK(std::abs(gp.mean(Eigen::Vector2d(40.0, -30.0))) < 1e-6);
}

TEST_CASE("factorized posterior matches a dense solve") {
  std::mt19937_64 rng(1);
  for (Index d : {1, 2, 3}) {
    const auto k = KernelSpec<double>::matern(2.5, 1.5, 0.5, d);
    const MatrixXd X = uniform(rng, 20, d);
    const VectorXd y = targets(rng, X);
    const auto gp = fit(k, X, y, 0.05);
    const DenseGp dense(k, X, y, 0.05);
    const MatrixXd Q = uniform(rng, 30, d);
    for (Index q = 0; q < Q.rows(); ++q) {
      const VectorXd x = Q.row(q).transpose();
      CHECK(gp.mean(x) == doctest::Approx(dense.mean(x)).epsilon(1e-8));
      CHECK(gp.raw_variance(x) == doctest::Approx(dense.var(x)).epsilon(1e-8));
      CHECK(gp.variance(x) >= 0.0);
      CHECK(gp.variance(x) <= k.variance);
    }
  }
}

TEST_CASE("sequential updates equal a batch fit") {
  std::mt19937_64 rng(2);
  const auto k = KernelSpec<double>::squared_exponential(2.0, 0.7, 2);
  const MatrixXd X = uniform(rng, 10, 2);
  const VectorXd y = targets(rng, X);
  GpPosterior<double> seq(k, 0.01);
  for (Index i = 0; i < X.rows(); ++i) seq = update(seq, X.row(i), y(i));
  const auto batch = fit(k, X, y, 0.01);

  MatrixXd first = X.topRows(1);
  const auto base = GpPosterior<double>::fit(k, first, y.head(1), 0.01);
  const auto one = update(GpPosterior<double>(k, 0.01), X.row(0), y(0));
  CHECK(one.factor().isApprox(base.factor(), 1e-14));

  const MatrixXd grid = uniform(rng, 100, 2);
  for (Index g = 0; g < grid.rows(); ++g) {
    const VectorXd x = grid.row(g).transpose();
    CHECK(seq.mean(x) == doctest::Approx(batch.mean(x)).epsilon(1e-8));
    CHECK(seq.variance(x) == doctest::Approx(batch.variance(x)).epsilon(1e-8));
  }
}

TEST_CASE("running information gain equals the log determinant") {
  std::mt19937_64 rng(4);
  const auto k = KernelSpec<double>::matern(1.5, 2.0, 0.4, 2);
  const double lambda = 0.3;
  const MatrixXd X = uniform(rng, 15, 2);
  GpPosterior<double> gp(k, lambda);
  for (Index i = 0; i < X.rows(); ++i) gp.append(X.row(i), 0.0);
  const MatrixXd M = MatrixXd::Identity(15, 15) + gram_matrix(k, X) / lambda;
  const double logdet = std::log(M.fullPivLu().determinant());
  CHECK(gp.info_gain() == doctest::Approx(0.5 * logdet).epsilon(1e-10));
}

TEST_CASE("posterior variance never increases with more data") {
  std::mt19937_64 rng(6);
  const auto k = KernelSpec<double>::squared_exponential(1.0, 0.3, 2);
  const MatrixXd X = uniform(rng, 25, 2);
  const MatrixXd Q = uniform(rng, 40, 2);
  GpPosterior<double> gp(k, 0.01);
  VectorXd previous = VectorXd::Constant(Q.rows(), k.variance);
  for (Index i = 0; i < X.rows(); ++i) {
    gp.append(X.row(i), 0.5);
    for (Index q = 0; q < Q.rows(); ++q) {
      const double v = gp.variance(Q.row(q));
      CHECK(v <= previous(q) + 1e-12);
      previous(q) = v;
    }
  }
}

TEST_CASE("near-noiseless interpolation") {
  std::mt19937_64 rng(8);
  const auto k = KernelSpec<double>::matern(2.5, 1.0, 0.3, 1);
  const MatrixXd X = uniform(rng, 12, 1);
  VectorXd y(12);
  for (Index i = 0; i < 12; ++i) y(i) = std::sin(6.0 * X(i, 0));
  const auto gp = fit(k, X, y, 1e-8);
  for (Index i = 0; i < 12; ++i) CHECK(std::abs(gp.mean(X.row(i)) - y(i)) < 1e-4);
}

TEST_CASE("duplicate inputs stay factorizable") {
  const auto k = KernelSpec<double>::squared_exponential(2.0, 1.0, 1);
  GpPosterior<double> gp(k, 1e-12);
  VectorXd x(1);
  x << 0.5;
  for (int i = 0; i < 6; ++i) gp.append(x, 1.0 + 0.01 * i);
  CHECK(gp.size() == 6);
  CHECK(std::isfinite(gp.mean(x)));
  CHECK(gp.variance(x) >= 0.0);
}

TEST_CASE("fit validates its inputs") {
  const auto k = KernelSpec<double>::squared_exponential(1.0, 1.0, 2);
  CHECK_THROWS_AS(GpPosterior<double>(k, 0.0), InputError);
  CHECK_THROWS_AS(GpPosterior<double>::fit(k, MatrixXd::Zero(3, 2), VectorXd::Zero(2), 0.1), InputError);
  CHECK_THROWS_AS(GpPosterior<double>::fit(k, MatrixXd::Zero(3, 1), VectorXd::Zero(3), 0.1), InputError);
  GpPosterior<double> gp(k, 0.1);
  CHECK_THROWS_AS(gp.append(Eigen::Vector3d(0, 0, 0), 1.0), InputError);
}

TEST_CASE("grid posterior tracks the pointwise posterior") {
  std::mt19937_64 rng(9);
  const auto k = KernelSpec<double>::squared_exponential(2.0, 0.5, 2);
  auto grid = std::make_shared<const MatrixXd>(uniform(rng, 60, 2));
  GridPosterior<double> tracked(grid, k);
  GpPosterior<double> gp(k, 0.02);
  const MatrixXd X = uniform(rng, 12, 2);
  const VectorXd y = targets(rng, X);
  for (Index i = 0; i < X.rows(); ++i) {
    gp.append(X.row(i), y(i));
    tracked.absorb(gp);
  }
  GridPosterior<double> fresh(grid, k);
  fresh.absorb(fit(k, X, y, 0.02));
  for (Index g = 0; g < grid->rows(); ++g) {
    const VectorXd x = grid->row(g).transpose();
    CHECK(tracked.mean()(g) == doctest::Approx(gp.mean(x)).epsilon(1e-9));
    CHECK(tracked.variance_at(g) == doctest::Approx(gp.variance(x)).epsilon(1e-9));
    CHECK(fresh.mean()(g) == doctest::Approx(gp.mean(x)).epsilon(1e-9));
  }
}
