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

#ifndef CONFEGO_GP_HPP_
#define CONFEGO_GP_HPP_

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "confego/common.hpp"
#include "confego/kernels.hpp"

namespace confego {

/// Zero-mean GP posterior with Gaussian model noise `lambda`.
///
/// Keeps a lower Cholesky factor L of (K_t + lambda I) and the whitened
/// targets w = L^{-1} y, so that
///   mean(x)     = (L^{-1} k_t(x))' w
///   variance(x) = k(x, x) - |L^{-1} k_t(x)|^2.
/// Values are immutable; `update` returns a new posterior with the factor
/// extended by one bordered row.
template <typename Scalar = double>
class GpPosterior {
 public:
  GpPosterior(KernelSpec<Scalar> kernel, Scalar noise_lambda)
      : kernel_(std::move(kernel)), lambda_(noise_lambda), inputs_(0, kernel_.dimension) {
    kernel_.validate();
    if (!(noise_lambda > Scalar(0))) throw InputError("GP noise lambda must be positive");
  }

  static GpPosterior fit(const KernelSpec<Scalar>& kernel, const Matrix<Scalar>& inputs,
                         const Vector<Scalar>& observations, Scalar noise_lambda) {
    GpPosterior gp(kernel, noise_lambda);
    if (inputs.rows() != observations.size()) {
      throw InputError("GP fit: " + std::to_string(inputs.rows()) + " inputs but " +
                       std::to_string(observations.size()) + " observations");
    }
    if (inputs.rows() > 0 && inputs.cols() != kernel.dimension) {
      throw InputError("GP fit: input dimension does not match kernel dimension");
    }
    gp.inputs_ = inputs;
    gp.observations_ = observations;
    gp.refactor();
    return gp;
  }

  const KernelSpec<Scalar>& kernel() const { return kernel_; }
  Scalar noise_lambda() const { return lambda_; }
  Index size() const { return observations_.size(); }
  const Matrix<Scalar>& inputs() const { return inputs_; }
  const Vector<Scalar>& observations() const { return observations_; }
  const Matrix<Scalar>& factor() const { return factor_; }
  const Vector<Scalar>& whitened_targets() const { return whitened_; }
  // 1/2 log det(I + K_t / lambda) accumulated over the observed points.
  Scalar info_gain() const { return info_gain_; }
  // Absolute jitter currently on the diagonal of the factored matrix.
  Scalar applied_jitter() const { return jitter_; }
  // Bumped whenever the factor is rebuilt from scratch rather than extended.
  int factor_epoch() const { return epoch_; }

  /// L^{-1} k_t(x); the building block of both moments.
  template <typename Derived>
  Vector<Scalar> whitened_cross(const Eigen::MatrixBase<Derived>& x) const {
    Vector<Scalar> k = kernel_column(kernel_, x, inputs_);
    if (size() > 0) factor_.template triangularView<Eigen::Lower>().solveInPlace(k);
    return k;
  }

  template <typename Derived>
  Scalar mean(const Eigen::MatrixBase<Derived>& x) const {
    if (size() == 0) return Scalar(0);
    return whitened_cross(x).dot(whitened_);
  }

  /// Posterior variance before clamping; may dip slightly below zero.
  template <typename Derived>
  Scalar raw_variance(const Eigen::MatrixBase<Derived>& x) const {
    const Scalar prior = prior_variance(kernel_, x);
    if (size() == 0) return prior;
    return prior - whitened_cross(x).squaredNorm();
  }

  /// Posterior variance clamped to [0, k(x, x)].
  template <typename Derived>
  Scalar variance(const Eigen::MatrixBase<Derived>& x) const {
    return clamp_variance(raw_variance(x), prior_variance(kernel_, x));
  }

  template <typename Derived>
  GpPosterior update(const Eigen::MatrixBase<Derived>& x, Scalar y) const {
    if (x.size() != kernel_.dimension) throw InputError("GP update: point dimension mismatch");
    GpPosterior next = *this;
    next.append(x, y);
    return next;
  }

  /// In-place variant of `update`, for the single writer of a run loop.
  template <typename Derived>
  void append(const Eigen::MatrixBase<Derived>& x, Scalar y) {
    if (x.size() != kernel_.dimension) throw InputError("GP update: point dimension mismatch");
    const Index t = size();
    const Vector<Scalar> cross = whitened_cross(x);
    const Scalar prior = prior_variance(kernel_, x);
    const Scalar pivot_sq = prior + lambda_ + jitter_ - cross.squaredNorm();

    inputs_.conservativeResize(t + 1, Eigen::NoChange);
    inputs_.row(t) = x.reshaped().transpose();
    observations_.conservativeResize(t + 1);
    observations_(t) = y;

    if (!(pivot_sq > Scalar(0))) {
      refactor();
      return;
    }
    const Scalar pivot = std::sqrt(pivot_sq);
    factor_.conservativeResize(t + 1, t + 1);
    factor_.row(t).head(t) = cross.transpose();
    factor_.col(t).head(t).setZero();
    factor_(t, t) = pivot;
    whitened_.conservativeResize(t + 1);
    whitened_(t) = (y - (t > 0 ? cross.dot(whitened_.head(t)) : Scalar(0))) / pivot;
    info_gain_ += gain_increment(pivot_sq);
  }

 private:
  static Scalar clamp_variance(Scalar raw, Scalar prior) {
    if (raw < Scalar(-1e-6) * (prior > Scalar(0) ? prior : Scalar(1))) {
      std::ostringstream msg;
      msg << "posterior variance " << raw << " clamped to zero";
      warn(msg.str());
    }
    if (raw < Scalar(0)) return Scalar(0);
    if (raw > prior) return prior;
    return raw;
  }

  Scalar gain_increment(Scalar pivot_sq) const {
    Scalar sigma_sq = pivot_sq - lambda_ - jitter_;
    if (sigma_sq < Scalar(0)) sigma_sq = Scalar(0);
    return Scalar(0.5) * std::log1p(sigma_sq / lambda_);
  }

  // Full factorization of K + (lambda + jitter) I with escalating jitter.
  void refactor() {
    ++epoch_;
    const Index t = size();
    if (t == 0) {
      factor_.resize(0, 0);
      whitened_.resize(0);
      info_gain_ = Scalar(0);
      return;
    }
    const Matrix<Scalar> gram = gram_matrix(kernel_, inputs_);
    const Scalar base = kernel_.variance;
    const Scalar ladder[] = {Scalar(0), Scalar(1e-10), Scalar(1e-9), Scalar(1e-8), Scalar(1e-7), Scalar(1e-6)};
    for (Scalar rel : ladder) {
      const Scalar jitter = rel == Scalar(0) ? Scalar(0) : rel * base;
      Matrix<Scalar> system = gram;
      system.diagonal().array() += lambda_ + jitter;
      Eigen::LLT<Matrix<Scalar>> llt(system);
      if (llt.info() != Eigen::Success) continue;
      Matrix<Scalar> lower = llt.matrixL();
      if (!(lower.diagonal().array() > Scalar(0)).all()) continue;
      factor_ = std::move(lower);
      jitter_ = jitter;
      whitened_ = factor_.template triangularView<Eigen::Lower>().solve(observations_);
      info_gain_ = Scalar(0);
      for (Index j = 0; j < t; ++j) info_gain_ += gain_increment(factor_(j, j) * factor_(j, j));
      return;
    }
    std::ostringstream msg;
    msg << "GP factorization failed for " << t << " points (lambda " << lambda_
        << ", min diagonal of K " << gram.diagonal().minCoeff() << ") after jitter up to 1e-6 * variance";
    throw NumericalError(msg.str());
  }

  KernelSpec<Scalar> kernel_;
  Scalar lambda_;
  Matrix<Scalar> inputs_;
  Vector<Scalar> observations_;
  Matrix<Scalar> factor_;
  Vector<Scalar> whitened_;
  Scalar info_gain_ = Scalar(0);
  Scalar jitter_ = Scalar(0);
  int epoch_ = 0;
};

template <typename Scalar>
GpPosterior<Scalar> fit(const KernelSpec<Scalar>& kernel, const Matrix<Scalar>& inputs,
                        const Vector<Scalar>& observations, Scalar noise_lambda) {
  return GpPosterior<Scalar>::fit(kernel, inputs, observations, noise_lambda);
}

template <typename Scalar, typename Derived>
Scalar posterior_mean(const GpPosterior<Scalar>& gp, const Eigen::MatrixBase<Derived>& x) {
  return gp.mean(x);
}

template <typename Scalar, typename Derived>
Scalar posterior_var(const GpPosterior<Scalar>& gp, const Eigen::MatrixBase<Derived>& x) {
  return gp.variance(x);
}

template <typename Scalar, typename Derived>
GpPosterior<Scalar> update(const GpPosterior<Scalar>& gp, const Eigen::MatrixBase<Derived>& x, Scalar y) {
  return gp.update(x, y);
}

/// Posterior moments of one GpPosterior restricted to a fixed point set.
///
/// Each absorbed observation costs O(t * |grid|): the new row of
/// L^{-1} K(X, grid) follows from the bordered factor row.
template <typename Scalar = double>
class GridPosterior {
 public:
  GridPosterior(std::shared_ptr<const Matrix<Scalar>> grid, const KernelSpec<Scalar>& kernel)
      : grid_(std::move(grid)), kernel_(kernel) {
    if (!grid_) throw InputError("GridPosterior needs a grid");
    if (grid_->cols() != kernel.dimension) throw InputError("GridPosterior: grid dimension mismatch");
    prior_.resize(grid_->rows());
    for (Index g = 0; g < grid_->rows(); ++g) prior_(g) = prior_variance(kernel_, grid_->row(g));
    reset();
  }

  const Matrix<Scalar>& grid() const { return *grid_; }
  Index synced() const { return static_cast<Index>(rows_.size()); }
  const Vector<Scalar>& mean() const { return mean_; }
  const Vector<Scalar>& raw_variance() const { return raw_var_; }

  Vector<Scalar> variance() const { return raw_var_.cwiseMax(Scalar(0)).cwiseMin(prior_); }
  Vector<Scalar> stddev() const { return variance().cwiseSqrt(); }
  Scalar variance_at(Index g) const {
    const Scalar v = raw_var_(g) < Scalar(0) ? Scalar(0) : raw_var_(g);
    return v > prior_(g) ? prior_(g) : v;
  }

  /// Bring the cached moments up to date with `gp`, which must extend the
  /// observations already absorbed.
  void absorb(const GpPosterior<Scalar>& gp) {
    if (gp.factor_epoch() != epoch_ || gp.size() < synced()) rebuild(gp);
    const Matrix<Scalar>& lower = gp.factor();
    for (Index t = synced(); t < gp.size(); ++t) {
      Vector<Scalar> row = kernel_column(kernel_, gp.inputs().row(t), *grid_);
      for (Index j = 0; j < t; ++j) row.noalias() -= lower(t, j) * rows_[j];
      row /= lower(t, t);
      mean_.noalias() += gp.whitened_targets()(t) * row;
      raw_var_.array() -= row.array().square();
      rows_.push_back(std::move(row));
    }
  }

 private:
  void reset() {
    rows_.clear();
    mean_ = Vector<Scalar>::Zero(grid_->rows());
    raw_var_ = prior_;
  }

  void rebuild(const GpPosterior<Scalar>& gp) {
    reset();
    epoch_ = gp.factor_epoch();
    const Index t = gp.size();
    if (t == 0) return;
    Matrix<Scalar> cross = cross_covariance(kernel_, gp.inputs(), *grid_);
    gp.factor().template triangularView<Eigen::Lower>().solveInPlace(cross);
    for (Index j = 0; j < t; ++j) {
      rows_.push_back(cross.row(j).transpose());
      mean_.noalias() += gp.whitened_targets()(j) * rows_.back();
      raw_var_.array() -= rows_.back().array().square();
    }
  }

  std::shared_ptr<const Matrix<Scalar>> grid_;
  KernelSpec<Scalar> kernel_;
  Vector<Scalar> prior_;
  std::vector<Vector<Scalar>> rows_;
  Vector<Scalar> mean_;
  Vector<Scalar> raw_var_;
  int epoch_ = -1;
};

}  // namespace confego

#endif  // CONFEGO_GP_HPP_
