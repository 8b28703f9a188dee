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

#ifndef CONFEGO_KERNELS_HPP_
#define CONFEGO_KERNELS_HPP_

#include <cmath>
#include <string>

#include "confego/common.hpp"

namespace confego {

enum class KernelFamily { Linear, SquaredExponential, Matern };

/// Isotropic covariance function.
///
/// Squared exponential follows  variance * exp(-|x - y|^2 / lengthscale^2)
/// (no factor 1/2 in the exponent). Matern uses the scaled distance
/// sqrt(2 nu) |x - y| / lengthscale and is available in closed form for
/// nu in {1/2, 3/2, 5/2}. Linear is variance * <x, y>.
template <typename Scalar = double>
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  Scalar variance = Scalar(1);
  Scalar lengthscale = Scalar(1);
  Scalar nu = Scalar(2.5);
  Index dimension = 1;
  // Diagonal jitter used when a Gram factorization needs stabilizing,
  // relative to `variance`.
  Scalar jitter = Scalar(1e-10);

  static KernelSpec squared_exponential(Scalar variance, Scalar lengthscale, Index dimension) {
    KernelSpec k;
    k.family = KernelFamily::SquaredExponential;
    k.variance = variance;
    k.lengthscale = lengthscale;
    k.dimension = dimension;
    k.validate();
    return k;
  }

  static KernelSpec matern(Scalar nu, Scalar variance, Scalar lengthscale, Index dimension) {
    KernelSpec k;
    k.family = KernelFamily::Matern;
    k.nu = nu;
    k.variance = variance;
    k.lengthscale = lengthscale;
    k.dimension = dimension;
    k.validate();
    return k;
  }

  static KernelSpec linear(Scalar variance, Index dimension) {
    KernelSpec k;
    k.family = KernelFamily::Linear;
    k.variance = variance;
    k.dimension = dimension;
    k.validate();
    return k;
  }

  void validate() const {
    if (!(variance > Scalar(0))) throw InputError("kernel variance must be positive");
    if (!(lengthscale > Scalar(0))) throw InputError("kernel lengthscale must be positive");
    if (dimension < 1) throw InputError("kernel dimension must be at least 1");
    if (!(jitter >= Scalar(0))) throw InputError("kernel jitter must be nonnegative");
    if (family == KernelFamily::Matern) {
      if (!(nu > Scalar(0))) throw InputError("Matern smoothness must be positive");
      if (nu != Scalar(0.5) && nu != Scalar(1.5) && nu != Scalar(2.5)) {
        throw InputError("Matern smoothness must be one of 0.5, 1.5, 2.5");
      }
    }
  }

  // True when k(x, x) == variance for every x.
  bool stationary() const { return family != KernelFamily::Linear; }
};

inline std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear: return "linear";
    case KernelFamily::SquaredExponential: return "se";
    case KernelFamily::Matern: return "matern";
  }
  return "?";
}

namespace detail {

// Stationary profile as a function of the unscaled distance.
template <typename Scalar>
Scalar stationary_profile(const KernelSpec<Scalar>& spec, Scalar squared_distance) {
  using std::exp;
  using std::sqrt;
  const Scalar ls = spec.lengthscale;
  if (spec.family == KernelFamily::SquaredExponential) {
    return spec.variance * exp(-squared_distance / (ls * ls));
  }
  const Scalar r = sqrt(squared_distance) / ls;
  if (spec.nu == Scalar(0.5)) {
    return spec.variance * exp(-r);
  }
  if (spec.nu == Scalar(1.5)) {
    const Scalar s = sqrt(Scalar(3)) * r;
    return spec.variance * (Scalar(1) + s) * exp(-s);
  }
  const Scalar s = sqrt(Scalar(5)) * r;
  return spec.variance * (Scalar(1) + s + s * s / Scalar(3)) * exp(-s);
}

}  // namespace detail

template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar eval_kernel(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedX>& x,
                   const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != spec.dimension || y.size() != spec.dimension) {
    throw InputError("kernel input dimension mismatch: expected " + std::to_string(spec.dimension) +
                     ", got " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (spec.family == KernelFamily::Linear) {
    return spec.variance * x.reshaped().dot(y.reshaped());
  }
  return detail::stationary_profile(spec, (x.reshaped() - y.reshaped()).squaredNorm());
}

/// k(x, x); equals `variance` for stationary families.
template <typename Scalar, typename DerivedX>
Scalar prior_variance(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedX>& x) {
  if (spec.stationary()) return spec.variance;
  return eval_kernel(spec, x, x);
}

/// Cross-covariance between the rows of `a` and the rows of `b`.
template <typename Scalar, typename DerivedA, typename DerivedB>
Matrix<Scalar> cross_covariance(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& b) {
  Matrix<Scalar> out(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out(i, j) = eval_kernel(spec, a.row(i), b.row(j));
    }
  }
  return out;
}

/// Symmetric Gram matrix over the rows of `points`.
template <typename Scalar, typename Derived>
Matrix<Scalar> gram_matrix(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<Derived>& points) {
  const Index n = points.rows();
  Matrix<Scalar> gram(n, n);
  for (Index j = 0; j < n; ++j) {
    gram(j, j) = eval_kernel(spec, points.row(j), points.row(j));
    for (Index i = j + 1; i < n; ++i) {
      const Scalar v = eval_kernel(spec, points.row(i), points.row(j));
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

/// Kernel between one point and every row of `points`.
template <typename Scalar, typename DerivedX, typename DerivedP>
Vector<Scalar> kernel_column(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedX>& x,
                             const Eigen::MatrixBase<DerivedP>& points) {
  Vector<Scalar> out(points.rows());
  for (Index i = 0; i < points.rows(); ++i) out(i) = eval_kernel(spec, points.row(i), x);
  return out;
}

}  // namespace confego

#endif  // CONFEGO_KERNELS_HPP_
