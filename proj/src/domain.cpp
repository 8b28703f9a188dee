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

#include "confego/domain.hpp"

#include <string>

namespace confego {

int default_grid_per_dim(Index dimension) {
  if (dimension <= 2) return 100;
  if (dimension == 3) return 30;
  return 10;
}

DomainBox::DomainBox(VectorXd lower_, VectorXd upper_, int grid_per_dim_)
    : lower(std::move(lower_)), upper(std::move(upper_)), grid_per_dim(grid_per_dim_) {
  validate();
}

DomainBox DomainBox::unit_cube(Index dimension, int grid_per_dim) {
  return DomainBox(VectorXd::Zero(dimension), VectorXd::Ones(dimension), grid_per_dim);
}

int DomainBox::points_per_dim() const {
  return grid_per_dim > 0 ? grid_per_dim : default_grid_per_dim(dimension());
}

Index DomainBox::grid_size() const {
  Index n = 1;
  for (Index a = 0; a < dimension(); ++a) n *= points_per_dim();
  return n;
}

double DomainBox::spacing(Index axis) const {
  const int n = points_per_dim();
  return n > 1 ? (upper(axis) - lower(axis)) / (n - 1) : upper(axis) - lower(axis);
}

void DomainBox::validate() const {
  if (lower.size() == 0) throw InputError("domain must have at least one dimension");
  if (lower.size() != upper.size()) throw InputError("domain lower/upper dimension mismatch");
  for (Index a = 0; a < lower.size(); ++a) {
    if (!(lower(a) < upper(a))) {
      throw InputError("domain lower bound must be below upper bound on axis " + std::to_string(a));
    }
  }
  if (grid_per_dim < 0 || grid_per_dim == 1) throw InputError("domain.grid_per_dim must be at least 2");
}

VectorXd DomainBox::grid_point(Index flat_index) const {
  const Index d = dimension();
  const int n = points_per_dim();
  VectorXd x(d);
  for (Index a = d - 1; a >= 0; --a) {
    const Index i = flat_index % n;
    flat_index /= n;
    // Written as lower + width * i / (n - 1) so that midpoints land exactly.
    x(a) = i == n - 1 ? upper(a) : lower(a) + (upper(a) - lower(a)) * static_cast<double>(i) / (n - 1);
  }
  return x;
}

MatrixXd DomainBox::grid_points() const {
  const Index size = grid_size();
  MatrixXd points(size, dimension());
  for (Index g = 0; g < size; ++g) points.row(g) = grid_point(g).transpose();
  return points;
}

VectorXd DomainBox::project(const VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

bool DomainBox::contains(const VectorXd& x) const {
  return x.size() == dimension() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

}  // namespace confego
