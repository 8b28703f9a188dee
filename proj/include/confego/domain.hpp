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

#ifndef CONFEGO_DOMAIN_HPP_
#define CONFEGO_DOMAIN_HPP_

#include "confego/common.hpp"

namespace confego {

/// Default points per axis: 100 up to two dimensions, 30 in three, 10 beyond.
int default_grid_per_dim(Index dimension);

/// Compact search box with a regular tensor grid.
///
/// Grid points are ordered lexicographically with the first coordinate most
/// significant, and both box ends are included on every axis.
struct DomainBox {
  VectorXd lower;
  VectorXd upper;
  int grid_per_dim = 0;  // 0 selects default_grid_per_dim(dimension())

  DomainBox() = default;
  DomainBox(VectorXd lower_, VectorXd upper_, int grid_per_dim_ = 0);

  static DomainBox unit_cube(Index dimension, int grid_per_dim = 0);

  Index dimension() const { return lower.size(); }
  int points_per_dim() const;
  Index grid_size() const;
  double spacing(Index axis) const;

  void validate() const;

  MatrixXd grid_points() const;
  VectorXd grid_point(Index flat_index) const;
  VectorXd project(const VectorXd& x) const;
  bool contains(const VectorXd& x) const;
};

}  // namespace confego

#endif  // CONFEGO_DOMAIN_HPP_
