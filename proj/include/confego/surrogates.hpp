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

#ifndef CONFEGO_SURROGATES_HPP_
#define CONFEGO_SURROGATES_HPP_

#include <memory>
#include <vector>

#include "confego/common.hpp"
#include "confego/gp.hpp"

namespace confego {

/// One independent GP per function (objective first), each mirrored on the
/// search grid. The optimization loop is the only writer.
class SurrogateBank {
 public:
  SurrogateBank(const KernelSpec<double>& kernel, double lambda, int functions,
                std::shared_ptr<const MatrixXd> grid)
      : grid_(std::move(grid)) {
    for (int i = 0; i < functions; ++i) {
      gps_.emplace_back(kernel, lambda);
      on_grid_.emplace_back(grid_, kernel);
    }
  }

  int functions() const { return static_cast<int>(gps_.size()); }
  const MatrixXd& grid() const { return *grid_; }
  const std::vector<GpPosterior<double>>& gps() const { return gps_; }
  const GpPosterior<double>& gp(int i) const { return gps_[static_cast<std::size_t>(i)]; }
  const GridPosterior<double>& on_grid(int i) const { return on_grid_[static_cast<std::size_t>(i)]; }

  void observe(const VectorXd& x, const VectorXd& y) {
    if (y.size() != functions()) throw InputError("surrogates: one observation per function expected");
    for (int i = 0; i < functions(); ++i) {
      gps_[static_cast<std::size_t>(i)].append(x, y(i));
      on_grid_[static_cast<std::size_t>(i)].absorb(gps_[static_cast<std::size_t>(i)]);
    }
  }

 private:
  std::shared_ptr<const MatrixXd> grid_;
  std::vector<GpPosterior<double>> gps_;
  std::vector<GridPosterior<double>> on_grid_;
};

}  // namespace confego

#endif  // CONFEGO_SURROGATES_HPP_
