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

#include "confego/confidence.hpp"

#include <algorithm>
#include <memory>

namespace confego {

BetaMode parse_beta_mode(const std::string& name) {
  if (name == "theory") return BetaMode::Theory;
  if (name == "greedy-gamma" || name == "greedy") return BetaMode::GreedyGamma;
  if (name == "fixed") return BetaMode::Fixed;
  throw InputError("unknown beta mode '" + name + "' (expected theory, greedy-gamma or fixed)");
}

std::string to_string(BetaMode mode) {
  switch (mode) {
    case BetaMode::Theory: return "theory";
    case BetaMode::GreedyGamma: return "greedy-gamma";
    case BetaMode::Fixed: return "fixed";
  }
  return "?";
}

void ConfidenceConfig::validate() const {
  if (num_constraints < 1) throw InputError("confidence: need at least one constraint");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("confidence.delta must lie in (0, 1)");
  if (!(noise_sigma >= 0.0)) throw InputError("confidence.sigma must be nonnegative");
  if (beta_mode != BetaMode::Fixed) {
    if (rkhs_bounds.size() != static_cast<std::size_t>(num_constraints) + 1) {
      throw InputError("confidence.B needs " + std::to_string(num_constraints + 1) + " entries, got " +
                       std::to_string(rkhs_bounds.size()));
    }
    for (double b : rkhs_bounds) {
      if (!(b > 0.0)) throw InputError("confidence.B entries must be positive");
    }
  } else if (!(beta_fixed >= 0.0)) {
    throw InputError("confidence.beta_fixed must be nonnegative");
  }
}

double GreedyGammaTable::at(Index t) const {
  if (values.empty() || t <= 0) return 0.0;
  const auto last = static_cast<Index>(values.size()) - 1;
  return values[static_cast<std::size_t>(std::min(t, last))];
}

GreedyGammaTable greedy_gamma_table(const KernelSpec<double>& kernel, const MatrixXd& grid, Index horizon,
                                    double lambda) {
  if (grid.rows() == 0) throw InputError("greedy gamma: empty grid");
  if (horizon < 0) throw InputError("greedy gamma: negative horizon");
  if (horizon > grid.rows()) {
    warn("greedy gamma: horizon " + std::to_string(horizon) + " capped at grid size " +
         std::to_string(grid.rows()));
    horizon = grid.rows();
  }
  GreedyGammaTable table;
  table.values.reserve(static_cast<std::size_t>(horizon) + 1);
  table.values.push_back(0.0);

  auto shared_grid = std::make_shared<const MatrixXd>(grid);
  GpPosterior<double> gp(kernel, lambda);
  GridPosterior<double> moments(shared_grid, kernel);
  std::vector<bool> taken(static_cast<std::size_t>(grid.rows()), false);
  double total = 0.0;
  for (Index t = 1; t <= horizon; ++t) {
    const VectorXd& var = moments.raw_variance();
    Index best = -1;
    double best_var = -1.0;
    for (Index g = 0; g < grid.rows(); ++g) {
      if (taken[static_cast<std::size_t>(g)]) continue;
      const double v = std::max(var(g), 0.0);
      if (v > best_var) {
        best_var = v;
        best = g;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    total += 0.5 * std::log1p(best_var / lambda);
    table.values.push_back(total);
    table.picks.push_back(best);
    gp.append(grid.row(best), 0.0);
    moments.absorb(gp);
  }
  return table;
}

double estimate_gamma(const KernelSpec<double>& kernel, const MatrixXd& grid, Index t, double lambda) {
  if (t < 1) throw InputError("estimate_gamma: t must be at least 1");
  return greedy_gamma_table(kernel, grid, t, lambda).values.back();
}

double beta_sqrt(const ConfidenceConfig& cfg, int function_index, int step, double gamma_prev) {
  if (step < 1) throw InputError("beta_sqrt: step must be at least 1");
  if (cfg.beta_mode == BetaMode::Fixed) return cfg.beta_fixed;
  if (function_index < 0 || function_index > cfg.num_constraints) {
    throw InputError("beta_sqrt: function index out of range");
  }
  const double bound = cfg.rkhs_bounds.at(static_cast<std::size_t>(function_index));
  const double log_term = std::log((cfg.num_constraints + 1) / cfg.delta);
  return bound + cfg.noise_sigma * std::sqrt(2.0 * (std::max(gamma_prev, 0.0) + 1.0 + log_term));
}

VectorXd lcb(const GridPosterior<double>& grid, double beta) {
  return grid.mean() - beta * grid.stddev();
}

VectorXd ucb(const GridPosterior<double>& grid, double beta) {
  return grid.mean() + beta * grid.stddev();
}

}  // namespace confego
