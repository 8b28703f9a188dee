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

#include "confego/algorithm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <tuple>

#include "run_support.hpp"

namespace confego {

double default_lambda(double noise_sigma) { return noise_sigma > 0.0 ? noise_sigma * noise_sigma : 1e-6; }

double ConfigRunSettings::effective_lambda() const {
  return lambda > 0.0 ? lambda : default_lambda(confidence.noise_sigma);
}

bool ConfigRunSettings::effective_refine() const { return refine.value_or(domain.dimension() >= 3); }

void ConfigRunSettings::validate(const ConstrainedProblem& problem) const {
  if (horizon < 1) throw InputError("run horizon must be at least 1");
  domain.validate();
  kernel.validate();
  confidence.validate();
  if (problem.num_constraints() < 1) throw InputError("problem needs at least one constraint");
  if (confidence.num_constraints != problem.num_constraints()) {
    throw InputError("confidence settings and problem disagree on the number of constraints");
  }
  if (kernel.dimension != domain.dimension()) throw InputError("kernel and domain dimensions differ");
  if (problem.domain.dimension() != domain.dimension() ||
      !problem.domain.lower.isApprox(domain.lower, 0.0) || !problem.domain.upper.isApprox(domain.upper, 0.0) ||
      problem.domain.points_per_dim() != domain.points_per_dim()) {
    throw InputError("problem domain does not match the run domain");
  }
  if (!gamma_tables.empty() && gamma_tables.size() != static_cast<std::size_t>(problem.num_constraints()) + 1) {
    throw InputError("gamma tables: one table per function expected");
  }
}

double observation_noise(std::uint64_t seed, int index, int step, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(index) + 1, static_cast<std::uint64_t>(step)));
  std::normal_distribution<double> normal(0.0, sigma);
  return normal(rng);
}

std::shared_ptr<const GreedyGammaTable> shared_greedy_gamma(const KernelSpec<double>& kernel,
                                                            const DomainBox& domain, double lambda, int horizon) {
  using Key = std::tuple<int, double, double, double, std::vector<double>, std::vector<double>, int, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const GreedyGammaTable>> cache;
  Key key{static_cast<int>(kernel.family),
          kernel.variance,
          kernel.lengthscale,
          kernel.family == KernelFamily::Matern ? kernel.nu : 0.0,
          std::vector<double>(domain.lower.data(), domain.lower.data() + domain.lower.size()),
          std::vector<double>(domain.upper.data(), domain.upper.data() + domain.upper.size()),
          domain.points_per_dim(),
          lambda};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  const auto needed = static_cast<std::size_t>(std::min<Index>(horizon, domain.grid_size())) + 1;
  if (it != cache.end() && it->second->values.size() >= needed) return it->second;
  auto table = std::make_shared<const GreedyGammaTable>(
      greedy_gamma_table(kernel, domain.grid_points(), std::min<Index>(horizon, domain.grid_size()), lambda));
  cache[key] = table;
  return table;
}

namespace {

double table_at(const std::vector<double>& table, int t) {
  if (table.empty() || t <= 0) return 0.0;
  return table[static_cast<std::size_t>(std::min<int>(t, static_cast<int>(table.size()) - 1))];
}

}  // namespace

RunTrace run_config(const ConstrainedProblem& problem, const ConfigRunSettings& settings) {
  settings.validate(problem);
  const int n = problem.num_constraints();
  const int functions = n + 1;
  const double lambda = settings.effective_lambda();
  auto grid = std::make_shared<const MatrixXd>(settings.domain.grid_points());
  SurrogateBank bank(settings.kernel, lambda, functions, grid);
  const auto greedy = shared_greedy_gamma(settings.kernel, settings.domain, lambda, settings.horizon);
  const ConfidenceConfig& conf = settings.confidence;

  AcquisitionOptions options;
  options.refine = settings.effective_refine();

  RunTrace trace = detail::start_trace("config", problem, settings);
  trace.beta_mode = conf.beta_mode;

  const bool check_coverage = problem.truth.has_value();
  for (int t = 1; t <= settings.horizon; ++t) {
    StepRecord record;
    record.step = t;
    record.gamma_prev.resize(functions);
    record.beta_sqrt.resize(functions);
    for (int i = 0; i < functions; ++i) {
      double gamma = greedy->at(t - 1);
      if (conf.beta_mode == BetaMode::Theory) {
        if (!settings.gamma_tables.empty()) gamma = table_at(settings.gamma_tables[static_cast<std::size_t>(i)], t - 1);
        gamma = std::max(gamma, bank.gp(i).info_gain());
      }
      record.gamma_prev(i) = gamma;
      record.beta_sqrt(i) = beta_sqrt(conf, i, t, gamma);
    }

    GridLcbs lcbs;
    std::vector<VectorXd> sds;
    bool covered = true;
    for (int i = 0; i < functions; ++i) {
      const GridPosterior<double>& moments = bank.on_grid(i);
      VectorXd sd = moments.stddev();
      VectorXd lower = moments.mean() - record.beta_sqrt(i) * sd;
      if (check_coverage && covered) {
        const VectorXd upper = moments.mean() + record.beta_sqrt(i) * sd;
        const auto truth = problem.truth->grid_values.col(i);
        covered = (truth.array() >= lower.array()).all() && (truth.array() <= upper.array()).all();
      }
      if (i == 0) {
        lcbs.objective = std::move(lower);
      } else {
        lcbs.constraints.push_back(std::move(lower));
      }
      sds.push_back(std::move(sd));
    }
    if (check_coverage) record.coverage = covered;

    std::vector<LcbFunction> constraint_fns;
    LcbFunction objective_fn;
    if (options.refine) {
      objective_fn = [&bank, beta = record.beta_sqrt(0)](const VectorXd& x) { return lcb(bank.gp(0), beta, x); };
      for (int i = 1; i < functions; ++i) {
        constraint_fns.push_back(
            [&bank, i, beta = record.beta_sqrt(i)](const VectorXd& x) { return lcb(bank.gp(i), beta, x); });
      }
    }
    const AuxiliaryResult aux = solve_auxiliary(lcbs, *grid, settings.domain, options,
                                                options.refine ? &objective_fn : nullptr,
                                                options.refine ? &constraint_fns : nullptr);

    if (aux.declared()) {
      const auto& d = aux.declaration();
      if (!trace.infeasibility) trace.infeasibility = InfeasibilityRecord{t, d.constraint_index, d.min_lcb};
      record.infeasible_declared = true;
      if (settings.stop_on_infeasibility) {
        record.sampled = false;
        trace.steps.push_back(std::move(record));
        break;
      }
      // Keep sampling at the point whose worst constraint LCB is smallest.
      Index pick = 0;
      double best = std::numeric_limits<double>::infinity();
      for (Index g = 0; g < grid->rows(); ++g) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& c : lcbs.constraints) worst = std::max(worst, c(g));
        if (worst < best) {
          best = worst;
          pick = g;
        }
      }
      record.x = grid->row(pick).transpose();
      record.grid_index = pick;
    } else {
      record.x = aux.point().x;
      record.grid_index = aux.point().grid_index;
    }

    record.posterior_sd = detail::posterior_sd_at(bank, record.x, record.grid_index);
    VectorXd y;
    try {
      y = detail::evaluate_and_record(problem, settings, trace, record);
    } catch (const std::exception& e) {
      trace.incomplete = true;
      trace.failure = std::string("oracle evaluation failed at step ") + std::to_string(t) + ": " + e.what();
      break;
    }
    bank.observe(record.x, y);
    trace.steps.push_back(std::move(record));
  }
  detail::finish_trace(trace, bank, *greedy);
  return trace;
}

VectorXd select_reported_solution(const RunTrace& trace) {
  const StepRecord* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  if (trace.has_truth) {
    std::size_t k = 0;
    for (const auto& s : trace.steps) {
      if (!s.sampled) continue;
      double score = trace.metrics.r_plus[k];
      for (const auto& v : trace.metrics.v) score += v[k];
      if (score < best_score) {
        best_score = score;
        best = &s;
      }
      ++k;
    }
  } else {
    for (const auto& s : trace.steps) {
      if (!s.sampled) continue;
      if ((s.observations.tail(trace.num_constraints).array() <= 0.0).all() && s.observations(0) < best_score) {
        best_score = s.observations(0);
        best = &s;
      }
    }
    if (best == nullptr) {
      for (const auto& s : trace.steps) {
        if (!s.sampled) continue;
        const double violation = s.observations.tail(trace.num_constraints).cwiseMax(0.0).sum();
        if (violation < best_score) {
          best_score = violation;
          best = &s;
        }
      }
    }
  }
  if (best == nullptr) throw InputError("select_reported_solution: trace has no evaluated steps");
  return best->x;
}

}  // namespace confego
