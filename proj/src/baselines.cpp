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

#include "confego/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "run_support.hpp"

namespace confego {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double probability_nonpositive(double mean, double sd) {
  if (sd <= 0.0) return mean <= 0.0 ? 1.0 : 0.0;
  return normal_cdf(-mean / sd);
}

}  // namespace

BaselineAlgorithm parse_baseline(const std::string& name) {
  if (name == "cei") return BaselineAlgorithm::CEI;
  if (name == "primal-dual" || name == "pd") return BaselineAlgorithm::PrimalDual;
  throw InputError("unknown baseline '" + name + "' (expected cei or primal-dual)");
}

std::string to_string(BaselineAlgorithm algorithm) {
  return algorithm == BaselineAlgorithm::CEI ? "cei" : "primal-dual";
}

void BaselineSettings::validate() const {
  if (!(primal_dual_step > 0.0)) throw InputError("baseline.eta must be positive");
  if (!(cei_feasibility_threshold > 0.0 && cei_feasibility_threshold < 1.0)) {
    throw InputError("baseline.cei_threshold must lie in (0, 1)");
  }
}

double expected_improvement(double mean, double sd, double incumbent) {
  const double gap = incumbent - mean;
  if (sd <= 0.0) return positive_part(gap);
  const double z = gap / sd;
  return std::max(gap * normal_cdf(z) + sd * normal_pdf(z), 0.0);
}

double feasibility_probability(std::span<const GpPosterior<double>> gps, const VectorXd& x) {
  double p = 1.0;
  for (std::size_t i = 1; i < gps.size(); ++i) {
    p *= probability_nonpositive(gps[i].mean(x), std::sqrt(gps[i].variance(x)));
  }
  return p;
}

double cei_acquisition(std::span<const GpPosterior<double>> gps, std::optional<double> incumbent, const VectorXd& x) {
  if (gps.empty()) throw InputError("cei_acquisition: no posteriors");
  const double feasible = feasibility_probability(gps, x);
  if (!incumbent) return feasible;
  return expected_improvement(gps[0].mean(x), std::sqrt(gps[0].variance(x)), *incumbent) * feasible;
}

std::optional<double> cei_incumbent(std::span<const GpPosterior<double>> gps, double threshold) {
  std::optional<double> best;
  const GpPosterior<double>& objective = gps[0];
  for (Index k = 0; k < objective.size(); ++k) {
    const VectorXd x = objective.inputs().row(k).transpose();
    if (feasibility_probability(gps, x) <= threshold) continue;
    const double y = objective.observations()(k);
    if (!best || y < *best) best = y;
  }
  return best;
}

PrimalDualChoice primal_dual_step(const SurrogateBank& bank, const std::vector<double>& beta_sqrt,
                                  const std::vector<double>& duals, double eta) {
  const int n = bank.functions() - 1;
  if (static_cast<int>(duals.size()) != n) throw InputError("primal_dual_step: one dual per constraint expected");
  if (static_cast<int>(beta_sqrt.size()) != n + 1) throw InputError("primal_dual_step: one beta per function expected");
  for (double d : duals) {
    if (d < 0.0) throw InputError("primal_dual_step: duals must be nonnegative");
  }
  std::vector<VectorXd> sds;
  for (int i = 0; i <= n; ++i) sds.push_back(bank.on_grid(i).stddev());
  VectorXd lagrangian = bank.on_grid(0).mean() - beta_sqrt[0] * sds[0];
  for (int i = 1; i <= n; ++i) {
    const double w = duals[static_cast<std::size_t>(i - 1)];
    if (w == 0.0) continue;
    lagrangian += w * (bank.on_grid(i).mean() - beta_sqrt[static_cast<std::size_t>(i)] * sds[static_cast<std::size_t>(i)]);
  }
  Index pick = 0;
  lagrangian.minCoeff(&pick);  // first minimizer
  PrimalDualChoice out;
  out.grid_index = pick;
  out.x = bank.grid().row(pick).transpose();
  out.duals.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double upper = bank.on_grid(i).mean()(pick) + beta_sqrt[static_cast<std::size_t>(i)] * sds[static_cast<std::size_t>(i)](pick);
    out.duals[static_cast<std::size_t>(i - 1)] = std::max(0.0, duals[static_cast<std::size_t>(i - 1)] + eta * upper);
  }
  return out;
}

RunTrace run_baseline(const ConstrainedProblem& problem, const ConfigRunSettings& settings,
                      const BaselineSettings& baseline) {
  settings.validate(problem);
  baseline.validate();
  const int n = problem.num_constraints();
  const int functions = n + 1;
  const double lambda = settings.effective_lambda();
  auto grid = std::make_shared<const MatrixXd>(settings.domain.grid_points());
  SurrogateBank bank(settings.kernel, lambda, functions, grid);
  const auto greedy = shared_greedy_gamma(settings.kernel, settings.domain, lambda, settings.horizon);

  RunTrace trace = detail::start_trace(to_string(baseline.algorithm), problem, settings);
  std::vector<double> duals(static_cast<std::size_t>(n), 0.0);

  for (int t = 1; t <= settings.horizon; ++t) {
    StepRecord record;
    record.step = t;
    if (baseline.algorithm == BaselineAlgorithm::PrimalDual) {
      std::vector<double> betas(static_cast<std::size_t>(functions));
      record.gamma_prev.resize(functions);
      record.beta_sqrt.resize(functions);
      for (int i = 0; i < functions; ++i) {
        record.gamma_prev(i) = greedy->at(t - 1);
        betas[static_cast<std::size_t>(i)] = beta_sqrt(settings.confidence, i, t, record.gamma_prev(i));
        record.beta_sqrt(i) = betas[static_cast<std::size_t>(i)];
      }
      PrimalDualChoice choice = primal_dual_step(bank, betas, duals, baseline.primal_dual_step);
      record.x = std::move(choice.x);
      record.grid_index = choice.grid_index;
      duals = std::move(choice.duals);
      record.duals = Eigen::Map<const VectorXd>(duals.data(), static_cast<Index>(duals.size()));
    } else {
      const auto incumbent = cei_incumbent(bank.gps(), baseline.cei_feasibility_threshold);
      VectorXd feasible = VectorXd::Ones(grid->rows());
      for (int i = 1; i < functions; ++i) {
        const VectorXd& mean = bank.on_grid(i).mean();
        for (Index g = 0; g < grid->rows(); ++g) {
          feasible(g) *= [&] {
            const double sd = std::sqrt(bank.on_grid(i).variance_at(g));
            if (sd <= 0.0) return mean(g) <= 0.0 ? 1.0 : 0.0;
            return 0.5 * std::erfc(mean(g) / (sd * std::numbers::sqrt2));
          }();
        }
      }
      VectorXd score = feasible;
      if (incumbent) {
        const VectorXd& mean = bank.on_grid(0).mean();
        for (Index g = 0; g < grid->rows(); ++g) {
          score(g) *= expected_improvement(mean(g), std::sqrt(bank.on_grid(0).variance_at(g)), *incumbent);
        }
      }
      Index pick = 0;
      score.maxCoeff(&pick);
      record.x = grid->row(pick).transpose();
      record.grid_index = pick;
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

}  // namespace confego
