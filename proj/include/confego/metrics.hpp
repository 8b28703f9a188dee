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

#ifndef CONFEGO_METRICS_HPP_
#define CONFEGO_METRICS_HPP_

#include <vector>

#include "confego/common.hpp"
#include "confego/confidence.hpp"

namespace confego {

struct RunTrace;

struct StepMetrics {
  double regret = 0.0;
  double regret_plus = 0.0;
  std::vector<double> violations;
};

/// r = f - f*, r+ = [r]+, v_i = [g_i]+.
StepMetrics step_metrics(double f_true, double f_star, const std::vector<double>& g_true);

/// Per-step and running metrics of one run.
///
/// Violations are always tracked; regret and the best combined
/// suboptimality-plus-violation need a known optimum.
struct MetricSeries {
  bool has_regret = false;
  std::vector<double> r;
  std::vector<double> r_plus;
  std::vector<std::vector<double>> v;  // v[i][t] for constraint i + 1
  std::vector<double> R;
  std::vector<double> R_plus;
  std::vector<std::vector<double>> V;
  std::vector<double> best_combined;

  explicit MetricSeries(int num_constraints = 0, bool with_regret = false);

  std::size_t size() const { return v.empty() ? 0 : v.front().size(); }
  int num_constraints() const { return static_cast<int>(v.size()); }

  void append(const std::vector<double>& violations);
  void append(const StepMetrics& step);
};

/// Bound checks of a single run against the cumulative-regret/violation,
/// cumulative-sigma and best-point rate inequalities.
struct BoundReport {
  int horizon = 0;
  bool has_regret = false;
  double regret_plus = 0.0;
  double regret_bound = 0.0;
  bool regret_pass = true;
  std::vector<double> violation;
  std::vector<double> violation_bound;
  std::vector<bool> violation_pass;
  double best_combined = 0.0;
  double rate_bound = 0.0;
  bool rate_pass = true;
  std::vector<double> sigma_sum;     // per function
  std::vector<double> sigma_bound;   // sqrt(4 (T + 2) gamma)
  std::vector<bool> sigma_pass;

  bool cumulative_pass() const;  // regret and every violation
  bool sigma_all_pass() const;
  bool all_pass() const { return cumulative_pass() && sigma_all_pass() && rate_pass; }
};

/// gamma_{i,T} estimates recorded in a trace: greedy, realized, or their maximum.
GammaEstimate gamma_estimate_from_trace(const RunTrace& trace, GammaMethod method);

/// 4 beta_{i,T} sqrt((T + 2) gamma_{i,T}) per function and the rate
/// 4 sqrt(T + 2) sum_i beta_{i,T} sqrt(gamma_{i,T}) / T, compared against the
/// run's R_T^+, V_{i,T}, sum of sigma_{i,t-1}(x_t) and best_combined[T].
/// Throws InputError for traces without confidence-bound metadata.
BoundReport theoretical_bounds(const RunTrace& trace, const GammaEstimate& gammas);

/// log-log slope of y against x by least squares; diagnostic only.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace confego

#endif  // CONFEGO_METRICS_HPP_
