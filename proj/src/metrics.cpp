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

#include "confego/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "confego/trace.hpp"

namespace confego {

StepMetrics step_metrics(double f_true, double f_star, const std::vector<double>& g_true) {
  StepMetrics m;
  m.regret = f_true - f_star;
  m.regret_plus = positive_part(m.regret);
  m.violations.reserve(g_true.size());
  for (double g : g_true) m.violations.push_back(positive_part(g));
  return m;
}

MetricSeries::MetricSeries(int num_constraints, bool with_regret)
    : has_regret(with_regret),
      v(static_cast<std::size_t>(num_constraints)),
      V(static_cast<std::size_t>(num_constraints)) {}

void MetricSeries::append(const std::vector<double>& violations) {
  if (violations.size() != v.size()) throw InputError("metric series: wrong number of violations");
  const bool first = size() == 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i].push_back(violations[i]);
    V[i].push_back((first ? 0.0 : V[i].back()) + violations[i]);
  }
}

void MetricSeries::append(const StepMetrics& step) {
  if (!has_regret) throw InputError("metric series: regret appended to a series without an optimum");
  const bool first = r.empty();
  append(step.violations);
  r.push_back(step.regret);
  r_plus.push_back(step.regret_plus);
  R.push_back((first ? 0.0 : R.back()) + step.regret);
  R_plus.push_back((first ? 0.0 : R_plus.back()) + step.regret_plus);
  double combined = step.regret_plus;
  for (double viol : step.violations) combined += viol;
  best_combined.push_back(first ? combined : std::min(best_combined.back(), combined));
}

bool BoundReport::cumulative_pass() const {
  if (has_regret && !regret_pass) return false;
  return std::all_of(violation_pass.begin(), violation_pass.end(), [](bool b) { return b; });
}

bool BoundReport::sigma_all_pass() const {
  return std::all_of(sigma_pass.begin(), sigma_pass.end(), [](bool b) { return b; });
}

GammaEstimate gamma_estimate_from_trace(const RunTrace& trace, GammaMethod method) {
  GammaEstimate out;
  out.method = method;
  const Index n = trace.final_greedy_gamma.size();
  if (n == 0 || trace.final_realized_gain.size() != n) {
    throw InputError("trace carries no information-gain record");
  }
  for (Index i = 0; i < n; ++i) {
    switch (method) {
      case GammaMethod::Greedy: out.values.push_back(trace.final_greedy_gamma(i)); break;
      case GammaMethod::Realized: out.values.push_back(trace.final_realized_gain(i)); break;
      case GammaMethod::Combined:
        out.values.push_back(std::max(trace.final_greedy_gamma(i), trace.final_realized_gain(i)));
        break;
    }
  }
  return out;
}

BoundReport theoretical_bounds(const RunTrace& trace, const GammaEstimate& gammas) {
  if (!trace.beta_mode || *trace.beta_mode == BetaMode::Fixed) {
    throw InputError("bound check needs a trace run with a theory or greedy-gamma beta schedule");
  }
  const StepRecord* last = trace.last_sampled();
  if (last == nullptr) throw InputError("bound check needs at least one sampled step");
  const int functions = trace.num_constraints + 1;
  if (last->beta_sqrt.size() != functions) throw InputError("trace is missing beta records");
  if (static_cast<int>(gammas.values.size()) != functions) {
    throw InputError("bound check needs one gamma estimate per function");
  }

  BoundReport report;
  const int T = trace.evaluated_steps();
  report.horizon = T;
  const double slack = 1e-9;

  std::vector<double> sigma_sum(static_cast<std::size_t>(functions), 0.0);
  for (const auto& s : trace.steps) {
    if (!s.sampled) continue;
    for (int i = 0; i < functions; ++i) sigma_sum[static_cast<std::size_t>(i)] += s.posterior_sd(i);
  }

  double rate_sum = 0.0;
  std::vector<double> cumulative_bound(static_cast<std::size_t>(functions));
  for (int i = 0; i < functions; ++i) {
    const double gamma = std::max(gammas.values[static_cast<std::size_t>(i)], 0.0);
    const double beta = last->beta_sqrt(i);
    cumulative_bound[static_cast<std::size_t>(i)] = 4.0 * beta * std::sqrt((T + 2.0) * gamma);
    rate_sum += beta * std::sqrt(gamma);
    const double sigma_bound = std::sqrt(4.0 * (T + 2.0) * gamma);
    report.sigma_sum.push_back(sigma_sum[static_cast<std::size_t>(i)]);
    report.sigma_bound.push_back(sigma_bound);
    report.sigma_pass.push_back(sigma_sum[static_cast<std::size_t>(i)] <= sigma_bound + slack);
  }
  report.rate_bound = 4.0 * std::sqrt(T + 2.0) * rate_sum / T;

  const MetricSeries& m = trace.metrics;
  report.has_regret = m.has_regret && !m.R_plus.empty();
  if (report.has_regret) {
    report.regret_plus = m.R_plus.back();
    report.regret_bound = cumulative_bound[0];
    report.regret_pass = report.regret_plus <= report.regret_bound + slack;
    report.best_combined = m.best_combined.back();
    report.rate_pass = report.best_combined <= report.rate_bound + slack;
  }
  for (int i = 1; i < functions; ++i) {
    const double total = m.V[static_cast<std::size_t>(i - 1)].empty() ? 0.0 : m.V[static_cast<std::size_t>(i - 1)].back();
    report.violation.push_back(total);
    report.violation_bound.push_back(cumulative_bound[static_cast<std::size_t>(i)]);
    report.violation_pass.push_back(total <= cumulative_bound[static_cast<std::size_t>(i)] + slack);
  }
  return report;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("log_log_slope: need two or more matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw InputError("log_log_slope: fewer than two positive points");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InputError("log_log_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

int RunTrace::evaluated_steps() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) { return s.sampled; }));
}

const StepRecord* RunTrace::last_sampled() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->sampled) return &*it;
  }
  return nullptr;
}

}  // namespace confego
