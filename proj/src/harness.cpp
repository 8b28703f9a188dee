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

#include "confego/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace confego {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InputError(where + ": expected a number, got '" + s + "'");
  }
  return value;
}

long long parse_int(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InputError(where + ": expected an integer, got '" + s + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InputError(where + ": expected true or false, got '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& where) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item, where));
  if (out.empty()) throw InputError(where + ": empty list");
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& item : split(text, ',')) {
    const std::string name = trim(item);
    if (!name.empty()) out.push_back(name);
  }
  return out;
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

void set_output(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out << ',';
    out << cells[k];
  }
  out << '\n';
}


KernelFamily parse_family(const std::string& name) {
  if (name == "se" || name == "squared-exponential" || name == "squared_exponential") {
    return KernelFamily::SquaredExponential;
  }
  if (name == "matern") return KernelFamily::Matern;
  if (name == "linear") return KernelFamily::Linear;
  throw InputError("kernel.family: unknown family '" + name + "' (expected se, matern or linear)");
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& where) {
  std::vector<std::uint64_t> out;
  for (const auto& raw : split(text, ',')) {
    const std::string item = trim(raw);
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      const long long a = parse_int(item.substr(0, dash), where);
      const long long b = parse_int(item.substr(dash + 1), where);
      if (a < 0 || b < a) throw InputError(where + ": bad seed range '" + item + "'");
      for (long long s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    } else {
      const long long s = parse_int(item, where);
      if (s < 0) throw InputError(where + ": seeds must be nonnegative");
      out.push_back(static_cast<std::uint64_t>(s));
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  kernel.validate();
  domain.validate();
  if (kernel.dimension != domain.dimension()) throw InputError("kernel dimension must match domain dimension");
  if (seeds.empty()) throw InputError("run.seeds must not be empty");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw InputError("run.seeds contains duplicates");
  if (steps < 1) throw InputError("run.steps must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("confidence.delta must lie in (0, 1)");
  if (problem.n_constraints < 1) throw InputError("problem.n_constraints must be at least 1");
  if (!(problem.noise_std >= 0.0)) throw InputError("problem.noise_std must be nonnegative");
  if (problem.kind == "infeasible-gp" && !(problem.epsilon > 0.0)) {
    throw InputError("problem.epsilon must be positive");
  }
  if (problem.kind != "gp-sample" && problem.kind != "infeasible-gp" && problem.kind.rfind("analytic:", 0) != 0) {
    throw InputError("problem.kind must be gp-sample, infeasible-gp or analytic:<name>");
  }
  if (algorithms.empty()) throw InputError("no algorithms selected");
  for (const auto& a : algorithms) {
    if (a != "config") parse_baseline(a);
  }
  baseline.validate();
  if (!(band_c >= 0.0)) throw InputError("output.band_c must be nonnegative");
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::optional<std::vector<double>> lower, upper;
  std::optional<int> grid_per_dim;
  std::optional<std::string> family;
  std::optional<double> variance, lengthscale, nu;
  std::set<std::string> seen;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw InputError(where + ": duplicate key '" + key + "'");
    const std::string at = where + " (" + key + ")";

    if (key == "kernel.family") {
      family = value;
    } else if (key == "kernel.variance") {
      variance = parse_double(value, at);
    } else if (key == "kernel.lengthscale") {
      lengthscale = parse_double(value, at);
    } else if (key == "kernel.nu") {
      nu = parse_double(value, at);
    } else if (key == "confidence.delta") {
      cfg.delta = parse_double(value, at);
    } else if (key == "confidence.sigma") {
      cfg.sigma = parse_double(value, at);
    } else if (key == "confidence.B") {
      if (value == "exact") {
        cfg.bound_source = BoundSource::Exact;
      } else if (value == "proxy") {
        cfg.bound_source = BoundSource::Proxy;
      } else {
        cfg.bound_source = BoundSource::Values;
        cfg.bound_values = parse_double_list(value, at);
      }
    } else if (key == "confidence.beta_mode") {
      cfg.beta_mode = parse_beta_mode(value);
    } else if (key == "confidence.beta_fixed") {
      cfg.beta_fixed = parse_double(value, at);
    } else if (key == "domain.lower") {
      lower = parse_double_list(value, at);
    } else if (key == "domain.upper") {
      upper = parse_double_list(value, at);
    } else if (key == "domain.grid_per_dim") {
      grid_per_dim = static_cast<int>(parse_int(value, at));
    } else if (key == "acquisition.refine") {
      cfg.refine = parse_bool(value, at);
    } else if (key == "baseline.algorithm") {
      cfg.algorithms = {"config"};
      if (value != "none") {
        for (const auto& name : parse_name_list(value)) {
          cfg.algorithms.push_back(to_string(parse_baseline(name)));
        }
      }
    } else if (key == "baseline.eta") {
      cfg.baseline.primal_dual_step = parse_double(value, at);
    } else if (key == "baseline.cei_threshold") {
      cfg.baseline.cei_feasibility_threshold = parse_double(value, at);
    } else if (key == "problem.kind") {
      cfg.problem.kind = value;
    } else if (key == "problem.seed") {
      const long long s = parse_int(value, at);
      if (s < 0) throw InputError(at + ": seed must be nonnegative");
      cfg.problem.seed = static_cast<std::uint64_t>(s);
    } else if (key == "problem.n_constraints") {
      cfg.problem.n_constraints = static_cast<int>(parse_int(value, at));
    } else if (key == "problem.epsilon") {
      cfg.problem.epsilon = parse_double(value, at);
    } else if (key == "problem.noise_std") {
      cfg.problem.noise_std = parse_double(value, at);
    } else if (key == "run.steps") {
      cfg.steps = static_cast<int>(parse_int(value, at));
    } else if (key == "run.lambda") {
      cfg.lambda = parse_double(value, at);
    } else if (key == "run.seeds") {
      cfg.seeds = parse_seed_list(value, at);
    } else if (key == "run.stop_on_infeasibility") {
      cfg.stop_on_infeasibility = parse_bool(value, at);
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else if (key == "output.band_c") {
      cfg.band_c = parse_double(value, at);
    } else {
      throw InputError(where + ": unknown key '" + key + "'");
    }
  }

  if (lower || upper) {
    if (!lower || !upper) throw InputError(source + ": domain.lower and domain.upper must be given together");
    cfg.domain = DomainBox(to_vector(*lower), to_vector(*upper), grid_per_dim.value_or(0));
  } else if (grid_per_dim) {
    cfg.domain.grid_per_dim = *grid_per_dim;
  }
  if (cfg.problem.kind.rfind("analytic:", 0) == 0) {
    // Fixtures carry their own box.
    cfg.domain = analytic_problem(cfg.problem.kind.substr(9), cfg.problem.noise_std, grid_per_dim.value_or(0)).domain;
  }
  KernelSpec<double> kernel;
  kernel.family = family ? parse_family(*family) : KernelFamily::SquaredExponential;
  kernel.variance = variance.value_or(2.0);
  kernel.lengthscale = lengthscale.value_or(1.0);
  kernel.nu = nu.value_or(2.5);
  kernel.dimension = cfg.domain.dimension();
  if (nu && kernel.family != KernelFamily::Matern) throw InputError(source + ": kernel.nu applies to matern only");
  cfg.kernel = kernel;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

ProblemInstance build_problem(const ExperimentConfig& config, std::uint64_t run_seed, const GpPriorSampler* sampler) {
  const ProblemSpec& spec = config.problem;
  if (spec.kind.rfind("analytic:", 0) == 0) {
    return {analytic_problem(spec.kind.substr(9), spec.noise_std, config.domain.grid_per_dim), spec.seed, 0};
  }
  std::optional<GpPriorSampler> local;
  if (sampler == nullptr) {
    local.emplace(config.kernel, config.domain);
    sampler = &*local;
  }
  if (spec.kind == "infeasible-gp") {
    const std::uint64_t seed = mix_seed(spec.seed, run_seed, 0);
    return {make_infeasible_problem(seed, *sampler, spec.epsilon, spec.n_constraints, spec.noise_std), seed, 0};
  }
  constexpr int kMaxAttempts = 10000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t seed = mix_seed(spec.seed, run_seed, static_cast<std::uint64_t>(attempt));
    if (auto p = sample_gp_problem(seed, *sampler, spec.n_constraints, spec.noise_std)) {
      return {std::move(*p), seed, attempt};
    }
  }
  throw InputError("no feasible GP-sampled instance after " + std::to_string(kMaxAttempts) + " draws");
}

std::vector<double> resolve_rkhs_bounds(const ExperimentConfig& config, const ConstrainedProblem& problem) {
  const auto functions = static_cast<std::size_t>(problem.num_constraints()) + 1;
  if (config.bound_source == BoundSource::Values) {
    if (config.bound_values.size() == 1) return std::vector<double>(functions, config.bound_values[0]);
    if (config.bound_values.size() != functions) {
      throw InputError("confidence.B needs 1 or " + std::to_string(functions) + " values");
    }
    return config.bound_values;
  }
  if (config.bound_source == BoundSource::Exact && problem.rkhs_norms.size() == functions) {
    return problem.rkhs_norms;
  }
  if (config.bound_source == BoundSource::Exact) warn("exact RKHS norms unknown for this problem; using the proxy");
  if (!problem.truth) throw InputError("confidence.B = proxy needs a problem with tabulated truth");
  std::vector<double> out;
  for (std::size_t i = 0; i < functions; ++i) {
    const double peak = problem.truth->grid_values.col(static_cast<Index>(i)).cwiseAbs().maxCoeff();
    out.push_back(std::max(peak / std::sqrt(config.kernel.variance), 1e-6));
  }
  return out;
}

ConfigRunSettings make_run_settings(const ExperimentConfig& config, const ConstrainedProblem& problem,
                                    std::uint64_t run_seed) {
  ConfigRunSettings s;
  s.horizon = config.steps;
  s.domain = problem.domain;
  s.kernel = config.kernel;
  s.lambda = config.lambda;
  s.rng_seed = run_seed;
  s.stop_on_infeasibility = config.stop_on_infeasibility;
  s.refine = config.refine;
  s.confidence.num_constraints = problem.num_constraints();
  s.confidence.delta = config.delta;
  s.confidence.noise_sigma = config.sigma.value_or(problem.noise_std);
  s.confidence.beta_mode = config.beta_mode;
  s.confidence.beta_fixed = config.beta_fixed;
  s.confidence.rkhs_bounds = resolve_rkhs_bounds(config, problem);
  return s;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("CONFIG_EGO_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult execute_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.algorithms = config.algorithms;

  std::optional<GpPriorSampler> sampler;
  if (config.problem.kind.rfind("analytic:", 0) != 0) sampler.emplace(config.kernel, config.domain);

  std::vector<std::optional<ProblemInstance>> problems(config.seeds.size());
  std::vector<std::string> problem_errors(config.seeds.size());
  for (std::size_t k = 0; k < config.seeds.size(); ++k) {
    try {
      problems[k] = build_problem(config, config.seeds[k], sampler ? &*sampler : nullptr);
    } catch (const std::exception& e) {
      problem_errors[k] = e.what();
    }
  }

  for (const auto& algorithm : config.algorithms) {
    for (std::size_t k = 0; k < config.seeds.size(); ++k) {
      RunOutcome outcome;
      outcome.algorithm = algorithm;
      outcome.seed = config.seeds[k];
      if (problems[k]) {
        outcome.problem_seed = problems[k]->problem_seed;
        outcome.rejected = problems[k]->rejected;
      } else {
        outcome.error = problem_errors[k];
      }
      result.runs.push_back(std::move(outcome));
    }
  }

  // Warm the shared gamma table once so workers only read it.
  if (!problems.empty()) {
    for (const auto& p : problems) {
      if (!p) continue;
      const ConfigRunSettings s = make_run_settings(config, p->problem, 0);
      shared_greedy_gamma(s.kernel, s.domain, s.effective_lambda(), s.horizon);
      break;
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= result.runs.size()) return;
      RunOutcome& outcome = result.runs[job];
      const std::size_t k = job % config.seeds.size();
      if (!problems[k]) continue;
      try {
        const ConstrainedProblem& problem = problems[k]->problem;
        const ConfigRunSettings settings = make_run_settings(config, problem, outcome.seed);
        RunTrace trace = outcome.algorithm == "config"
                             ? run_config(problem, settings)
                             : run_baseline(problem, settings,
                                            BaselineSettings{parse_baseline(outcome.algorithm),
                                                             config.baseline.primal_dual_step,
                                                             config.baseline.cei_feasibility_threshold});
        if (trace.incomplete) outcome.error = trace.failure;
        if (outcome.algorithm == "config" && trace.beta_mode && *trace.beta_mode != BetaMode::Fixed &&
            trace.evaluated_steps() > 0) {
          outcome.bounds = theoretical_bounds(trace, gamma_estimate_from_trace(trace, GammaMethod::Combined));
        }
        outcome.trace = std::move(trace);
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(result.runs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return result;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string trace_file_name(const std::string& algorithm, std::uint64_t seed) {
  return "trace_" + algorithm + "_seed" + std::to_string(seed) + ".csv";
}

std::string confidence_file_name(const std::string& algorithm, std::uint64_t seed) {
  return "confidence_" + algorithm + "_seed" + std::to_string(seed) + ".csv";
}

std::string aggregate_file_name(const std::string& algorithm) { return "aggregate_" + algorithm + ".csv"; }

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  const int d = trace.dimension;
  const int n = trace.num_constraints;
  std::vector<std::string> header{"step"};
  for (int a = 0; a < d; ++a) header.push_back("x_" + std::to_string(a));
  for (int i = 0; i <= n; ++i) header.push_back("y_" + std::to_string(i));
  header.push_back("regret");
  header.push_back("regret_plus");
  for (int i = 1; i <= n; ++i) header.push_back("viol_" + std::to_string(i));
  header.push_back("cum_regret");
  header.push_back("cum_regret_plus");
  for (int i = 1; i <= n; ++i) header.push_back("cum_viol_" + std::to_string(i));
  header.push_back("best_combined");
  header.push_back("infeasible_declared");
  set_output(out, header);

  const MetricSeries& m = trace.metrics;
  std::size_t k = 0;  // index of the next sampled step in the metric series
  for (const auto& s : trace.steps) {
    std::vector<std::string> row{std::to_string(s.step)};
    if (s.sampled) {
      for (int a = 0; a < d; ++a) row.push_back(format_double(s.x(a)));
      for (int i = 0; i <= n; ++i) row.push_back(format_double(s.observations(i)));
      row.push_back(m.has_regret ? format_double(m.r[k]) : "");
      row.push_back(m.has_regret ? format_double(m.r_plus[k]) : "");
      for (int i = 0; i < n; ++i) row.push_back(format_double(m.v[static_cast<std::size_t>(i)][k]));
      ++k;
    } else {
      for (int a = 0; a < d + n + 1 + 2 + n; ++a) row.emplace_back();
    }
    // Cumulative columns carry the last sampled step.
    if (k > 0) {
      row.push_back(m.has_regret ? format_double(m.R[k - 1]) : "");
      row.push_back(m.has_regret ? format_double(m.R_plus[k - 1]) : "");
      for (int i = 0; i < n; ++i) row.push_back(format_double(m.V[static_cast<std::size_t>(i)][k - 1]));
      row.push_back(m.has_regret ? format_double(m.best_combined[k - 1]) : "");
    } else {
      for (int a = 0; a < 3 + n; ++a) row.emplace_back();
    }
    row.push_back(s.infeasible_declared ? "1" : "0");
    set_output(out, row);
  }
}

void write_confidence_csv(std::ostream& out, const RunTrace& trace) {
  const int functions = trace.num_constraints + 1;
  std::vector<std::string> header{"step"};
  for (int i = 0; i < functions; ++i) header.push_back("beta_" + std::to_string(i));
  for (int i = 0; i < functions; ++i) header.push_back("sd_" + std::to_string(i));
  for (int i = 0; i < functions; ++i) header.push_back("gamma_prev_" + std::to_string(i));
  header.push_back("coverage");
  set_output(out, header);
  for (const auto& s : trace.steps) {
    if (!s.sampled) continue;
    std::vector<std::string> row{std::to_string(s.step)};
    for (int i = 0; i < functions; ++i) row.push_back(s.beta_sqrt.size() ? format_double(s.beta_sqrt(i)) : "");
    for (int i = 0; i < functions; ++i) row.push_back(format_double(s.posterior_sd(i)));
    for (int i = 0; i < functions; ++i) row.push_back(s.gamma_prev.size() ? format_double(s.gamma_prev(i)) : "");
    row.push_back(s.coverage ? (*s.coverage ? "1" : "0") : "");
    set_output(out, row);
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<const RunTrace*>& traces, double band_c) {
  int n = 0;
  std::size_t horizon = 0;
  bool regret = !traces.empty();
  for (const RunTrace* t : traces) {
    n = t->num_constraints;
    horizon = std::max(horizon, t->metrics.size());
    regret = regret && t->metrics.has_regret;
  }
  std::vector<std::string> header{"step", "mean_cum_regret", "sd_cum_regret"};
  for (int i = 1; i <= n; ++i) {
    header.push_back("mean_cum_violation_" + std::to_string(i));
    header.push_back("sd_cum_violation_" + std::to_string(i));
  }
  header.push_back("mean_best_combined");
  header.push_back("sd_best_combined");
  header.push_back("band_lo_cum_regret");
  header.push_back("band_hi_cum_regret");
  for (int i = 1; i <= n; ++i) {
    header.push_back("band_lo_cum_violation_" + std::to_string(i));
    header.push_back("band_hi_cum_violation_" + std::to_string(i));
  }
  header.push_back("band_lo_best_combined");
  header.push_back("band_hi_best_combined");
  set_output(out, header);

  // Runs that stopped early hold their final values.
  auto series_at = [](const std::vector<double>& s, std::size_t k) { return s[std::min(k, s.size() - 1)]; };
  auto moments = [&](auto&& get) {
    std::vector<double> values;
    for (const RunTrace* t : traces) {
      if (t->metrics.size() == 0) continue;
      values.push_back(get(*t));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return std::pair<double, double>{mean, sd};
  };

  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<std::string> row{std::to_string(k + 1)};
    std::vector<std::string> bands;
    auto emit = [&](bool present, auto&& get) {
      if (!present) {
        row.insert(row.end(), 2, "");
        bands.insert(bands.end(), 2, "");
        return;
      }
      const auto [mean, sd] = moments(get);
      row.push_back(format_double(mean));
      row.push_back(format_double(sd));
      bands.push_back(format_double(mean - band_c * sd));
      bands.push_back(format_double(mean + band_c * sd));
    };
    emit(regret, [&](const RunTrace& t) { return series_at(t.metrics.R, k); });
    for (int i = 0; i < n; ++i) {
      emit(true, [&](const RunTrace& t) { return series_at(t.metrics.V[static_cast<std::size_t>(i)], k); });
    }
    emit(regret, [&](const RunTrace& t) { return series_at(t.metrics.best_combined, k); });
    row.insert(row.end(), bands.begin(), bands.end());
    set_output(out, row);
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result, int n) {
  std::vector<std::string> header{"algorithm", "seed", "problem_seed", "rejected_draws", "status", "steps",
                                  "R_T", "R_T_plus"};
  for (int i = 1; i <= n; ++i) header.push_back("V_" + std::to_string(i));
  header.push_back("bound_R");
  for (int i = 1; i <= n; ++i) header.push_back("bound_V_" + std::to_string(i));
  header.push_back("bound_rate");
  header.push_back("best_combined");
  header.push_back("pass_R");
  for (int i = 1; i <= n; ++i) header.push_back("pass_V_" + std::to_string(i));
  header.push_back("pass_rate");
  header.push_back("pass_sigma_sum");
  header.push_back("infeasible_declared");
  header.push_back("declared_step");
  header.push_back("declared_constraint");
  header.push_back("beta_mode");
  header.push_back("lambda");
  for (int i = 0; i <= n; ++i) header.push_back("gamma_greedy_" + std::to_string(i));
  for (int i = 0; i <= n; ++i) header.push_back("gamma_realized_" + std::to_string(i));
  header.push_back("error");
  set_output(out, header);

  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  for (const auto& run : result.runs) {
    std::vector<std::string> row{run.algorithm, std::to_string(run.seed), std::to_string(run.problem_seed),
                                 std::to_string(run.rejected)};
    const RunTrace* t = run.trace ? &*run.trace : nullptr;
    row.push_back(t == nullptr ? "failed" : (run.error.empty() ? "ok" : "incomplete"));
    const MetricSeries* m = t ? &t->metrics : nullptr;
    const bool has = m && m->size() > 0;
    row.push_back(t ? std::to_string(t->evaluated_steps()) : "");
    row.push_back(has && m->has_regret ? format_double(m->R.back()) : "");
    row.push_back(has && m->has_regret ? format_double(m->R_plus.back()) : "");
    for (int i = 0; i < n; ++i) row.push_back(has ? format_double(m->V[static_cast<std::size_t>(i)].back()) : "");
    const BoundReport* b = run.bounds ? &*run.bounds : nullptr;
    row.push_back(b && b->has_regret ? format_double(b->regret_bound) : "");
    for (int i = 0; i < n; ++i) row.push_back(b ? format_double(b->violation_bound[static_cast<std::size_t>(i)]) : "");
    row.push_back(b && b->has_regret ? format_double(b->rate_bound) : "");
    row.push_back(has && m->has_regret ? format_double(m->best_combined.back()) : "");
    row.push_back(b && b->has_regret ? flag(b->regret_pass) : "");
    for (int i = 0; i < n; ++i) row.push_back(b ? flag(b->violation_pass[static_cast<std::size_t>(i)]) : "");
    row.push_back(b && b->has_regret ? flag(b->rate_pass) : "");
    row.push_back(b ? flag(b->sigma_all_pass()) : "");
    row.push_back(t ? flag(t->infeasibility.has_value()) : "");
    row.push_back(t && t->infeasibility ? std::to_string(t->infeasibility->step) : "");
    row.push_back(t && t->infeasibility ? std::to_string(t->infeasibility->constraint_index) : "");
    row.push_back(t && t->beta_mode ? to_string(*t->beta_mode) : "");
    row.push_back(t ? format_double(t->lambda) : "");
    for (int i = 0; i <= n; ++i) {
      row.push_back(t && t->final_greedy_gamma.size() > i ? format_double(t->final_greedy_gamma(i)) : "");
    }
    for (int i = 0; i <= n; ++i) {
      row.push_back(t && t->final_realized_gain.size() > i ? format_double(t->final_realized_gain(i)) : "");
    }
    std::string error = run.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    row.push_back(error);
    set_output(out, row);
  }
}

void write_problem_csv(std::ostream& out, const ConstrainedProblem& problem) {
  const ProblemTruth truth = problem.truth ? *problem.truth : compute_truth(problem);
  const MatrixXd grid = problem.domain.grid_points();
  const int n = problem.num_constraints();
  std::vector<std::string> header;
  for (Index a = 0; a < grid.cols(); ++a) header.push_back("x_" + std::to_string(a));
  header.push_back("f");
  for (int i = 1; i <= n; ++i) header.push_back("g_" + std::to_string(i));
  header.push_back("feasible");
  set_output(out, header);
  for (Index g = 0; g < grid.rows(); ++g) {
    std::vector<std::string> row;
    for (Index a = 0; a < grid.cols(); ++a) row.push_back(format_double(grid(g, a)));
    for (int i = 0; i <= n; ++i) row.push_back(format_double(truth.grid_values(g, i)));
    row.push_back(truth.feasible_mask[static_cast<std::size_t>(g)] ? "1" : "0");
    set_output(out, row);
  }
}

int run_experiment(const ExperimentConfig& config, std::ostream& log, bool quiet) {
  ExperimentResult result;
  try {
    result = execute_experiment(config);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    log << "error: cannot create output directory '" << config.output_dir.string() << "': " << ec.message() << '\n';
    return 1;
  }
  auto write_file = [&](const std::string& name, auto&& writer) {
    const fs::path path = config.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
  };
  try {
    for (const auto& algorithm : result.algorithms) {
      std::vector<const RunTrace*> traces;
      for (const auto& run : result.runs) {
        if (run.algorithm != algorithm || !run.trace) continue;
        traces.push_back(&*run.trace);
        write_file(trace_file_name(run.algorithm, run.seed), [&](std::ostream& o) { write_trace_csv(o, *run.trace); });
        write_file(confidence_file_name(run.algorithm, run.seed),
                   [&](std::ostream& o) { write_confidence_csv(o, *run.trace); });
      }
      write_file(aggregate_file_name(algorithm),
                 [&](std::ostream& o) { write_aggregate_csv(o, traces, config.band_c); });
    }
    write_file("summary.csv", [&](std::ostream& o) { write_summary_csv(o, result, config.problem.n_constraints); });
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  int failed = 0;
  for (const auto& run : result.runs) {
    if (!run.error.empty()) {
      ++failed;
      log << "warning: " << run.algorithm << " seed " << run.seed << ": " << run.error << '\n';
    }
  }
  if (!quiet) {
    log << "wrote " << result.runs.size() << " runs (" << failed << " with errors) to "
        << config.output_dir.string() << '\n';
  }
  return 0;
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
  const std::string& cell(std::size_t row, const std::string& name) const {
    const int c = column(name);
    if (c < 0 || static_cast<std::size_t>(c) >= rows[row].size()) throw InputError("missing CSV column '" + name + "'");
    return rows[row][static_cast<std::size_t>(c)];
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV '" + path.string() + "'");
  table.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split(line, ','));
    table.rows.back().resize(table.header.size());
  }
  return table;
}

// Rebuild the parts of a CONFIG trace the bound check reads.
RunTrace trace_from_files(const CsvTable& summary, std::size_t row, const fs::path& dir, int n) {
  const std::string algorithm = summary.cell(row, "algorithm");
  const auto seed = static_cast<std::uint64_t>(parse_int(summary.cell(row, "seed"), "summary seed"));
  const CsvTable trace_csv = read_csv(dir / trace_file_name(algorithm, seed));
  const CsvTable conf_csv = read_csv(dir / confidence_file_name(algorithm, seed));
  const int functions = n + 1;

  RunTrace trace;
  trace.algorithm = algorithm;
  trace.seed = seed;
  trace.num_constraints = n;
  trace.beta_mode = parse_beta_mode(summary.cell(row, "beta_mode"));
  trace.final_greedy_gamma.resize(functions);
  trace.final_realized_gain.resize(functions);
  for (int i = 0; i < functions; ++i) {
    trace.final_greedy_gamma(i) = parse_double(summary.cell(row, "gamma_greedy_" + std::to_string(i)), "gamma");
    trace.final_realized_gain(i) = parse_double(summary.cell(row, "gamma_realized_" + std::to_string(i)), "gamma");
  }
  for (std::size_t r = 0; r < conf_csv.rows.size(); ++r) {
    StepRecord s;
    s.step = static_cast<int>(parse_int(conf_csv.cell(r, "step"), "step"));
    s.beta_sqrt.resize(functions);
    s.posterior_sd.resize(functions);
    for (int i = 0; i < functions; ++i) {
      s.beta_sqrt(i) = parse_double(conf_csv.cell(r, "beta_" + std::to_string(i)), "beta");
      s.posterior_sd(i) = parse_double(conf_csv.cell(r, "sd_" + std::to_string(i)), "sd");
    }
    trace.steps.push_back(std::move(s));
  }

  std::size_t last = trace_csv.rows.size();
  for (std::size_t r = 0; r < trace_csv.rows.size(); ++r) {
    if (!trace_csv.cell(r, "y_0").empty()) last = r;
  }
  const bool regret = last < trace_csv.rows.size() && !trace_csv.cell(last, "cum_regret_plus").empty();
  trace.has_truth = regret;
  trace.metrics = MetricSeries(n, regret);
  if (last < trace_csv.rows.size()) {
    for (int i = 1; i <= n; ++i) {
      trace.metrics.V[static_cast<std::size_t>(i - 1)].push_back(
          parse_double(trace_csv.cell(last, "cum_viol_" + std::to_string(i)), "cum_viol"));
    }
    if (regret) {
      trace.metrics.R_plus.push_back(parse_double(trace_csv.cell(last, "cum_regret_plus"), "cum_regret_plus"));
      trace.metrics.best_combined.push_back(parse_double(trace_csv.cell(last, "best_combined"), "best_combined"));
    }
  }
  return trace;
}

}  // namespace

int verify_directory(const fs::path& dir, std::ostream& log, bool quiet) {
  try {
    const CsvTable summary = read_csv(dir / "summary.csv");
    int n = 0;
    while (summary.column("V_" + std::to_string(n + 1)) >= 0) ++n;
    if (n == 0) throw InputError("summary.csv has no violation columns");
    int checked = 0;
    int passed = 0;
    for (std::size_t r = 0; r < summary.rows.size(); ++r) {
      if (summary.cell(r, "algorithm") != "config" || summary.cell(r, "status") != "ok") continue;
      const std::string mode = summary.cell(r, "beta_mode");
      if (mode.empty() || parse_beta_mode(mode) == BetaMode::Fixed) continue;
      const RunTrace trace = trace_from_files(summary, r, dir, n);
      if (trace.steps.empty()) continue;
      const BoundReport report = theoretical_bounds(trace, gamma_estimate_from_trace(trace, GammaMethod::Combined));
      ++checked;
      const bool ok = report.all_pass();
      passed += ok ? 1 : 0;
      if (!quiet || !ok) {
        log << (ok ? "PASS" : "FAIL") << " seed " << trace.seed << " T=" << report.horizon;
        if (report.has_regret) {
          log << " R+=" << format_double(report.regret_plus) << "<=" << format_double(report.regret_bound);
        }
        for (int i = 0; i < n; ++i) {
          log << " V" << (i + 1) << "=" << format_double(report.violation[static_cast<std::size_t>(i)]) << "<="
              << format_double(report.violation_bound[static_cast<std::size_t>(i)]);
        }
        log << " sigma-sum " << (report.sigma_all_pass() ? "ok" : "violated") << '\n';
      }
    }
    if (checked == 0) {
      log << "no CONFIG runs with a formula beta schedule found in " << dir.string() << '\n';
      return 1;
    }
    log << passed << "/" << checked << " runs pass all bound checks\n";
    return passed == checked ? 0 : 1;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace confego
