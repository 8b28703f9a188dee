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

#ifndef CONFEGO_HARNESS_HPP_
#define CONFEGO_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "confego/algorithm.hpp"
#include "confego/baselines.hpp"
#include "confego/metrics.hpp"
#include "confego/problems.hpp"

namespace confego {

struct ProblemSpec {
  std::string kind = "gp-sample";  // gp-sample | infeasible-gp | analytic:<name>
  std::uint64_t seed = 0;
  int n_constraints = 1;
  double epsilon = 0.5;
  double noise_std = 0.1;
};

enum class BoundSource { Exact, Proxy, Values };

/// Everything a batch needs. Defaults mirror the GP-sample experiment:
/// unit square, squared exponential kernel (variance 2, lengthscale 1),
/// one constraint, noise 0.1.
struct ExperimentConfig {
  KernelSpec<double> kernel = KernelSpec<double>::squared_exponential(2.0, 1.0, 2);
  DomainBox domain = DomainBox::unit_cube(2);
  ProblemSpec problem;

  double delta = 0.05;
  std::optional<double> sigma;  // defaults to problem.noise_std
  BoundSource bound_source = BoundSource::Proxy;
  std::vector<double> bound_values;
  BetaMode beta_mode = BetaMode::GreedyGamma;
  double beta_fixed = 2.0;
  std::optional<bool> refine;

  std::vector<std::string> algorithms{"config"};
  BaselineSettings baseline;

  int steps = 60;
  double lambda = 0.0;  // <= 0: default from sigma
  bool stop_on_infeasibility = true;
  std::vector<std::uint64_t> seeds{0, 1, 2};

  std::filesystem::path output_dir = "out";
  double band_c = 0.2;

  void validate() const;
};

/// Parse `key = value` lines; '#' starts a comment. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// "0,3,7" or ranges like "0-19", mixed freely.
std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& where = "seeds");

/// Problem instance for one run seed. GP-sampled instances with an empty
/// feasible set are rejected and redrawn from the next derived seed;
/// `rejected` counts the discarded draws.
struct ProblemInstance {
  ConstrainedProblem problem;
  std::uint64_t problem_seed = 0;
  int rejected = 0;
};

ProblemInstance build_problem(const ExperimentConfig& config, std::uint64_t run_seed,
                              const GpPriorSampler* sampler = nullptr);

/// Confidence bounds B_i for a problem according to the configured source.
std::vector<double> resolve_rkhs_bounds(const ExperimentConfig& config, const ConstrainedProblem& problem);

ConfigRunSettings make_run_settings(const ExperimentConfig& config, const ConstrainedProblem& problem,
                                    std::uint64_t run_seed);

struct RunOutcome {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::uint64_t problem_seed = 0;
  int rejected = 0;
  std::optional<RunTrace> trace;
  std::optional<BoundReport> bounds;
  std::string error;
};

struct ExperimentResult {
  std::vector<std::string> algorithms;
  std::vector<RunOutcome> runs;  // algorithm-major, seeds in config order
};

/// Worker count from CONFIG_EGO_THREADS, else the hardware concurrency.
unsigned worker_threads();

/// Run every (algorithm, seed) pair; results do not depend on the thread count.
ExperimentResult execute_experiment(const ExperimentConfig& config);

/// execute_experiment plus CSV output. Returns a process exit status.
int run_experiment(const ExperimentConfig& config, std::ostream& log, bool quiet = false);

// CSV writers. Numbers use shortest round-trip formatting; absent values are empty.
std::string format_double(double value);
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_confidence_csv(std::ostream& out, const RunTrace& trace);
void write_aggregate_csv(std::ostream& out, const std::vector<const RunTrace*>& traces, double band_c);
void write_summary_csv(std::ostream& out, const ExperimentResult& result, int num_constraints);
void write_problem_csv(std::ostream& out, const ConstrainedProblem& problem);

std::string trace_file_name(const std::string& algorithm, std::uint64_t seed);
std::string confidence_file_name(const std::string& algorithm, std::uint64_t seed);
std::string aggregate_file_name(const std::string& algorithm);

/// Recheck the cumulative bounds of every CONFIG run recorded in a batch
/// directory from its CSV files. Returns a process exit status: 0 when every
/// check passes.
int verify_directory(const std::filesystem::path& dir, std::ostream& log, bool quiet = false);

}  // namespace confego

#endif  // CONFEGO_HARNESS_HPP_
