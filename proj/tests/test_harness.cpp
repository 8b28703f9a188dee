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

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "confego/harness.hpp"

using namespace confego;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("confego_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_config(const fs::path& out) {
  std::istringstream in(R"(
# small batch
problem.kind = gp-sample
problem.seed = 3
domain.lower = 0, 0
domain.upper = 1, 1
domain.grid_per_dim = 20
baseline.algorithm = cei
run.steps = 12
run.seeds = 0, 1, 2
)");
  ExperimentConfig cfg = parse_config(in, "small.cfg");
  cfg.output_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(R"(kernel.family = matern
kernel.nu = 1.5
kernel.variance = 1.2
kernel.lengthscale = 0.4   # trailing comment
confidence.delta = 0.1
confidence.B = 1.5, 2.5
confidence.beta_mode = theory
domain.lower = -1
domain.upper = 2
problem.n_constraints = 1
run.seeds = 0-3, 9
)");
  const ExperimentConfig cfg = parse_config(in);
  CHECK(cfg.kernel.family == KernelFamily::Matern);
  CHECK(cfg.kernel.nu == 1.5);
  CHECK(cfg.kernel.lengthscale == 0.4);
  CHECK(cfg.kernel.dimension == 1);
  CHECK(cfg.delta == 0.1);
  CHECK(cfg.bound_source == BoundSource::Values);
  CHECK(cfg.bound_values == std::vector<double>{1.5, 2.5});
  CHECK(cfg.beta_mode == BetaMode::Theory);
  CHECK(cfg.domain.lower(0) == -1.0);
  CHECK(cfg.domain.points_per_dim() == 100);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 9});
  CHECK(cfg.algorithms == std::vector<std::string>{"config"});
}

TEST_CASE("config errors carry the line number") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in, "x.cfg");
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("run.steps = 5\nkernel.colour = red\n").find("x.cfg:2") != std::string::npos);
  CHECK(error_of("run.steps = 5\nkernel.colour = red\n").find("unknown key") != std::string::npos);
  CHECK(error_of("run.steps = five\n").find("x.cfg:1") != std::string::npos);
  CHECK(error_of("run.steps = 5\nrun.steps = 6\n").find("duplicate") != std::string::npos);
  CHECK(error_of("no equals sign\n").find("x.cfg:1") != std::string::npos);
  CHECK_FALSE(error_of("run.seeds = 1, 1\n").empty());
  CHECK_FALSE(error_of("kernel.family = matern\nkernel.nu = 1.0\n").empty());
  CHECK_FALSE(error_of("kernel.nu = 1.5\n").empty());
  CHECK_FALSE(error_of("domain.lower = 0, 0\n").empty());
  CHECK_FALSE(error_of("baseline.algorithm = safeopt\n").empty());
  CHECK_FALSE(error_of("problem.kind = analytic:nope\n").empty());
  CHECK(error_of("problem.kind = analytic:boundary-active-1d\n").empty());
}

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(rng) * std::pow(10.0, i % 20 - 10);
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("problem construction from a config") {
  ExperimentConfig cfg = small_config("unused");
  const ProblemInstance a = build_problem(cfg, 4);
  const ProblemInstance b = build_problem(cfg, 4);
  CHECK(a.problem_seed == b.problem_seed);
  CHECK(a.problem.truth->grid_values == b.problem.truth->grid_values);
  CHECK(a.problem.truth->feasible());
  CHECK(a.problem_seed == mix_seed(3, 4, static_cast<std::uint64_t>(a.rejected)));

  const auto proxy = resolve_rkhs_bounds(cfg, a.problem);
  CHECK(proxy[0] == doctest::Approx(a.problem.truth->grid_values.col(0).cwiseAbs().maxCoeff() / std::sqrt(2.0)));
  cfg.bound_source = BoundSource::Exact;
  CHECK(resolve_rkhs_bounds(cfg, a.problem) == a.problem.rkhs_norms);
  cfg.bound_source = BoundSource::Values;
  cfg.bound_values = {3.0};
  CHECK(resolve_rkhs_bounds(cfg, a.problem) == std::vector<double>{3.0, 3.0});
  cfg.bound_values = {3.0, 1.0, 2.0};
  CHECK_THROWS_AS(resolve_rkhs_bounds(cfg, a.problem), InputError);
}

TEST_CASE("batch output files, schema and determinism") {
  TempDir dir("batch");
  ExperimentConfig cfg = small_config(dir.path / "a");
  std::ostringstream log;
  REQUIRE(run_experiment(cfg, log, true) == 0);
  int traces = 0, aggregates = 0, summaries = 0;
  for (const auto& e : fs::directory_iterator(cfg.output_dir)) {
    const std::string name = e.path().filename().string();
    traces += name.rfind("trace_", 0) == 0;
    aggregates += name.rfind("aggregate_", 0) == 0;
    summaries += name == "summary.csv";
  }
  CHECK(traces == 6);
  CHECK(aggregates == 2);
  CHECK(summaries == 1);

  const auto trace = read_csv(cfg.output_dir / trace_file_name("config", 1));
  const std::vector<std::string> header{"step", "x_0", "x_1", "y_0", "y_1", "regret", "regret_plus", "viol_1",
                                        "cum_regret", "cum_regret_plus", "cum_viol_1", "best_combined",
                                        "infeasible_declared"};
  CHECK(trace[0] == header);
  CHECK(trace.size() == 13);

  ExperimentConfig again = cfg;
  again.output_dir = dir.path / "b";
  REQUIRE(run_experiment(again, log, true) == 0);
  for (const auto& e : fs::directory_iterator(cfg.output_dir)) {
    CHECK(slurp(e.path()) == slurp(again.output_dir / e.path().filename()));
  }

  // Aggregate means recomputed from the per-seed traces.
  const auto agg = read_csv(cfg.output_dir / aggregate_file_name("cei"));
  REQUIRE(agg.size() == 13);
  for (std::size_t row = 1; row < agg.size(); ++row) {
    double sum_r = 0.0, sum_v = 0.0;
    std::vector<double> best;
    for (std::uint64_t seed : cfg.seeds) {
      const auto t = read_csv(cfg.output_dir / trace_file_name("cei", seed));
      sum_r += std::stod(t[row][8]);
      sum_v += std::stod(t[row][10]);
      best.push_back(std::stod(t[row][11]));
    }
    CHECK(std::stod(agg[row][1]) == doctest::Approx(sum_r / 3.0).epsilon(1e-14));
    CHECK(std::stod(agg[row][3]) == doctest::Approx(sum_v / 3.0).epsilon(1e-14));
    const double mean = (best[0] + best[1] + best[2]) / 3.0;
    double ss = 0.0;
    for (double b : best) ss += (b - mean) * (b - mean);
    CHECK(std::stod(agg[row][6]) == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("thread count does not change results") {
  TempDir dir("threads");
  ExperimentConfig cfg = small_config(dir.path / "one");
  std::ostringstream log;
  setenv("CONFIG_EGO_THREADS", "1", 1);
  CHECK(worker_threads() == 1);
  REQUIRE(run_experiment(cfg, log, true) == 0);
  setenv("CONFIG_EGO_THREADS", "4", 1);
  CHECK(worker_threads() == 4);
  cfg.output_dir = dir.path / "four";
  REQUIRE(run_experiment(cfg, log, true) == 0);
  unsetenv("CONFIG_EGO_THREADS");
  for (const auto& e : fs::directory_iterator(dir.path / "one")) {
    CHECK(slurp(e.path()) == slurp(dir.path / "four" / e.path().filename()));
  }
}

TEST_CASE("verify rechecks bounds from files") {
  TempDir dir("verify");
  ExperimentConfig cfg = small_config(dir.path);
  cfg.beta_mode = BetaMode::Theory;
  cfg.lambda = 1.0;
  std::ostringstream log;
  REQUIRE(run_experiment(cfg, log, true) == 0);
  std::ostringstream report;
  CHECK(verify_directory(dir.path, report) == 0);
  CHECK(report.str().find("3/3") != std::string::npos);

  // Inflate a cumulative violation well past its bound.
  const fs::path file = dir.path / trace_file_name("config", 0);
  auto rows = read_csv(file);
  rows.back()[10] = "1e9";
  std::ofstream out(file, std::ios::binary);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << '\n';
  }
  out.close();
  std::ostringstream failing;
  CHECK(verify_directory(dir.path, failing) == 1);
  CHECK(failing.str().find("FAIL seed 0") != std::string::npos);

  std::ostringstream missing;
  CHECK(verify_directory(dir.path / "nowhere", missing) == 1);
}

TEST_CASE("infeasible batch records declarations") {
  std::istringstream in(R"(problem.kind = infeasible-gp
problem.epsilon = 5
domain.grid_per_dim = 20
run.steps = 20
run.seeds = 0, 1
)");
  const ExperimentConfig cfg = parse_config(in);
  const ExperimentResult result = execute_experiment(cfg);
  for (const auto& run : result.runs) {
    REQUIRE(run.trace);
    CHECK(run.trace->infeasibility.has_value());
  }
  std::ostringstream csv;
  write_trace_csv(csv, *result.runs[0].trace);
  const std::string text = csv.str();
  const std::string last = text.substr(text.rfind('\n', text.size() - 2) + 1);
  CHECK(last.back() == '\n');
  CHECK(last.substr(last.size() - 2) == "1\n");
}

TEST_CASE("problem grid export") {
  std::ostringstream a, b;
  const ConstrainedProblem p = analytic_problem("boundary-active-1d");
  write_problem_csv(a, p);
  write_problem_csv(b, p);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("x_0,f,g_1,feasible\n", 0) == 0);
}
