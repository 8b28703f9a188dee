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

// Command-line front end: run, verify, gen-problem.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "confego/harness.hpp"

namespace {

using namespace confego;

struct Overrides {
  std::string out;
  std::string seeds;
  std::string algo;
  int steps = 0;
  bool quiet = false;
};

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.seeds.empty()) cfg.seeds = parse_seed_list(o.seeds, "--seeds");
  if (!o.algo.empty()) {
    cfg.algorithms.clear();
    std::string item;
    std::istringstream in(o.algo);
    while (std::getline(in, item, ',')) {
      cfg.algorithms.push_back(item == "config" ? item : to_string(parse_baseline(item)));
    }
  }
  if (o.steps > 0) cfg.steps = o.steps;
  cfg.validate();
}

// A spec is a config file, or a bare problem kind with default settings.
ExperimentConfig problem_config(const std::string& spec) {
  if (std::filesystem::is_regular_file(spec)) return load_config(spec);
  std::istringstream in("problem.kind = " + spec + "\n");
  return parse_config(in, "<spec>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained efficient global optimization benchmarks"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seeds", o.seeds, "comma-separated seeds or ranges a-b");
    sub->add_option("--algo", o.algo, "comma-separated algorithms: config, cei, primal-dual");
    sub->add_option("--steps", o.steps, "horizon T")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment batch");
  run->add_option("config", config_path, "config file")->required();
  add_common(run);

  std::string trace_dir;
  auto* verify = app.add_subcommand("verify", "recheck bounds from a batch directory");
  verify->add_option("dir", trace_dir, "directory written by run")->required();
  add_common(verify);

  std::string spec;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-problem", "print a problem's truth grid as CSV");
  gen->add_option("spec", spec, "config file or problem kind")->required();
  gen->add_option("--seed", seed, "run seed");
  add_common(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      apply(o, cfg);
      return run_experiment(cfg, std::cerr, o.quiet);
    }
    if (verify->parsed()) {
      return verify_directory(trace_dir, std::cout, o.quiet);
    }
    ExperimentConfig cfg = problem_config(spec);
    apply(o, cfg);
    const ProblemInstance inst = build_problem(cfg, seed);
    if (o.out.empty()) {
      write_problem_csv(std::cout, inst.problem);
    } else {
      std::filesystem::create_directories(o.out);
      const auto path = std::filesystem::path(o.out) / ("problem_seed" + std::to_string(seed) + ".csv");
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
      write_problem_csv(out, inst.problem);
    }
    if (!o.quiet) std::cerr << "problem seed " << inst.problem_seed << ", " << inst.rejected << " rejected draws\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
