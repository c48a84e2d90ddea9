// Copyright 2026 The seqtherm Authors
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

// seqtherm command line.
//
//   seqtherm run --config <file> [--out DIR]
//   seqtherm preset <figure-id> [--seed S] [--out DIR]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "seqtherm/errors.hpp"
#include "seqtherm/experiments.hpp"
#include "seqtherm/parallel.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int execute(const seqtherm::ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::cerr << "seqtherm: running " << cfg.name << " (" << seqtherm::to_string(cfg.scenario) << ", "
            << seqtherm::worker_count() << " worker threads)\n";
  const auto tables = seqtherm::run(cfg);
  for (const auto& path : seqtherm::write_tables(out_dir, tables, cfg)) std::cout << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential-measurement thermometry of a Heisenberg spin chain"};
  app.set_version_flag("--version", seqtherm::version());
  app.require_subcommand(1);

  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides SEQTHERM_THREADS)")->check(CLI::PositiveNumber);

  std::string config_path;
  std::string out_dir = ".";
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config file");
  run_cmd->add_option("--config", config_path, "Config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory");

  std::string figure_id;
  std::uint64_t seed = 1;
  auto* preset_cmd = app.add_subcommand("preset", "Run the parameterization behind a figure");
  preset_cmd->add_option("figure-id", figure_id, "One of: fig1a fig1b fig3a fig3b fig4 fig5 fig6a fig6b fig7 fig8 figA1 figA2")
      ->required();
  preset_cmd->add_option("--seed", seed, "Master seed");
  preset_cmd->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (threads > 0) seqtherm::set_worker_count(threads);

  seqtherm::ExperimentConfig cfg;
  try {
    cfg = run_cmd->parsed() ? seqtherm::load_config(config_path) : seqtherm::preset(figure_id, seed);
  } catch (const seqtherm::ValidationError& e) {
    std::cerr << "seqtherm: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const seqtherm::ResourceError& e) {
    std::cerr << "seqtherm: configuration exceeds resource limits: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    return execute(cfg, out_dir);
  } catch (const seqtherm::ValidationError& e) {
    std::cerr << "seqtherm: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const seqtherm::ResourceError& e) {
    std::cerr << "seqtherm: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "seqtherm: runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
