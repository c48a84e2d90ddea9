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

// Experiment configuration, orchestration and CSV output.
//
// A configuration is a JSON object. Grids may be given as explicit arrays or
// as {"linspace": [lo, hi, count]}; the canonical form written back into CSV
// metadata always uses explicit arrays, so it reparses to the same config.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seqtherm/open_dynamics.hpp"

namespace seqtherm {

enum class Scenario {
  kThermalize,
  kT95Map,
  kStaticFi,
  kQfiScan,
  kWeakRegime,
  kIntermediateRegime,
  kKappaSweep,
  kNseqStar,
  kBayes,
};

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::kQfiScan;
  std::vector<int> n_spins{4};
  double coupling = 1.0;
  std::vector<double> temperatures{1.0};
  bool include_t_star = false;  // append T* of each chain to the temperature list
  std::vector<double> kappas{1.0};
  std::optional<double> tau;           // fixed time between measurements, 1/J
  std::optional<double> tau_per_spin;  // tau = tau_per_spin * N / J
  int n_seq = 1;
  std::int64_t mc_samples = 1000;
  std::int64_t trajectories = 0;  // M, bayes only
  int datasets = 1;               // independent seeded datasets, bayes only
  std::vector<int> n_values;      // bayes: record lengths to analyse (default 1..n_seq)
  std::string measured_qubits = "all";  // static-fi: "all" (1..N) or "half" (N/2)
  double t_max = 200.0;
  double dt = 0.5;
  int exact_limit = 20;
  std::vector<double> posterior_grid{0.01, 2.0, 400.0};  // lo, hi, points
  JumpGrouping jump_grouping = JumpGrouping::kEigenPair;
  std::uint64_t seed = 1;
  std::string name;                       // output file stem
  std::vector<std::string> unspecified;   // fields the paper leaves open, set by presets

  /// Throws ValidationError naming the offending field.
  void validate() const;
  /// Time between measurements for an N-spin chain.
  [[nodiscard]] double tau_for(int n) const;
};

/// Parses JSON text. Syntax errors and unknown or mistyped fields raise
/// ValidationError with the line or field in the message.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical single-line JSON.
std::string to_json(const ExperimentConfig& cfg);

std::vector<std::string> preset_ids();
/// Throws ValidationError listing the valid ids when `id` is unknown.
ExperimentConfig preset(const std::string& id, std::uint64_t seed = 1);

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

struct ResultTable {
  std::string name;  // file stem
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;  // extra metadata lines

  void add_row(std::vector<double> row);
};

std::vector<ResultTable> run(const ExperimentConfig& cfg);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

/// '#' metadata header followed by the CSV body.
void write_csv(std::ostream& os, const ResultTable& table, const ExperimentConfig& cfg,
               const std::string& timestamp);
/// Writes every table to dir/<table name>.csv and returns the paths.
std::vector<std::filesystem::path> write_tables(const std::filesystem::path& dir,
                                                const std::vector<ResultTable>& tables,
                                                const ExperimentConfig& cfg);

/// Library version string.
std::string version();

}  // namespace seqtherm
