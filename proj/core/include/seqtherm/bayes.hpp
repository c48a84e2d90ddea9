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

// Grid Bayesian temperature estimation from counts of whole outcome records.
// Prior is uniform on the grid; the multinomial coefficient is dropped since it
// does not depend on T.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seqtherm/protocol.hpp"

namespace seqtherm {

struct TrajectoryCounts {
  int n_seq = 0;
  std::map<std::uint64_t, std::int64_t> counts;  // outcome_index -> occurrences

  [[nodiscard]] std::int64_t total() const;
  void add(std::span<const int> outcomes);

  /// Counts of the first n outcomes of every record (n <= n_seq).
  [[nodiscard]] TrajectoryCounts prefix(int n) const;

  /// "0110"-style key for an outcome index.
  [[nodiscard]] std::string key(std::uint64_t index) const;
  static std::uint64_t parse_key(const std::string& bits);
};

/// M protocol runs sampled at the model temperature; run k uses stream (seed, k).
TrajectoryCounts simulate_counts(const ProtocolModel& model, int n_seq, std::int64_t m, std::uint64_t seed);

/// Leaf probabilities p(record | T) for every grid temperature.
struct LikelihoodTable {
  int n_seq = 0;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> probs;  // [grid index][outcome index]
};

/// Exact trees at each grid temperature (parallel over the grid).
LikelihoodTable build_likelihood_table(const ProtocolConfig& cfg, std::span<const double> t_grid);

/// Table for the first n outcomes, obtained by summing over later outcomes.
LikelihoodTable marginalize(const LikelihoodTable& table, int n);

/// sum_i k_i ln p_i; -infinity when an observed record has zero probability.
double log_likelihood(const TrajectoryCounts& counts, std::span<const double> probs);

struct PosteriorGrid {
  std::vector<double> t_grid;
  std::vector<double> density;
};

/// Normalized posterior (trapezoidal rule) under a uniform prior.
PosteriorGrid posterior(const TrajectoryCounts& counts, const LikelihoodTable& table);
/// Same, from precomputed log-likelihoods on the grid.
PosteriorGrid posterior_from_log_likelihood(std::span<const double> t_grid, std::span<const double> log_like);

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mode = 0.0;
  bool resolution_limited = false;  // std < 3 grid steps
};

PosteriorMoments posterior_moments(const PosteriorGrid& pg);

/// Trapezoidal integral of y over the ascending grid x.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace seqtherm
