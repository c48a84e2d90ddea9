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

// Classical Fisher information about the temperature.
//
// Temperature derivatives are central differences over models rebuilt at
// T - dT and T + dT; both the Gibbs state and the detailed-balance rates of
// the Liouvillian depend on T.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqtherm/protocol.hpp"

namespace seqtherm {

inline constexpr double kFisherProbabilityFloor = 1e-12;

struct DerivativeScheme {
  double delta_t = 1e-4;

  /// max(1e-4 J, T / 1e4).
  static DerivativeScheme for_temperature(double t);
  /// delta_t > 0 and delta_t <= T / 100.
  void validate(double t) const;
};

enum class FisherMethod { kExact, kMonteCarlo };

std::string to_string(FisherMethod m);

/// F^(n) for n = 1..n_seq. values[k] is F^(k+1), increments[k] is dF^(k+1).
struct FisherSeries {
  FisherMethod method = FisherMethod::kExact;
  std::vector<double> values;
  std::vector<double> increments;
  std::size_t mc_samples = 0;                 // Monte-Carlo only
  std::vector<double> increment_std_errors;  // Monte-Carlo only
  std::vector<double> value_std_errors;      // Monte-Carlo only
  double pruned_mass = 0.0;                  // exact only

  [[nodiscard]] double at(int n) const { return values.at(static_cast<std::size_t>(n - 1)); }
};

/// sum_j (dp_j/dT)^2 / p_j from distributions at T - dT, T, T + dT.
double cfi_static(std::span<const double> p_minus, std::span<const double> p_center,
                  std::span<const double> p_plus, const DerivativeScheme& scheme);

/// Exact F^(n) by walking the full outcome tree at three temperatures.
FisherSeries exact_sequential_cfi(const ProtocolConfig& cfg, const DerivativeScheme& scheme);
FisherSeries exact_sequential_cfi(const ProtocolConfig& cfg);

struct McSequentialResult {
  FisherSeries fisher;
  /// Mean entropy of the conditional state after n measurements, n = 0..n_seq
  /// (empty unless requested).
  std::vector<double> entropy_mean;
  std::vector<double> entropy_std_error;
};

/// Monte-Carlo estimate of dF^(n): trajectories are sampled at T and replayed
/// with the same outcome record at T +- dT. Deterministic in master_seed.
McSequentialResult mc_sequential_run(const ProtocolConfig& cfg, const DerivativeScheme& scheme,
                                     std::size_t mu, std::uint64_t master_seed, bool track_entropy);
FisherSeries mc_sequential_cfi(const ProtocolConfig& cfg, const DerivativeScheme& scheme, std::size_t mu,
                               std::uint64_t master_seed);

struct NseqStar {
  std::optional<int> n_star;
  double ratio = 0.0;        // F^(n*) / Q, or F^(n_max) / Q when not found
  double fisher = 0.0;       // F at n* (or at n_max)
  bool used_monte_carlo = false;
  FisherSeries series;
};

/// Smallest n <= n_max with F^(n) > q_reference. Exact up to n = exact_limit
/// (at most 20); beyond that, Monte-Carlo with mu samples requiring
/// F - 3 SE > Q.
NseqStar find_nseq_star(const ProtocolConfig& cfg, double q_reference, int n_max, std::size_t mu = 1000,
                        std::uint64_t master_seed = 1, int exact_limit = kMaxExactDepth);

}  // namespace seqtherm
