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

// Sequential single-site measurement protocol.
//
// One run: start from the Gibbs state; repeat n_seq times { evolve for tau,
// measure sigma_z on the measured site, keep the collapsed state }; then
// reset to the Gibbs state for the next run.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "seqtherm/numerics.hpp"
#include "seqtherm/open_dynamics.hpp"
#include "seqtherm/rng.hpp"
#include "seqtherm/spin_model.hpp"

namespace seqtherm {

inline constexpr double kBranchFloor = 1e-12;
inline constexpr int kMaxExactDepth = 20;

/// Two-outcome sigma_z projective measurement on one site:
/// outcome 0 <-> (I + sigma_z)/2, outcome 1 <-> (I - sigma_z)/2.
class LocalPovm {
 public:
  LocalPovm(int site, int n_qubits);

  [[nodiscard]] int site() const { return site_; }
  [[nodiscard]] int n_qubits() const { return n_; }
  [[nodiscard]] ComplexMatrix projector(int outcome) const;

  /// Tr[Pi_outcome rho], rho need not be normalized.
  [[nodiscard]] double probability(const ComplexMatrix& rho, int outcome) const;
  /// Pi rho Pi (unnormalized).
  [[nodiscard]] ComplexMatrix project(const ComplexMatrix& rho, int outcome) const;

 private:
  [[nodiscard]] int bit(Eigen::Index basis_index) const {
    return static_cast<int>((basis_index >> (n_ - site_)) & 1);
  }
  int site_;
  int n_;
};

struct Branch {
  int outcome = 0;
  double probability = 0.0;
  std::optional<DensityMatrix> post_state;  // empty when probability < kBranchFloor
};

std::array<Branch, 2> measure_site(const DensityMatrix& rho, const LocalPovm& povm);

/// How the probe evolves between measurements.
enum class StepDynamics {
  kAuto,   // unitary when kappa == 0, Lindblad otherwise
  kReset,  // full rethermalization: the state is replaced by the Gibbs state
};

struct ProtocolConfig {
  ChainParams chain;
  double temperature = 1.0;
  double kappa = 1.0;
  double tau = 4.0;
  int n_seq = 1;
  int measured_site = 0;  // 0 selects the last site, N
  StepDynamics dynamics = StepDynamics::kAuto;
  JumpGrouping grouping = JumpGrouping::kEigenPair;

  void validate() const;
  [[nodiscard]] int site() const { return measured_site == 0 ? chain.n_spins : measured_site; }
};

/// One inter-measurement evolution step at a fixed temperature, as a linear
/// map on (possibly unnormalized) density matrices.
class StepChannel {
 public:
  struct Unitary {
    ComplexMatrix u;
    /// Basis indices grouped by magnetization. u never mixes sectors, so the
    /// product is formed block by block and zero blocks of rho are skipped.
    std::vector<std::vector<Eigen::Index>> sectors;
    std::vector<ComplexMatrix> blocks;  // u restricted to each sector
  };
  struct Lindblad {
    ComplexMatrix propagator;  // exp(L tau) on column-stacked matrices; empty when reduced
    /// Column-stacked positions (r, c) with equal magnetization of r and c.
    /// When non-empty, exp(L tau) maps that subspace into itself and only the
    /// restricted block is stored; inputs must be supported on it.
    std::vector<Eigen::Index> support;
    ComplexMatrix reduced;
  };
  struct Reset {
    ComplexMatrix gibbs;
  };

  explicit StepChannel(std::variant<Unitary, Lindblad, Reset> impl) : impl_(std::move(impl)) {}

  [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho) const;
  [[nodiscard]] bool is_unitary() const { return std::holds_alternative<Unitary>(impl_); }
  [[nodiscard]] bool is_reset() const { return std::holds_alternative<Reset>(impl_); }

 private:
  std::variant<Unitary, Lindblad, Reset> impl_;
};

/// Everything needed to run the protocol at one temperature.
struct ProtocolModel {
  double temperature = 0.0;
  ComplexMatrix initial;  // Gibbs state
  StepChannel step;
  LocalPovm povm;
};

/// Model at temperature `t` (defaults to cfg.temperature). The temperature
/// enters through the Gibbs state and, for open dynamics, the KMS rates.
ProtocolModel build_protocol_model(const ProtocolConfig& cfg, std::optional<double> t = std::nullopt);

struct Trajectory {
  std::vector<int> outcomes;
  double probability = 1.0;
  std::vector<double> step_probabilities;
  DensityMatrix final_state;
};

struct TrajectoryTree {
  std::vector<Trajectory> leaves;  // reachable leaves, ascending outcome index
  double pruned_mass = 0.0;
};

/// Computational-basis indices grouped by number of down spins, 0..n.
std::vector<std::vector<Eigen::Index>> magnetization_sectors(int n_qubits);

/// Index of an outcome record with the first outcome as most significant bit.
std::uint64_t outcome_index(std::span<const int> outcomes);

/// All reachable outcome records of length n_seq with their final states.
/// Throws ResourceError for n_seq > 20.
TrajectoryTree enumerate_trajectory_tree(const ProtocolConfig& cfg, const ProtocolModel& model);
TrajectoryTree enumerate_trajectory_tree(const ProtocolConfig& cfg);

/// Leaf probabilities only, indexed by outcome_index (size 2^n_seq, pruned
/// leaves are 0). Memory is O(n_seq) matrices plus the output vector.
std::vector<double> trajectory_probabilities(const ProtocolModel& model, int n_seq);

/// One protocol run with outcomes drawn from the Born rule.
Trajectory sample_trajectory(const ProtocolModel& model, int n_seq, RngStream& rng);

/// Computational-basis distribution of sites 1..n_measured of the Gibbs state.
std::vector<double> multi_site_probabilities(const ThermalProbe& tp, int n_measured);

struct SampleMean {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Exact outcome-averaged entropy of the conditional state after n = 1..n_seq
/// measurements (sum over the tree of P(record) S(rho_record)).
std::vector<double> exact_average_entropy(const ProtocolModel& model, int n_seq);

/// Mean von Neumann entropy of the final states and its standard error.
SampleMean average_entropy(std::span<const Trajectory> samples);

}  // namespace seqtherm
