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

// Microscopic (eigenbasis) Lindblad generator for a chain whose spins each
// couple to a common bath through sigma_x. Rates obey detailed balance:
// kappa(omega) = kappa for decay, kappa(-omega) = exp(-omega/T) kappa for
// excitation, so the Gibbs state at T is stationary.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqtherm/numerics.hpp"
#include "seqtherm/spin_model.hpp"

namespace seqtherm {

inline constexpr double kDefaultOmegaTol = 1e-9;

/// A positive Bohr frequency and every eigenpair (m, n) with e_m - e_n = omega.
struct BohrTransition {
  double omega = 0.0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // (upper m, lower n)
};

/// Positive gaps grouped within omega_tol, ascending. Gaps <= omega_tol are dropped.
std::vector<BohrTransition> bohr_frequencies(const Spectrum& s, double omega_tol = kDefaultOmegaTol);

/// How eigenpairs are combined into jump operators.
///  kFrequency: one operator per (site, Bohr frequency) summing every pair with
///              that gap. Sum_j sigma_x^j then commutes with H and every jump,
///              so the stationary state is not unique.
///  kEigenPair: one operator per (site, eigenpair). Relaxes any state to the
///              Gibbs state; depends on the eigenbasis chosen inside
///              degenerate levels.
enum class JumpGrouping { kFrequency, kEigenPair };

std::string to_string(JumpGrouping g);
JumpGrouping parse_jump_grouping(const std::string& name);

/// Same spectrum with each degenerate eigenspace re-diagonalized against
/// K = sum_j (1 + j / (4N)) sigma_z^j, so that eigen-pair jumps do not depend
/// on the solver's arbitrary choice inside degenerate levels. K commutes with
/// total S_z, so the returned vectors have definite magnetization.
Spectrum canonical_spectrum(const Spectrum& s, double omega_tol = kDefaultOmegaTol);

struct JumpOperator {
  int site = 0;
  double omega = 0.0;
  ComplexMatrix op;  // A_j(omega): lowers energy by omega
};

/// A_j(omega) = sum over pairs of |e_n><e_n| sigma_x^j |e_m><e_m|, one per
/// transition (kFrequency), or one operator per pair with a non-zero matrix
/// element (kEigenPair).
std::vector<JumpOperator> build_jump_operators(const Spectrum& s, int site,
                                               std::span<const BohrTransition> transitions,
                                               JumpGrouping grouping = JumpGrouping::kFrequency);

/// The part of sigma_x^site connecting eigenlevels closer than omega_tol.
ComplexMatrix zero_frequency_block(const Spectrum& s, int site, double omega_tol = kDefaultOmegaTol);

/// Column-stacking superoperators: vec(A X B) = (B^T kron A) vec(X).
ComplexMatrix left_right_superop(const ComplexMatrix& left, const ComplexMatrix& right);

class LindbladModel {
 public:
  /// Builds jumps for every site of the chain.
  LindbladModel(const ChainParams& chain, double kappa, double temperature,
                JumpGrouping grouping = JumpGrouping::kEigenPair, double omega_tol = kDefaultOmegaTol);

  [[nodiscard]] const ChainParams& chain() const { return chain_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double temperature() const { return temperature_; }
  [[nodiscard]] JumpGrouping grouping() const { return grouping_; }
  [[nodiscard]] const ComplexMatrix& hamiltonian() const { return hamiltonian_; }
  [[nodiscard]] const Spectrum& spectrum() const { return spectrum_; }
  [[nodiscard]] const std::vector<JumpOperator>& jumps() const { return jumps_; }
  [[nodiscard]] const std::vector<BohrTransition>& transitions() const { return transitions_; }
  [[nodiscard]] const ComplexMatrix& superoperator() const { return liouvillian_; }
  [[nodiscard]] const DensityMatrix& gibbs() const { return gibbs_; }

  [[nodiscard]] double rate_down(double omega) const;
  [[nodiscard]] double rate_up(double omega) const;

  /// L[rho] evaluated directly from the operator form, not the superoperator.
  [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho) const;

  /// exp(L t); served from the cache when t was precomputed.
  [[nodiscard]] ComplexMatrix propagator(double t) const;

  /// Eagerly fills the propagator cache. Not thread-safe; call before sharing.
  void precompute(std::span<const double> times);

  /// rho(t) = exp(L t) rho0. Throws NumericalError if the result has an
  /// eigenvalue below -1e-6.
  [[nodiscard]] DensityMatrix propagate(const DensityMatrix& rho0, double t) const;

 private:
  ChainParams chain_;
  double kappa_;
  double temperature_;
  JumpGrouping grouping_;
  ComplexMatrix hamiltonian_;
  Spectrum spectrum_;
  std::vector<BohrTransition> transitions_;
  std::vector<JumpOperator> jumps_;
  ComplexMatrix liouvillian_;
  DensityMatrix gibbs_;
  std::map<double, ComplexMatrix> cache_;
};

/// Apply a column-stacking superoperator to a density matrix.
ComplexMatrix apply_superop(const ComplexMatrix& superop, const ComplexMatrix& rho);

/// exp(-iHt) rho exp(iHt).
ComplexMatrix unitary_evolve(const Spectrum& h, const ComplexMatrix& rho, double t);

/// Smallest t = k dt (k = 0, 1, ...) with fidelity(rho(t), rho_th) >= 0.95, or
/// nothing if it is not reached by t_max.
std::optional<double> thermalization_time_t95(const LindbladModel& model, const DensityMatrix& rho0,
                                              double t_max, double dt);

/// Fidelity with the Gibbs state on the grid t = k dt, k = 0..steps.
std::vector<double> fidelity_trace(const LindbladModel& model, const DensityMatrix& rho0, double dt,
                                   std::size_t steps);

/// Ginibre-sampled full-rank density matrix, deterministic in `seed`.
DensityMatrix random_density_matrix(int n_qubits, std::uint64_t seed);

}  // namespace seqtherm
