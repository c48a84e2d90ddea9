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

// Ferromagnetic open Heisenberg chain H = -J sum_j sigma^j . sigma^{j+1}
// and the thermodynamics of its Gibbs state (k_B = 1, energies in units of J).

#pragma once

#include <span>
#include <vector>

#include "seqtherm/numerics.hpp"

namespace seqtherm {

struct ChainParams {
  int n_spins = 4;
  double coupling = 1.0;  // J > 0

  /// Throws ValidationError (bad values) or ResourceError (n_spins > 10).
  void validate() const;
  [[nodiscard]] Eigen::Index dim() const { return Eigen::Index{1} << n_spins; }
};

ComplexMatrix build_hamiltonian(const ChainParams& p);

/// Sum_j sigma_z^j.
ComplexMatrix total_sigma_z(int n_spins);

struct EnergyMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Equilibrium state of the chain at temperature T.
///
/// The Boltzmann weights are evaluated relative to the ground energy, so the
/// state is well defined for any T > 0 without overflow.
class ThermalProbe {
 public:
  ThermalProbe(const ChainParams& params, double temperature);
  ThermalProbe(const ChainParams& params, Spectrum spectrum, double temperature);

  [[nodiscard]] const ChainParams& params() const { return params_; }
  [[nodiscard]] double temperature() const { return temperature_; }
  [[nodiscard]] const ComplexMatrix& hamiltonian() const { return hamiltonian_; }
  [[nodiscard]] const Spectrum& spectrum() const { return spectrum_; }
  [[nodiscard]] const DensityMatrix& gibbs() const { return gibbs_; }
  /// Boltzmann populations of the eigenlevels (same order as spectrum()).
  [[nodiscard]] const RealVector& populations() const { return populations_; }

  /// ln Z(T); Z itself overflows for T well below the gap scale.
  [[nodiscard]] double log_partition_function() const { return log_z_; }
  [[nodiscard]] double partition_function() const;

 private:
  ChainParams params_;
  double temperature_;
  ComplexMatrix hamiltonian_;
  Spectrum spectrum_;
  RealVector populations_;
  double log_z_ = 0.0;
  DensityMatrix gibbs_;
};

ThermalProbe gibbs_state(const ChainParams& p, double temperature);

EnergyMoments energy_moments(const ThermalProbe& tp);

/// Thermal quantum Fisher information (Delta H)^2 / T^4.
double qfi_thermal(const ThermalProbe& tp);

/// C_T = (Delta H)^2 / T^2 = d<H>/dT.
double heat_capacity(const ThermalProbe& tp);

/// Spectral shortcut used by scans: moments from eigenvalues only.
EnergyMoments energy_moments(const RealVector& energies, double temperature);

struct TStarResult {
  double t_star = 0.0;
  double q_max = 0.0;
  std::size_t grid_index = 0;  // argmax on the coarse grid
};

/// Grid argmax of qfi_thermal (ties to smaller T) followed by one refinement
/// pass on a 41-point grid spanning the neighbouring coarse cells.
TStarResult find_t_star(const ChainParams& p, std::span<const double> t_grid);

/// Uniform grid of `count` points on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Closed-form thermal expressions for the two- and three-spin chains.
namespace closed_form {
double mean_energy_n2(double j, double t);
double mean_energy_n3(double j, double t);
double qfi_n2(double j, double t);
double qfi_n3(double j, double t);
}  // namespace closed_form

}  // namespace seqtherm
