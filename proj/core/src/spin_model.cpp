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

#include "seqtherm/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seqtherm {

void ChainParams::validate() const {
  if (n_spins < 2) throw ValidationError("chain needs at least 2 spins, got " + std::to_string(n_spins));
  if (n_spins > kMaxQubits) {
    throw ResourceError("chain of " + std::to_string(n_spins) + " spins exceeds the limit of " +
                        std::to_string(kMaxQubits));
  }
  if (!(coupling > 0.0) || !std::isfinite(coupling)) {
    throw ValidationError("exchange coupling J must be positive and finite");
  }
}

ComplexMatrix build_hamiltonian(const ChainParams& p) {
  p.validate();
  const int n = p.n_spins;
  const Eigen::Index dim = p.dim();
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  // sigma.sigma on a bond: ZZ is diagonal (+1 aligned, -1 anti-aligned);
  // XX + YY maps |01> <-> |10> with amplitude 2 and kills aligned pairs.
  for (Eigen::Index b = 0; b < dim; ++b) {
    double diag = 0.0;
    for (int j = 1; j < n; ++j) {
      const int sa = n - j;
      const int sb = n - j - 1;
      const bool ba = (b >> sa) & 1;
      const bool bb = (b >> sb) & 1;
      if (ba == bb) {
        diag += 1.0;
      } else {
        diag -= 1.0;
        const Eigen::Index flipped = b ^ ((Eigen::Index{1} << sa) | (Eigen::Index{1} << sb));
        h(flipped, b) += -2.0 * p.coupling;
      }
    }
    h(b, b) = -p.coupling * diag;
  }
  return h;
}

ComplexMatrix total_sigma_z(int n_spins) {
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    int ones = 0;
    for (int k = 0; k < n_spins; ++k) ones += static_cast<int>((b >> k) & 1);
    m(b, b) = static_cast<double>(n_spins - 2 * ones);
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

void require_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ValidationError("temperature must be positive and finite, got " + std::to_string(t));
  }
}

}  // namespace

ThermalProbe::ThermalProbe(const ChainParams& params, double temperature)
    : ThermalProbe(params, eig_hermitian(build_hamiltonian(params)), temperature) {}

ThermalProbe::ThermalProbe(const ChainParams& params, Spectrum spectrum, double temperature)
    : params_(params),
      temperature_(temperature),
      spectrum_(std::move(spectrum)),
      gibbs_(DensityMatrix::maximally_mixed(params.dim())) {
  params_.validate();
  require_temperature(temperature);
  hamiltonian_ = build_hamiltonian(params_);

  const RealVector& e = spectrum_.eigenvalues;
  const double e0 = e.minCoeff();
  populations_.resize(e.size());
  double z_shifted = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    populations_[i] = std::exp(-(e[i] - e0) / temperature);
    z_shifted += populations_[i];
  }
  populations_ /= z_shifted;
  log_z_ = std::log(z_shifted) - e0 / temperature;

  ComplexMatrix rho = spectrum_.eigenvectors * populations_.cast<Complex>().asDiagonal() *
                      spectrum_.eigenvectors.adjoint();
  gibbs_ = DensityMatrix::trusted(std::move(rho));
}

double ThermalProbe::partition_function() const { return std::exp(log_z_); }

ThermalProbe gibbs_state(const ChainParams& p, double temperature) {
  return ThermalProbe(p, temperature);
}

namespace {

// Moments from level offsets above the ground energy. Levels within round-off
// of the ground energy are set exactly to it: at low T the true variance
// (~exp(-gap/T)) is far below the eigensolver's 1e-15 scatter inside the
// ground multiplet.
EnergyMoments moments_from_offsets(const RealVector& energies, const RealVector& weights) {
  const double e0 = energies.minCoeff();
  const double tol = 1e-9 * std::max(1.0, std::abs(e0));
  RealVector d = energies.array() - e0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < tol) d[i] = 0.0;
  }
  const double z = weights.sum();
  const double shift = weights.dot(d) / z;
  double var = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) var += weights[i] * (d[i] - shift) * (d[i] - shift);
  return {e0 + shift, var / z};
}

}  // namespace

EnergyMoments energy_moments(const RealVector& energies, double temperature) {
  require_temperature(temperature);
  const double e0 = energies.minCoeff();
  const RealVector w = (-(energies.array() - e0) / temperature).exp();
  return moments_from_offsets(energies, w);
}

EnergyMoments energy_moments(const ThermalProbe& tp) {
  return moments_from_offsets(tp.spectrum().eigenvalues, tp.populations());
}

double qfi_thermal(const ThermalProbe& tp) {
  const double t = tp.temperature();
  return energy_moments(tp).variance / (t * t * t * t);
}

double heat_capacity(const ThermalProbe& tp) {
  const double t = tp.temperature();
  return energy_moments(tp).variance / (t * t);
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

TStarResult find_t_star(const ChainParams& p, std::span<const double> t_grid) {
  if (t_grid.empty()) throw ValidationError("find_t_star: empty temperature grid");
  const RealVector energies = eig_hermitian(build_hamiltonian(p)).eigenvalues;
  auto q_at = [&](double t) { return energy_moments(energies, t).variance / std::pow(t, 4); };

  std::size_t best = 0;
  double q_best = q_at(t_grid[0]);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    const double q = q_at(t_grid[i]);
    if (q > q_best) {  // strict: ties stay at the smaller T
      q_best = q;
      best = i;
    }
  }
  TStarResult out{t_grid[best], q_best, best};
  if (t_grid.size() < 3) return out;

  const double lo = t_grid[best == 0 ? 0 : best - 1];
  const double hi = t_grid[best + 1 == t_grid.size() ? best : best + 1];
  for (double t : linspace(lo, hi, 41)) {
    if (!(t > 0.0)) continue;
    const double q = q_at(t);
    if (q > out.q_max) {
      out.q_max = q;
      out.t_star = t;
    }
  }
  return out;
}

namespace closed_form {

double mean_energy_n2(double j, double t) { return 4.0 * j / (3.0 * std::exp(4.0 * j / t) + 1.0) - j; }

double mean_energy_n3(double j, double t) {
  const double e4 = std::exp(4.0 * j / t);
  const double e6 = std::exp(6.0 * j / t);
  return 4.0 * j * (1.0 - e6) / (e4 + 2.0 * e6 + 1.0);
}

double qfi_n2(double j, double t) {
  const double x = 2.0 * j / t;
  const double d = std::sinh(x) + 2.0 * std::cosh(x);
  return 12.0 * j * j / (std::pow(t, 4) * d * d);
}

double qfi_n3(double j, double t) {
  const double e2 = std::exp(2.0 * j / t);
  const double e4 = std::exp(4.0 * j / t);
  const double e6 = std::exp(6.0 * j / t);
  const double den = e4 + 2.0 * e6 + 1.0;
  return 8.0 * j * j * e4 * (9.0 * e2 + e6 + 2.0) / (std::pow(t, 4) * den * den);
}

}  // namespace closed_form

}  // namespace seqtherm
