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

#include "seqtherm/open_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "seqtherm/rng.hpp"

namespace seqtherm {

std::vector<BohrTransition> bohr_frequencies(const Spectrum& s, double omega_tol) {
  if (!(omega_tol > 0.0)) throw ValidationError("bohr_frequencies: omega_tol must be positive");
  struct Gap {
    double omega;
    Eigen::Index m;
    Eigen::Index n;
  };
  std::vector<Gap> gaps;
  const auto& e = s.eigenvalues;
  for (Eigen::Index m = 0; m < e.size(); ++m) {
    for (Eigen::Index n = 0; n < e.size(); ++n) {
      const double g = e[m] - e[n];
      if (g > omega_tol) gaps.push_back({g, m, n});
    }
  }
  std::stable_sort(gaps.begin(), gaps.end(),
                   [](const Gap& a, const Gap& b) { return a.omega < b.omega; });

  std::vector<BohrTransition> out;
  for (const Gap& g : gaps) {
    // Clusters are anchored at their first (smallest) member.
    if (out.empty() || g.omega - out.back().omega > omega_tol) {
      out.push_back({g.omega, {}});
    }
    out.back().pairs.emplace_back(g.m, g.n);
  }
  // Report each cluster at its mean gap.
  for (BohrTransition& t : out) {
    double sum = 0.0;
    for (auto [m, n] : t.pairs) sum += e[m] - e[n];
    t.omega = sum / static_cast<double>(t.pairs.size());
  }
  return out;
}

Spectrum canonical_spectrum(const Spectrum& s, double omega_tol) {
  const int n = qubit_count(s.dim());
  RealVector k_diag = RealVector::Zero(s.dim());
  for (int j = 1; j <= n; ++j) {
    const double w = 1.0 + static_cast<double>(j) / (4.0 * n);
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
      const bool up = ((i >> (n - j)) & 1) == 0;  // site 1 is the most significant bit
      k_diag[i] += up ? w : -w;
    }
  }
  Spectrum out = s;
  Eigen::Index start = 0;
  while (start < s.dim()) {
    Eigen::Index end = start + 1;
    while (end < s.dim() && s.eigenvalues[end] - s.eigenvalues[start] <= omega_tol) ++end;
    const Eigen::Index size = end - start;
    if (size > 1) {
      const ComplexMatrix v = s.eigenvectors.middleCols(start, size);
      ComplexMatrix k_block = v.adjoint() * k_diag.asDiagonal() * v;
      k_block = 0.5 * (k_block + k_block.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(k_block);
      out.eigenvectors.middleCols(start, size) = v * solver.eigenvectors();
    }
    start = end;
  }
  return out;
}

std::string to_string(JumpGrouping g) { return g == JumpGrouping::kFrequency ? "frequency" : "eigenpair"; }

JumpGrouping parse_jump_grouping(const std::string& name) {
  if (name == "frequency") return JumpGrouping::kFrequency;
  if (name == "eigenpair") return JumpGrouping::kEigenPair;
  throw ValidationError("unknown jump grouping '" + name + "' (expected frequency or eigenpair)");
}

std::vector<JumpOperator> build_jump_operators(const Spectrum& s, int site,
                                               std::span<const BohrTransition> transitions,
                                               JumpGrouping grouping) {
  const int n = qubit_count(s.dim());
  const ComplexMatrix sx = embed_site_operator(pauli::x(), site, n);
  // sigma_x in the eigenbasis.
  const ComplexMatrix x_eig = s.eigenvectors.adjoint() * sx * s.eigenvectors;

  std::vector<JumpOperator> out;
  out.reserve(transitions.size());
  if (grouping == JumpGrouping::kEigenPair) {
    for (const BohrTransition& t : transitions) {
      for (auto [m, lo] : t.pairs) {
        if (std::abs(x_eig(lo, m)) < 1e-12) continue;
        out.push_back({site, t.omega, x_eig(lo, m) * s.eigenvectors.col(lo) * s.eigenvectors.col(m).adjoint()});
      }
    }
    return out;
  }
  for (const BohrTransition& t : transitions) {
    ComplexMatrix a_eig = ComplexMatrix::Zero(s.dim(), s.dim());
    for (auto [m, lo] : t.pairs) a_eig(lo, m) = x_eig(lo, m);
    out.push_back({site, t.omega, s.eigenvectors * a_eig * s.eigenvectors.adjoint()});
  }
  return out;
}

ComplexMatrix zero_frequency_block(const Spectrum& s, int site, double omega_tol) {
  const int n = qubit_count(s.dim());
  const ComplexMatrix sx = embed_site_operator(pauli::x(), site, n);
  ComplexMatrix x_eig = s.eigenvectors.adjoint() * sx * s.eigenvectors;
  for (Eigen::Index r = 0; r < s.dim(); ++r) {
    for (Eigen::Index c = 0; c < s.dim(); ++c) {
      if (std::abs(s.eigenvalues[r] - s.eigenvalues[c]) > omega_tol) x_eig(r, c) = 0.0;
    }
  }
  return s.eigenvectors * x_eig * s.eigenvectors.adjoint();
}

ComplexMatrix left_right_superop(const ComplexMatrix& left, const ComplexMatrix& right) {
  return Eigen::kroneckerProduct(right.transpose(), left).eval();
}

ComplexMatrix apply_superop(const ComplexMatrix& superop, const ComplexMatrix& rho) {
  const Eigen::Index d = rho.rows();
  ComplexMatrix out(d, d);
  Eigen::Map<ComplexVector>(out.data(), d * d).noalias() =
      superop * Eigen::Map<const ComplexVector>(rho.data(), d * d);
  return out;
}

// ---------------------------------------------------------------------------

LindbladModel::LindbladModel(const ChainParams& chain, double kappa, double temperature,
                             JumpGrouping grouping, double omega_tol)
    : chain_(chain),
      kappa_(kappa),
      temperature_(temperature),
      grouping_(grouping),
      gibbs_(DensityMatrix::maximally_mixed(2)) {
  chain_.validate();
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ValidationError("thermalization rate kappa must be >= 0, got " + std::to_string(kappa));
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive, got " + std::to_string(temperature));
  }
  ThermalProbe probe(chain_, temperature_);
  hamiltonian_ = probe.hamiltonian();
  spectrum_ = probe.spectrum();
  gibbs_ = probe.gibbs();
  transitions_ = bohr_frequencies(spectrum_, omega_tol);
  const Spectrum jump_basis =
      grouping_ == JumpGrouping::kEigenPair ? canonical_spectrum(spectrum_, omega_tol) : spectrum_;
  for (int j = 1; j <= chain_.n_spins; ++j) {
    auto site_jumps = build_jump_operators(jump_basis, j, transitions_, grouping_);
    jumps_.insert(jumps_.end(), std::make_move_iterator(site_jumps.begin()),
                  std::make_move_iterator(site_jumps.end()));
  }

  const Eigen::Index d = chain_.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const Complex mi(0.0, -1.0);
  liouvillian_ = mi * (left_right_superop(hamiltonian_, id) - left_right_superop(id, hamiltonian_));
  if (kappa_ > 0.0) {
    auto add_dissipator = [&](const ComplexMatrix& a, double rate) {
      if (rate <= 0.0) return;
      const ComplexMatrix ada = a.adjoint() * a;
      liouvillian_ += rate * (left_right_superop(a, a.adjoint()) -
                              0.5 * left_right_superop(ada, id) - 0.5 * left_right_superop(id, ada));
    };
    for (const JumpOperator& j : jumps_) {
      add_dissipator(j.op, rate_down(j.omega));
      add_dissipator(j.op.adjoint(), rate_up(j.omega));
    }
  }
}

double LindbladModel::rate_down(double /*omega*/) const { return kappa_; }

double LindbladModel::rate_up(double omega) const { return std::exp(-omega / temperature_) * kappa_; }

ComplexMatrix LindbladModel::apply(const ComplexMatrix& rho) const {
  const Complex mi(0.0, -1.0);
  ComplexMatrix out = mi * (hamiltonian_ * rho - rho * hamiltonian_);
  if (kappa_ == 0.0) return out;
  auto dissipate = [&](const ComplexMatrix& a, double rate) {
    if (rate <= 0.0) return;
    const ComplexMatrix ada = a.adjoint() * a;
    out += rate * (a * rho * a.adjoint() - 0.5 * (ada * rho + rho * ada));
  };
  for (const JumpOperator& j : jumps_) {
    dissipate(j.op, rate_down(j.omega));
    dissipate(j.op.adjoint(), rate_up(j.omega));
  }
  return out;
}

ComplexMatrix LindbladModel::propagator(double t) const {
  if (!(t >= 0.0)) throw ValidationError("propagation time must be >= 0");
  if (auto it = cache_.find(t); it != cache_.end()) return it->second;
  if (t == 0.0) return ComplexMatrix::Identity(liouvillian_.rows(), liouvillian_.cols());
  return (liouvillian_ * t).exp();
}

void LindbladModel::precompute(std::span<const double> times) {
  for (double t : times) {
    if (cache_.find(t) == cache_.end()) cache_.emplace(t, propagator(t));
  }
}

DensityMatrix LindbladModel::propagate(const DensityMatrix& rho0, double t) const {
  if (rho0.dim() != chain_.dim()) throw ValidationError("propagate: state dimension mismatch");
  if (t == 0.0) return rho0;
  ComplexMatrix out = apply_superop(propagator(t), rho0.matrix());
  out = 0.5 * (out + out.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(out, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  if (lo < -1e-6) {
    throw NumericalError("propagate: state lost positivity (eigenvalue " + std::to_string(lo) +
                         ") at t=" + std::to_string(t));
  }
  return DensityMatrix::trusted(std::move(out));
}

ComplexMatrix unitary_evolve(const Spectrum& h, const ComplexMatrix& rho, double t) {
  const ComplexMatrix u = operator_function(h, [t](double e) { return std::exp(Complex(0.0, -e * t)); });
  return u * rho * u.adjoint();
}

namespace {

DensityMatrix as_state(ComplexMatrix m) {
  m = 0.5 * (m + m.adjoint()).eval();
  m /= m.trace().real();
  return DensityMatrix::trusted(std::move(m));
}

}  // namespace

std::optional<double> thermalization_time_t95(const LindbladModel& model, const DensityMatrix& rho0,
                                              double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max > 0.0)) throw ValidationError("t95: dt and t_max must be positive");
  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  const ComplexMatrix step = model.propagator(dt);
  ComplexMatrix rho = rho0.matrix();
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k > 0) rho = apply_superop(step, rho);
    if (fidelity(as_state(rho), model.gibbs()) >= 0.95) return static_cast<double>(k) * dt;
  }
  return std::nullopt;
}

std::vector<double> fidelity_trace(const LindbladModel& model, const DensityMatrix& rho0, double dt,
                                   std::size_t steps) {
  const ComplexMatrix step = model.propagator(dt);
  ComplexMatrix rho = rho0.matrix();
  std::vector<double> out;
  out.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k > 0) rho = apply_superop(step, rho);
    out.push_back(fidelity(as_state(rho), model.gibbs()));
  }
  return out;
}

DensityMatrix random_density_matrix(int n_qubits, std::uint64_t seed) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw ValidationError("random_density_matrix: bad size");
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  RngStream rng(seed, 0);
  ComplexMatrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = Complex(rng.normal(), rng.normal());
  }
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

}  // namespace seqtherm
