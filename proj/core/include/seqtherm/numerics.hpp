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

// Dense complex linear algebra for small qubit registers.
//
// Conventions used throughout the library:
//   * sites are 1-based; site 1 is the most significant bit of a
//     computational-basis index, so |b_1 b_2 ... b_N> has index sum b_j 2^(N-j);
//   * bit value 0 is the sigma_z = +1 state ("up"), bit value 1 is sigma_z = -1;
//   * logarithms are natural (k_B = 1).

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "seqtherm/errors.hpp"

namespace seqtherm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPsdSlack = 1e-9;
inline constexpr double kEntropyFloor = 1e-14;
}  // namespace tol

/// Largest register the dense kernels accept (dim 2^10).
inline constexpr int kMaxQubits = 10;

/// Eigendecomposition of a Hermitian matrix: M = V diag(eigenvalues) V^dagger,
/// eigenvalues ascending, eigenvectors stored as the columns of V.
struct Spectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  [[nodiscard]] Eigen::Index dim() const { return eigenvalues.size(); }
  [[nodiscard]] ComplexMatrix reconstruct() const;
};

/// Relative Hermiticity defect ||M - M^dagger||_F / max(1, ||M||_F).
double hermiticity_defect(const ComplexMatrix& m);

/// Number of qubits n with 2^n == dim; throws ValidationError otherwise.
int qubit_count(Eigen::Index dim);

Spectrum eig_hermitian(const ComplexMatrix& m);

/// V diag(f(eps)) V^dagger.
ComplexMatrix operator_function(const Spectrum& s, const std::function<Complex(double)>& f);

/// A trace-one, Hermitian, numerically positive semidefinite matrix.
///
/// Construction validates the invariants (Hermitian to 1e-10, unit trace to
/// 1e-10, smallest eigenvalue >= -1e-9). The stored matrix is exactly
/// Hermitized on construction.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  /// Skips the eigenvalue check; Hermiticity and trace are still verified.
  /// Used on hot paths whose inputs are positive by construction.
  static DensityMatrix trusted(ComplexMatrix m);

  static DensityMatrix pure(const ComplexVector& psi);
  static DensityMatrix basis_state(int n_qubits, std::size_t index);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

  [[nodiscard]] const ComplexMatrix& matrix() const { return m_; }
  [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
  [[nodiscard]] int n_qubits() const { return qubit_count(m_.rows()); }

  /// Eigenvalues with the [-1e-9, 0) slack clipped to zero.
  [[nodiscard]] RealVector clipped_eigenvalues() const;

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Unchecked);
  ComplexMatrix m_;
};

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// -Tr rho ln rho; eigenvalues below 1e-14 contribute nothing.
double von_neumann_entropy(const DensityMatrix& rho);

/// Reduced state on the (1-based) sites in `keep`, ordered by ascending site.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

/// Operator `op` (2x2) acting on `site` of an n-qubit register.
ComplexMatrix embed_site_operator(const Eigen::Matrix2cd& op, int site, int n_qubits);

namespace pauli {
Eigen::Matrix2cd x();
Eigen::Matrix2cd y();
Eigen::Matrix2cd z();
}  // namespace pauli

}  // namespace seqtherm
