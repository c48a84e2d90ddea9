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

#include "seqtherm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace seqtherm {

namespace {

std::string dim_str(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ValidationError(std::string(what) + ": expected a non-empty square matrix, got " +
                          dim_str(m.rows(), m.cols()));
  }
}

}  // namespace

ComplexMatrix Spectrum::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

double hermiticity_defect(const ComplexMatrix& m) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() / scale;
}

int qubit_count(Eigen::Index dim) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim) {
    d <<= 1;
    ++n;
  }
  if (d != dim || n == 0) {
    throw ValidationError("dimension " + std::to_string(dim) + " is not 2^n with n >= 1");
  }
  return n;
}

Spectrum eig_hermitian(const ComplexMatrix& m) {
  require_square(m, "eig_hermitian");
  if (!m.allFinite()) throw ValidationError("eig_hermitian: matrix has non-finite entries");
  if (hermiticity_defect(m) > tol::kHermitian) {
    throw ValidationError("eig_hermitian: matrix is not Hermitian (defect " +
                          std::to_string(hermiticity_defect(m)) + ")");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_hermitian: eigensolver did not converge for dim " +
                         std::to_string(m.rows()));
  }
  // Eigen returns eigenvalues in ascending order.
  return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix operator_function(const Spectrum& s, const std::function<Complex(double)>& f) {
  ComplexVector diag(s.dim());
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const Complex v = f(s.eigenvalues[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "operator_function: f(" << s.eigenvalues[i] << ") is not finite";
      throw NumericalError(os.str());
    }
    diag[i] = v;
  }
  return s.eigenvectors * diag.asDiagonal() * s.eigenvectors.adjoint();
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  qubit_count(m_.rows());
  if (!m_.allFinite()) throw ValidationError("DensityMatrix: non-finite entries");
  if (hermiticity_defect(m_) > tol::kHermitian) {
    throw ValidationError("DensityMatrix: matrix is not Hermitian");
  }
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > tol::kTrace) {
    throw ValidationError("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
  }
  ComplexMatrix h = 0.5 * (m_ + m_.adjoint());
  m_ = std::move(h);
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : DensityMatrix(std::move(m), Unchecked{}) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  if (lo < -tol::kPsdSlack) {
    throw ValidationError("DensityMatrix: negative eigenvalue " + std::to_string(lo));
  }
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix m) { return {std::move(m), Unchecked{}}; }

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw ValidationError("DensityMatrix::pure: zero vector");
  const ComplexVector u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

DensityMatrix DensityMatrix::basis_state(int n_qubits, std::size_t index) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ValidationError("basis_state: qubit count out of range");
  }
  const auto dim = Eigen::Index{1} << n_qubits;
  if (index >= static_cast<std::size_t>(dim)) {
    throw ValidationError("basis_state: index out of range");
  }
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return trusted(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  ComplexMatrix m = ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
  return trusted(std::move(m));
}

RealVector DensityMatrix::clipped_eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  RealVector ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol::kPsdSlack) {
      throw NumericalError("density matrix eigenvalue " + std::to_string(ev[i]) +
                           " below PSD slack");
    }
    ev[i] = std::max(ev[i], 0.0);
  }
  return ev;
}

// ---------------------------------------------------------------------------

namespace {

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("matrix square root: eigensolver failed for dim " +
                         std::to_string(m.rows()));
  }
  RealVector ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol::kPsdSlack) {
      throw NumericalError("matrix square root: eigenvalue " + std::to_string(ev[i]));
    }
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return solver.eigenvectors() * ev.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("fidelity: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
  const ComplexMatrix sa = psd_sqrt(a.matrix());
  ComplexMatrix inner = sa * b.matrix() * sa;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(inner, Eigen::EigenvaluesOnly);
  double root_sum = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    root_sum += std::sqrt(std::max(solver.eigenvalues()[i], 0.0));
  }
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const RealVector ev = rho.clipped_eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol::kEntropyFloor) s -= ev[i] * std::log(ev[i]);
  }
  return std::max(s, 0.0);
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  if (keep.empty()) throw ValidationError("partial_trace: keep-set is empty");
  std::vector<int> sites(keep.begin(), keep.end());
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw ValidationError("partial_trace: duplicate site in keep-set");
  }
  for (int s : sites) {
    if (s < 1 || s > n) {
      throw ValidationError("partial_trace: site " + std::to_string(s) + " outside [1, " +
                            std::to_string(n) + "]");
    }
  }
  if (static_cast<int>(sites.size()) == n) return rho;

  std::vector<int> traced;
  for (int s = 1; s <= n; ++s) {
    if (!std::binary_search(sites.begin(), sites.end(), s)) traced.push_back(s);
  }
  const int nk = static_cast<int>(sites.size());
  const int nt = static_cast<int>(traced.size());

  // Full index from (kept bits, traced bits); bit of site s sits at n - s.
  auto compose = [&](std::size_t kept, std::size_t tr) {
    std::size_t idx = 0;
    for (int i = 0; i < nk; ++i) {
      if ((kept >> (nk - 1 - i)) & 1U) idx |= std::size_t{1} << (n - sites[i]);
    }
    for (int i = 0; i < nt; ++i) {
      if ((tr >> (nt - 1 - i)) & 1U) idx |= std::size_t{1} << (n - traced[i]);
    }
    return static_cast<Eigen::Index>(idx);
  };

  const std::size_t dk = std::size_t{1} << nk;
  const std::size_t dt = std::size_t{1} << nt;
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  const ComplexMatrix& m = rho.matrix();
  for (std::size_t r = 0; r < dk; ++r) {
    for (std::size_t c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) acc += m(compose(r, t), compose(c, t));
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return DensityMatrix::trusted(std::move(out));
}

ComplexMatrix embed_site_operator(const Eigen::Matrix2cd& op, int site, int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ValidationError("embed_site_operator: qubit count out of range");
  }
  if (site < 1 || site > n_qubits) {
    throw ValidationError("embed_site_operator: site " + std::to_string(site) + " outside [1, " +
                          std::to_string(n_qubits) + "]");
  }
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  const int shift = n_qubits - site;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const int b = static_cast<int>((col >> shift) & 1);
    for (int a = 0; a < 2; ++a) {
      const Complex v = op(a, b);
      if (v == Complex(0.0)) continue;
      const Eigen::Index row = (col & ~(Eigen::Index{1} << shift)) | (Eigen::Index{a} << shift);
      out(row, col) = v;
    }
  }
  return out;
}

namespace pauli {
Eigen::Matrix2cd x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
Eigen::Matrix2cd y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
Eigen::Matrix2cd z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

}  // namespace seqtherm
