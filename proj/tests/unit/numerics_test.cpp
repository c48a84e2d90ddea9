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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "seqtherm/numerics.hpp"
#include "test_util.hpp"

namespace seqtherm {
namespace {

using testing::random_hermitian;
using testing::random_state;

TEST(EigHermitian, IdentityHasUnitSpectrum) {
  const Spectrum s = eig_hermitian(ComplexMatrix::Identity(4, 4));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[i], 1.0, 1e-14);
}

TEST(EigHermitian, PauliZAndX) {
  const Spectrum z = eig_hermitian(pauli::z());
  EXPECT_NEAR(z.eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(z.eigenvalues[1], 1.0, 1e-14);

  const Spectrum x = eig_hermitian(pauli::x());
  EXPECT_NEAR(x.eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(x.eigenvalues[1], 1.0, 1e-14);
  // (|0> - |1>)/sqrt2 for -1, up to phase.
  const Complex a = x.eigenvectors(0, 0);
  const Complex b = x.eigenvectors(1, 0);
  EXPECT_NEAR(std::abs(a), std::numbers::sqrt2 / 2, 1e-12);
  EXPECT_NEAR(std::abs(a + b), 0.0, 1e-12);
}

TEST(EigHermitian, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eig_hermitian(m), ValidationError);
}

TEST(EigHermitian, ReconstructsRandomMatrices) {
  for (Eigen::Index d : {2, 3, 8, 17, 64, 256}) {
    const ComplexMatrix m = random_hermitian(d, static_cast<std::uint64_t>(d));
    const Spectrum s = eig_hermitian(m);
    EXPECT_LT((s.reconstruct() - m).norm() / m.norm(), 1e-10) << "dim " << d;
  }
}

TEST(OperatorFunction, ConstantOneIsIdentity) {
  const Spectrum s = eig_hermitian(random_hermitian(5, 3));
  const ComplexMatrix f = operator_function(s, [](double) { return Complex(1.0, 0.0); });
  EXPECT_LT((f - ComplexMatrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(OperatorFunction, DiagonalExponentialOfPauliZ) {
  const Spectrum s = eig_hermitian(pauli::z());
  const ComplexMatrix u =
      operator_function(s, [](double e) { return std::exp(Complex(0.0, -std::numbers::pi * e / 2)); });
  EXPECT_NEAR(std::abs(u(0, 0) - Complex(0.0, -1.0)), 0.0, 1e-12);  // |0> has eigenvalue +1
  EXPECT_NEAR(std::abs(u(1, 1) - Complex(0.0, 1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(u(0, 1)), 0.0, 1e-14);
}

TEST(OperatorFunction, TwoLevelGibbsFactor) {
  const Spectrum s = eig_hermitian(pauli::z());
  ComplexMatrix g = operator_function(s, [](double e) { return Complex(std::exp(-e), 0.0); });
  g /= g.trace();
  const double z = std::exp(1.0) + std::exp(-1.0);
  EXPECT_NEAR(g(0, 0).real(), std::exp(-1.0) / z, 1e-14);
  EXPECT_NEAR(g(1, 1).real(), std::exp(1.0) / z, 1e-14);
}

TEST(OperatorFunction, TimeEvolutionIsUnitary) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ComplexMatrix h = random_hermitian(16, seed);
    const ComplexMatrix u =
        operator_function(eig_hermitian(h), [](double e) { return std::exp(Complex(0.0, -1.3 * e)); });
    EXPECT_LT((u.adjoint() * u - ComplexMatrix::Identity(16, 16)).norm(), 1e-9);
  }
}

TEST(OperatorFunction, NonFiniteValuesThrow) {
  const Spectrum s = eig_hermitian(pauli::z());
  EXPECT_THROW(operator_function(s, [](double e) { return Complex(std::log(e), 0.0); }), NumericalError);
}

TEST(DensityMatrix, ValidatesInput) {
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(2, 2)), ValidationError);  // trace 2
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{neg}, ValidationError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(3, 3) / 3.0), ValidationError);  // not a qubit register
}

TEST(Fidelity, SpecialCases) {
  const auto zero = DensityMatrix::basis_state(1, 0);
  const auto one = DensityMatrix::basis_state(1, 1);
  const auto mixed = DensityMatrix::maximally_mixed(2);
  EXPECT_NEAR(fidelity(zero, zero), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(mixed, zero), 0.5, 1e-12);
  const auto r = random_state(8, 5);
  EXPECT_NEAR(fidelity(r, r), 1.0, 1e-9);
}

TEST(Fidelity, IsSymmetric) {
  const auto a = random_state(4, 1);
  const auto b = random_state(4, 2);
  EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-10);
}

TEST(Fidelity, DecreasesAlongMixingPath) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rho = random_state(4, seed);
    const auto sigma = random_state(4, seed + 100);
    double prev = 1.0 + 1e-12;
    for (int k = 0; k <= 20; ++k) {
      const double s = k / 20.0;
      const double f = fidelity(rho, DensityMatrix((1.0 - s) * rho.matrix() + s * sigma.matrix()));
      EXPECT_LE(f, prev + 1e-9) << "seed " << seed << " s " << s;
      prev = f;
    }
  }
}

TEST(Entropy, ReferenceValues) {
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::basis_state(2, 3)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(2)), std::log(2.0), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(16)), 4.0 * std::log(2.0), 1e-12);
}

TEST(Entropy, BoundedByLogDimension) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index d = Eigen::Index{1} << (1 + seed % 4);
    const double s = von_neumann_entropy(random_state(d, seed));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, std::log(static_cast<double>(d)) + 1e-12);
  }
}

TEST(PartialTrace, ProductState) {
  // |0><0| (site 1) x |1><1| (site 2): basis index 0b01.
  const auto rho = DensityMatrix::basis_state(2, 1);
  const std::vector<int> keep1{1};
  const std::vector<int> keep2{2};
  const auto r1 = partial_trace(rho, keep1);
  const auto r2 = partial_trace(rho, keep2);
  EXPECT_NEAR(r1.matrix()(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(r2.matrix()(1, 1).real(), 1.0, 1e-14);
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
  ComplexVector psi = ComplexVector::Zero(4);
  psi[0] = psi[3] = 1.0 / std::numbers::sqrt2;
  const std::vector<int> keep{1};
  const auto r = partial_trace(DensityMatrix::pure(psi), keep);
  EXPECT_LT((r.matrix() - ComplexMatrix::Identity(2, 2) / 2.0).norm(), 1e-14);
}

TEST(PartialTrace, KeepAllIsIdentityAndTraceIsPreserved) {
  const auto rho = random_state(16, 9);
  const std::vector<int> all{1, 2, 3, 4};
  EXPECT_LT((partial_trace(rho, all).matrix() - rho.matrix()).norm(), 1e-14);
  for (const std::vector<int>& keep : {std::vector<int>{1}, {2, 4}, {1, 3, 4}, {3}}) {
    EXPECT_NEAR(partial_trace(rho, keep).matrix().trace().real(), 1.0, 1e-12);
  }
}

TEST(PartialTrace, RejectsBadSiteLists) {
  const auto rho = random_state(8, 1);
  EXPECT_THROW(partial_trace(rho, std::vector<int>{}), ValidationError);
  EXPECT_THROW(partial_trace(rho, std::vector<int>{0}), ValidationError);
  EXPECT_THROW(partial_trace(rho, std::vector<int>{4}), ValidationError);
  EXPECT_THROW(partial_trace(rho, std::vector<int>{2, 2}), ValidationError);
}

TEST(EmbedSiteOperator, SiteOneIsMostSignificant) {
  const ComplexMatrix z1 = embed_site_operator(pauli::z(), 1, 3);
  EXPECT_NEAR(z1(0b011, 0b011).real(), 1.0, 0.0);
  EXPECT_NEAR(z1(0b100, 0b100).real(), -1.0, 0.0);
  EXPECT_THROW(embed_site_operator(pauli::z(), 4, 3), ValidationError);
}

}  // namespace
}  // namespace seqtherm
