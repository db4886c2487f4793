// Copyright 2026 The epmflux developers
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

#include <doctest.h>

#include "epmflux/errors.hpp"
#include "testutil.hpp"

using namespace epmflux;

namespace {

Matrix reconstruct(const HermitianEigen& eig) {
  return eig.assemble([](double x) { return x; });
}

double unitarity_defect(const Matrix& v) {
  return (v.adjoint() * v - Matrix::identity(v.rows())).frobenius_norm();
}

}  // namespace

TEST_CASE("Pauli spectra") {
  const HermitianEigen ez = hermitian_eig(ops::sigma_z());
  CHECK(ez.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(ez.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));

  const HermitianEigen ex = hermitian_eig(ops::sigma_x());
  CHECK(ex.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(ex.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  // Eigenvectors are (|0> -+ |1>)/sqrt(2) up to phase.
  for (int k = 0; k < 2; ++k) {
    const double ratio =
        std::abs(ex.eigenvectors(0, k)) / std::abs(ex.eigenvectors(1, k));
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("reconstruction and unitarity on random matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform() * 3.0);  // 2..4
    const Matrix a = random_hermitian(rng, d);
    const HermitianEigen eig = hermitian_eig(a);
    CHECK(unitarity_defect(eig.eigenvectors) < 1e-12);
    CHECK((reconstruct(eig) - a).frobenius_norm() < 1e-11 * std::max(1.0, a.frobenius_norm()));
    for (size_t k = 1; k < eig.eigenvalues.size(); ++k)
      CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k - 1]);
  }
}

TEST_CASE("reconstruction at superoperator dimension") {
  Rng rng(12);
  const Matrix a = random_hermitian(rng, 16);
  const HermitianEigen eig = hermitian_eig(a);
  CHECK(unitarity_defect(eig.eigenvectors) < 1e-12);
  CHECK((reconstruct(eig) - a).frobenius_norm() < 1e-11 * a.frobenius_norm());
}

TEST_CASE("large norm inputs keep the normalized residual") {
  Rng rng(13);
  Matrix a = random_hermitian(rng, 4);
  a *= Complex(250.0, 0.0);  // ||A||_F up to ~1e3
  const HermitianEigen eig = hermitian_eig(a);
  CHECK((reconstruct(eig) - a).frobenius_norm() / a.frobenius_norm() < 1e-11);
}

TEST_CASE("non-Hermitian input is rejected") {
  Matrix bad = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(hermitian_eig(bad), NonHermitianInput);
}

TEST_CASE("matrix functions on spectra") {
  CHECK((matrix_function(Matrix::zero(3, 3), MatrixFunction::Exp) - Matrix::identity(3))
            .frobenius_norm() < 1e-14);

  const Matrix diag49 = Matrix::from_rows({{4.0, 0.0}, {0.0, 9.0}});
  const Matrix inv_sqrt = matrix_function(diag49, MatrixFunction::InvSqrt);
  CHECK(inv_sqrt(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv_sqrt(1, 1).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_hermitian(rng, 3);
    a *= Complex(1.0 / std::max(1.0, a.frobenius_norm()), 0.0);  // ||A|| <= 1
    const Matrix round_trip =
        matrix_function(matrix_function(a, MatrixFunction::Exp), MatrixFunction::Log);
    CHECK((round_trip - a).frobenius_norm() < 1e-10);
  }
}

TEST_CASE("exp then log round trip over the stated spectral range") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_hermitian(rng, 4);
    const HermitianEigen eig = hermitian_eig(a);
    const double scale = std::max(std::abs(eig.eigenvalues.front()),
                                  std::abs(eig.eigenvalues.back()));
    a *= Complex(5.0 / std::max(scale, 1e-12), 0.0);  // spectrum in [-5, 5]
    const Matrix round_trip =
        matrix_function(matrix_function(a, MatrixFunction::Exp), MatrixFunction::Log);
    CHECK((round_trip - a).frobenius_norm() < 1e-10 * std::max(1.0, a.frobenius_norm()));
  }
}

TEST_CASE("eigenvalue floor guards the non-total functions") {
  Matrix singular = Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  CHECK_THROWS_AS(matrix_function(singular, MatrixFunction::Log), SingularOperand);
  CHECK_THROWS_AS(matrix_function(singular, MatrixFunction::Inv), SingularOperand);
  CHECK_THROWS_AS(matrix_function(singular, MatrixFunction::InvSqrt), SingularOperand);
  CHECK_NOTHROW(matrix_function(singular, MatrixFunction::Sqrt));
}

TEST_CASE("degenerate clusters give deterministic projectors") {
  // Spectrum {1, 1, 2}: the degenerate pair spans a block whose projector is
  // basis-independent even though the individual eigenvectors are not.
  Rng rng(16);
  const Matrix u_m = random_hermitian(rng, 3);
  HermitianEigen basis_eig = hermitian_eig(u_m);
  const Matrix& v = basis_eig.eigenvectors;
  Matrix h(3, 3);
  const double energies[3] = {1.0, 1.0, 2.0};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h(i, j) += energies[k] * v(i, k) * std::conj(v(j, k));

  const EnergyBasis basis_a = EnergyBasis::from_hamiltonian(h);
  const EnergyBasis basis_b = EnergyBasis::from_hamiltonian(h);
  REQUIRE(basis_a.size() == 2);
  CHECK(basis_a.block_rank(0) == 2);
  for (int l = 0; l < basis_a.size(); ++l)
    CHECK((basis_a.projector(l) - basis_b.projector(l)).frobenius_norm() == 0.0);
  // Completeness and orthogonality of the block projectors.
  Matrix sum(3, 3);
  for (int l = 0; l < basis_a.size(); ++l) sum += basis_a.projector(l);
  CHECK((sum - Matrix::identity(3)).frobenius_norm() < 1e-11);
  CHECK((basis_a.projector(0) * basis_a.projector(1)).frobenius_norm() < 1e-12);
}
