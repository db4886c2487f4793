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

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix(Matrix::from_rows({{1.2, 0.0}, {0.0, -0.2}})), InvalidState);
  CHECK_THROWS_AS(DensityMatrix(Matrix::from_rows({{0.5, 0.3}, {0.2, 0.5}})), InvalidState);
  CHECK_THROWS_AS(DensityMatrix(Matrix::from_rows({{0.7, 0.0}, {0.0, 0.7}})), InvalidState);

  // Numerical repair clips a tiny negative eigenvalue and renormalizes.
  Matrix slightly_off = Matrix::from_rows({{1.0 + 5e-9, 0.0}, {0.0, -5e-9}});
  const DensityMatrix repaired = DensityMatrix::from_numerical(slightly_off);
  CHECK(min_eigenvalue(repaired.matrix()) >= 0.0);
  CHECK(std::abs(repaired.matrix().trace().real() - 1.0) < 1e-14);
}

TEST_CASE("thermal state basics") {
  Rng rng(21);
  const Matrix h = random_hermitian(rng, 3);
  const auto [uniform, z0] = thermal_state(h, 0.0);
  CHECK((uniform.matrix() - (1.0 / 3.0) * Matrix::identity(3)).frobenius_norm() < 1e-13);
  CHECK(z0 == doctest::Approx(3.0).epsilon(1e-13));

  const Matrix h01 = Matrix::from_rows({{0.0, 0.0}, {0.0, 1.0}});
  const auto [gibbs, z] = thermal_state(h01, 1.0);
  const double denom = 1.0 + std::exp(-1.0);
  CHECK(gibbs.matrix()(0, 0).real() == doctest::Approx(1.0 / denom).epsilon(1e-14));
  CHECK(gibbs.matrix()(1, 1).real() == doctest::Approx(std::exp(-1.0) / denom).epsilon(1e-14));
  CHECK(z == doctest::Approx(denom).epsilon(1e-14));

  const auto [cold, zc] = thermal_state(h01, 10.0);
  (void)zc;
  CHECK(std::abs(cold.matrix().trace().real() - 1.0) < 1e-13);
  CHECK(min_eigenvalue(cold.matrix()) > 0.0);
}

TEST_CASE("thermal state commutes with its Hamiltonian") {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = random_hermitian(rng, 4);
    const auto [gamma, z] = thermal_state(h, 0.7);
    (void)z;
    const Matrix commutator = gamma.matrix() * h - h * gamma.matrix();
    CHECK(commutator.frobenius_norm() < 1e-11);
  }
}

TEST_CASE("free energy difference") {
  CHECK(free_energy_difference(2.5, 2.5, 1.3) == 0.0);
  // Qubit gap change 1 -> 2 at beta = 1.
  const double z_i = 1.0 + std::exp(-1.0);
  const double z_f = 1.0 + std::exp(-2.0);
  CHECK(free_energy_difference(z_i, z_f, 1.0) ==
        doctest::Approx(-std::log(z_f / z_i)).epsilon(1e-14));
  CHECK_THROWS_AS(free_energy_difference(0.0, 1.0, 1.0), NonpositivePartitionFunction);
  // Recomputation route: -(1/beta) ln Z_f + (1/beta) ln Z_i.
  const double beta = 2.0;
  CHECK(free_energy_difference(z_i, z_f, beta) ==
        doctest::Approx((-std::log(z_f) + std::log(z_i)) / beta).epsilon(1e-14));
}

TEST_CASE("dephasing") {
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(ops::sigma_z());

  const DensityMatrix diag(Matrix::from_rows({{0.3, 0.0}, {0.0, 0.7}}));
  CHECK((dephase(diag, basis).matrix() - diag.matrix()).frobenius_norm() < 1e-13);

  const DensityMatrix coh = testing::ini_coh_state(0.6, 0.2);
  const DensityMatrix dephased = dephase(coh, basis);
  CHECK(std::abs(dephased.matrix()(0, 1)) < 1e-14);
  CHECK(dephased.matrix()(0, 0).real() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(dephased.matrix()(1, 1).real() == doctest::Approx(0.4).epsilon(1e-12));

  const DensityMatrix twice = dephase(dephased, basis);
  CHECK((twice.matrix() - dephased.matrix()).frobenius_norm() < 1e-13);
}

TEST_CASE("dephase kills every off-diagonal block") {
  Rng rng(23);
  const Matrix h = random_hermitian(rng, 4);
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(h);
  const DensityMatrix rho = testing::random_state(rng, 4);
  const DensityMatrix dephased = dephase(rho, basis);
  double off = 0.0;
  for (int l = 0; l < basis.size(); ++l)
    for (int m = 0; m < basis.size(); ++m) {
      if (l == m) continue;
      off += (basis.projector(l) * dephased.matrix() * basis.projector(m)).frobenius_norm();
    }
  CHECK(off < 1e-13);
  CHECK(std::abs(dephased.matrix().trace().real() - 1.0) < 1e-12);
}

TEST_CASE("relative entropy") {
  Rng rng(24);
  const DensityMatrix rho = testing::random_state(rng, 2);
  CHECK(std::abs(relative_entropy(rho, rho)) < 1e-11);

  const DensityMatrix pure(Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  const DensityMatrix mixed(0.5 * Matrix::identity(2));
  CHECK(relative_entropy(pure, mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Klein inequality on random pairs.
  for (int trial = 0; trial < 100; ++trial) {
    const DensityMatrix a = testing::random_state(rng, 2);
    const DensityMatrix b = testing::random_state(rng, 2);
    CHECK(relative_entropy(a, b) >= -1e-12);
  }

  CHECK_THROWS_AS(relative_entropy(mixed, pure), SupportViolation);
}

TEST_CASE("relative entropy of coherence") {
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(ops::sigma_z());

  const DensityMatrix diag(Matrix::from_rows({{0.3, 0.0}, {0.0, 0.7}}));
  CHECK(std::abs(relative_entropy_of_coherence(diag, basis)) < 1e-12);

  const DensityMatrix plus(Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  CHECK(relative_entropy_of_coherence(plus, basis) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-10));

  const DensityMatrix coh = testing::ini_coh_state(0.9, 0.25);
  const double expected =
      von_neumann_entropy(DensityMatrix(Matrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}))) -
      von_neumann_entropy(coh);
  CHECK(relative_entropy_of_coherence(coh, basis) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("coherence equals divergence from the dephased state") {
  Rng rng(25);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = trial % 2 == 0 ? 2 : 3;
    const Matrix h = random_hermitian(rng, d);
    const EnergyBasis basis = EnergyBasis::from_hamiltonian(h);
    const DensityMatrix rho = testing::random_state(rng, d);
    const double via_entropies = relative_entropy_of_coherence(rho, basis);
    const double via_divergence = relative_entropy(rho, dephase(rho, basis));
    CHECK(std::abs(via_entropies - via_divergence) < 1e-10);
    CHECK(via_entropies >= -1e-12);  // dephasing cannot lower the entropy
  }
}
