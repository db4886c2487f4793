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

QuantumChannel fig3_channel(double t_f = 2.0, double kappa = 0.1, int steps = 2000) {
  LindbladSpec spec{make_rotating_xz(1.0, 1.0, 0.0, t_f), {}};
  if (kappa > 0.0) spec.jumps.push_back({ops::sigma_x(), kappa});
  return channel_from_propagator(spec, steps);
}

/// Random CPTP qubit map from a two-element Kraus set.
QuantumChannel random_channel(Rng& rng) {
  const Matrix g = random_hermitian(rng, 2) + Complex(0.0, 1.0) * random_hermitian(rng, 2);
  double scale = 1.0;
  while (min_eigenvalue(Matrix::identity(2) - (0.5 * scale) * (g.adjoint() * g)) < 1e-6)
    scale *= 0.5;
  const Matrix a1 = std::sqrt(0.5 * scale) * g;
  const Matrix a2 =
      matrix_function(Matrix::identity(2) - a1.adjoint() * a1, MatrixFunction::Sqrt);
  return QuantumChannel::from_kraus({a1, a2});
}

}  // namespace

TEST_CASE("thermal input with identity channel factorizes into Gibbs weights") {
  const Matrix h = Matrix::from_rows({{0.0, 0.0}, {0.0, 1.0}});
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(h);
  const auto [gamma, z] = thermal_state(h, 1.0);
  const EpmDistribution dist =
      epm_distribution(gamma, QuantumChannel::identity(2), basis, basis);
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k) {
      const double gl = std::exp(-basis.energy(l)) / z;
      const double gk = std::exp(-basis.energy(k)) / z;
      CHECK(dist.joint(l, k) == doctest::Approx(gl * gk).epsilon(1e-12));
    }
}

TEST_CASE("joint table normalizes and factorizes") {
  Rng rng(41);
  const QuantumChannel channel = fig3_channel();
  const EnergyBasis basis_i = EnergyBasis::from_hamiltonian(0.5 * ops::sigma_z());
  const EnergyBasis basis_f = EnergyBasis::from_hamiltonian(
      0.5 * (std::sin(2.0) * ops::sigma_x() + std::cos(2.0) * ops::sigma_z()));
  for (int trial = 0; trial < 5; ++trial) {
    const DensityMatrix rho = testing::random_state(rng, 2);
    const EpmDistribution dist = epm_distribution(rho, channel, basis_i, basis_f);
    CHECK(std::abs(dist.total_probability() - 1.0) < 1e-10);
    double pi_sum = 0.0, pf_sum = 0.0;
    for (double v : dist.p_initial()) pi_sum += v;
    for (double v : dist.p_final()) pf_sum += v;
    CHECK(std::abs(pi_sum - 1.0) < 1e-11);
    CHECK(std::abs(pf_sum - 1.0) < 1e-11);
  }
}

TEST_CASE("mean energy identity on the reference drives") {
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(0.5 * ops::sigma_z());
  const DensityMatrix rho = testing::ini_coh_state(0.7, 0.3);
  const EpmDistribution trivial =
      epm_distribution(rho, QuantumChannel::identity(2), basis, basis);
  CHECK(mean_energy_residual(trivial, rho, QuantumChannel::identity(2)) < 1e-12);

  LindbladSpec unitary{make_rotating_xz(1.0, 1.0, 0.0, 10.0), {}};
  const QuantumChannel u_channel = channel_from_propagator(unitary, 20000);
  const EnergyBasis basis_f = EnergyBasis::from_hamiltonian(unitary.schedule.at(10.0));
  const EpmDistribution u_dist = epm_distribution(rho, u_channel, basis, basis_f);
  CHECK(mean_energy_residual(u_dist, rho, u_channel) < 1e-9);
}

TEST_CASE("mean energy identity on random scenarios") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const EnergyBasis basis_i = EnergyBasis::from_hamiltonian(random_hermitian(rng, 2));
    const EnergyBasis basis_f = EnergyBasis::from_hamiltonian(random_hermitian(rng, 2));
    const QuantumChannel channel = random_channel(rng);
    const DensityMatrix rho = testing::random_state(rng, 2);
    const EpmDistribution dist = epm_distribution(rho, channel, basis_i, basis_f);
    CHECK(mean_energy_residual(dist, rho, channel) < 1e-9);
  }
}

TEST_CASE("characteristic function routes agree") {
  const QuantumChannel channel = fig3_channel();
  const EnergyBasis basis_i = EnergyBasis::from_hamiltonian(0.5 * ops::sigma_z());
  const EnergyBasis basis_f = EnergyBasis::from_hamiltonian(
      0.5 * (std::sin(2.0) * ops::sigma_x() + std::cos(2.0) * ops::sigma_z()));
  const DensityMatrix rho = testing::ini_coh_state(0.9, 0.25);
  const EpmDistribution dist = epm_distribution(rho, channel, basis_i, basis_f);

  CHECK(std::abs(dist.characteristic_function(Complex(0.0, 0.0)) - Complex(1.0, 0.0)) <
        1e-12);
  for (double u : {0.3, 1.7, -2.2}) {
    const Complex table = dist.characteristic_function(Complex(u, 0.0));
    const Complex operator_route = characteristic_function_operator(
        rho, channel, dist.initial_levels(), dist.final_levels(), Complex(u, 0.0));
    CHECK(std::abs(table - operator_route) < 1e-9);
  }
  const double beta = 1.0;
  const Complex at_ibeta = dist.characteristic_function(Complex(0.0, beta));
  const Complex operator_ibeta = characteristic_function_operator(
      rho, channel, dist.initial_levels(), dist.final_levels(), Complex(0.0, beta));
  CHECK(std::abs(at_ibeta - operator_ibeta) < 1e-9);
}

TEST_CASE("histogram merges degenerate energy gaps") {
  // Degenerate pair: block labels and refined labels must give the same
  // distribution over distinct energy changes.
  Matrix h(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 2) = 2.0;
  const EnergyBasis blocks = EnergyBasis::from_hamiltonian(h);
  const EnergyBasis refined = EnergyBasis::from_hamiltonian(h, -1.0);  // no merging
  REQUIRE(blocks.size() == 2);
  REQUIRE(refined.size() == 3);

  Rng rng(43);
  const DensityMatrix rho = testing::random_state(rng, 3);
  const QuantumChannel identity = QuantumChannel::identity(3);
  const EpmDistribution with_blocks = epm_distribution(rho, identity, blocks, blocks);
  const EpmDistribution with_refined = epm_distribution(rho, identity, refined, refined);

  const auto hist_a = with_blocks.delta_e_histogram();
  const auto hist_b = with_refined.delta_e_histogram();
  REQUIRE(hist_a.size() == hist_b.size());
  for (size_t i = 0; i < hist_a.size(); ++i) {
    CHECK(hist_a[i].first == doctest::Approx(hist_b[i].first).epsilon(1e-12));
    CHECK(hist_a[i].second == doctest::Approx(hist_b[i].second).epsilon(1e-11));
  }
}

TEST_CASE("bipartite labels carry local indices and energies add") {
  const EnergyBasis basis_a = EnergyBasis::from_hamiltonian(0.5 * ops::sigma_z());
  const EnergyBasis basis_b = EnergyBasis::from_hamiltonian(0.6 * ops::sigma_z());
  const DensityMatrix rho = testing::werner(0.5);
  const EpmDistribution dist = epm_distribution_bipartite(
      rho, QuantumChannel::identity(4), basis_a, basis_b, basis_a, basis_b);
  CHECK(dist.initial_levels().size() == 4);
  CHECK(dist.initial_levels().sublabels[1][0] == 0);
  CHECK(dist.initial_levels().sublabels[1][1] == 1);
  CHECK(std::abs(dist.total_probability() - 1.0) < 1e-10);
  CHECK(dist.initial_levels().energies[3] == doctest::Approx(0.5 + 0.6).epsilon(1e-12));
}

TEST_CASE("zero-probability labels are retained") {
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(0.5 * ops::sigma_z());
  const DensityMatrix ground(Matrix::from_rows({{0.0, 0.0}, {0.0, 1.0}}));
  const EpmDistribution dist =
      epm_distribution(ground, QuantumChannel::identity(2), basis, basis);
  int zero_rows = 0;
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k)
      if (dist.joint(l, k) == 0.0) ++zero_rows;
  CHECK(zero_rows > 0);
  CHECK(dist.initial_levels().size() * dist.final_levels().size() == 4);
}
