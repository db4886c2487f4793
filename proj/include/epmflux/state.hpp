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

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "epmflux/eigen.hpp"
#include "epmflux/matrix.hpp"

namespace epmflux {

/**
 * A validated quantum state: Hermitian within 1e-10, eigenvalues >= -1e-10,
 * unit trace within 1e-10. Construction never silently repairs user input;
 * `from_numerical` is the explicit entry point for states coming out of
 * numerical pipelines (ODE integration, spectral truncation), which clips
 * eigenvalues at zero and renormalizes the trace.
 */
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Validates and wraps; throws InvalidState when any invariant fails.
  explicit DensityMatrix(Matrix m, std::optional<std::pair<int, int>> dims = std::nullopt);

  /// Clip tiny negative eigenvalues, renormalize, then validate.
  static DensityMatrix from_numerical(const Matrix& m,
                                      std::optional<std::pair<int, int>> dims = std::nullopt);

  const Matrix& matrix() const { return m_; }
  int dim() const { return m_.rows(); }
  const std::optional<std::pair<int, int>>& bipartite_dims() const { return dims_; }

  DensityMatrix with_dims(int dim_a, int dim_b) const;

  static constexpr double kHermiticityTol = 1e-10;
  static constexpr double kPositivityTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;

 private:
  Matrix m_;
  std::optional<std::pair<int, int>> dims_;
};

/**
 * Spectral resolution of a Hamiltonian: energies in ascending order with the
 * corresponding projectors. Degenerate eigenvalues are merged into a single
 * block projector of rank > 1, so labels index spectral blocks. The refined
 * rank-1 eigenvectors are kept as well (deterministic but basis-arbitrary
 * inside a degenerate block) for operations that need an orthonormal basis.
 */
class EnergyBasis {
 public:
  static EnergyBasis from_hamiltonian(const Matrix& h, double degeneracy_tol = 1e-9);

  /// Product structure of two local bases: one block per pair of local
  /// blocks with summed energies, in (l_a, l_b) lexicographic order. Pairs
  /// with coinciding energy sums are deliberately not merged, so the blocks
  /// track the local measurement record.
  static EnergyBasis from_product(const EnergyBasis& basis_a, const EnergyBasis& basis_b);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(energies_.size()); }
  const std::vector<double>& energies() const { return energies_; }
  const std::vector<Matrix>& projectors() const { return projectors_; }
  const Matrix& projector(int l) const { return projectors_[l]; }
  double energy(int l) const { return energies_[l]; }
  int block_rank(int l) const { return ranks_[l]; }
  bool nondegenerate() const;

  /// Unitary whose columns are the refined eigenvectors, energy-ascending.
  const Matrix& basis_unitary() const { return unitary_; }
  const std::vector<double>& refined_energies() const { return refined_energies_; }

  /// Hamiltonian reassembled as sum_l E_l Pi_l.
  Matrix hamiltonian() const;

 private:
  int dim_ = 0;
  std::vector<double> energies_;
  std::vector<Matrix> projectors_;
  std::vector<int> ranks_;
  Matrix unitary_;
  std::vector<double> refined_energies_;
};

/// Gibbs state of H at inverse temperature beta plus the partition function.
std::pair<DensityMatrix, double> thermal_state(const Matrix& h, double beta);

/// -(1/beta) ln(Z_f / Z_i); throws NonpositivePartitionFunction.
double free_energy_difference(double z_i, double z_f, double beta);

/// Pinching channel sum_l Pi_l rho Pi_l in the given basis.
DensityMatrix dephase(const DensityMatrix& rho, const EnergyBasis& basis);

/// Von Neumann entropy in nats.
double von_neumann_entropy(const DensityMatrix& rho);

/**
 * Quantum relative entropy D(rho||sigma) = Tr(rho (ln rho - ln sigma)) in
 * nats. Throws SupportViolation when rho has weight outside the support of
 * sigma (the divergence is +infinity).
 */
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

/**
 * Relative entropy of coherence S(dephase(rho)) - S(rho); agrees with
 * D(rho || dephase(rho)).
 */
double relative_entropy_of_coherence(const DensityMatrix& rho, const EnergyBasis& basis);

}  // namespace epmflux
