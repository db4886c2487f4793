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

#include <array>
#include <vector>

#include "epmflux/channel.hpp"
#include "epmflux/matrix.hpp"
#include "epmflux/state.hpp"

namespace epmflux {

/**
 * One side of the measurement record: energy labels with their projectors.
 * For bipartite systems the labels are pairs of local block indices and the
 * projectors are products of the local ones; energies add.
 */
struct LevelSet {
  int dim = 0;
  bool bipartite = false;
  std::vector<double> energies;
  std::vector<Matrix> projectors;
  std::vector<std::array<int, 2>> sublabels;  // single systems use {l, -1}

  int size() const { return static_cast<int>(energies.size()); }
  Matrix hamiltonian() const;
};

LevelSet level_set_single(const EnergyBasis& basis);
LevelSet level_set_bipartite(const EnergyBasis& basis_a, const EnergyBasis& basis_b);

/// Born weights of an arbitrary operator on a level set: Tr(X Pi_l) per label.
std::vector<double> born_weights(const Matrix& x, const LevelSet& levels);

/**
 * EPM joint distribution. The initial energies are virtual Born weights on
 * the undisturbed state (no initial collapse), the final ones come from the
 * projective measurement after the map, and statistical independence makes
 * the joint table the product of the two marginals.
 */
class EpmDistribution {
 public:
  static EpmDistribution build(const DensityMatrix& rho_i, const QuantumChannel& phi,
                               LevelSet initial, LevelSet final_levels);

  const LevelSet& initial_levels() const { return initial_; }
  const LevelSet& final_levels() const { return final_; }
  const std::vector<double>& p_initial() const { return p_initial_; }
  const std::vector<double>& p_final() const { return p_final_; }

  double joint(int l, int k) const { return p_initial_[l] * p_final_[k]; }
  double delta_e(int l, int k) const { return final_.energies[k] - initial_.energies[l]; }
  double total_probability() const;
  double mean_delta_e() const;

  /// sum_{l,k} p(l,k) exp(i u dE) for complex u.
  Complex characteristic_function(Complex u) const;

  /// Distinct dE values (within 1e-12) with aggregated probability.
  std::vector<std::pair<double, double>> delta_e_histogram() const;

 private:
  LevelSet initial_;
  LevelSet final_;
  std::vector<double> p_initial_;
  std::vector<double> p_final_;
};

EpmDistribution epm_distribution(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                 const EnergyBasis& basis_i, const EnergyBasis& basis_f);

EpmDistribution epm_distribution_bipartite(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                           const EnergyBasis& basis_i_a,
                                           const EnergyBasis& basis_i_b,
                                           const EnergyBasis& basis_f_a,
                                           const EnergyBasis& basis_f_b);

/**
 * Operator-form characteristic function Tr(rho e^{-iuH_i}) Tr(Phi[rho] e^{iuH_f});
 * agrees with the table sum — the factorized structure of the protocol.
 */
Complex characteristic_function_operator(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                         const LevelSet& initial, const LevelSet& final_levels,
                                         Complex u);

/**
 * |<dE>_table - (Tr(H_f Phi[rho]) - Tr(H_i rho))|. The agreement of the two
 * routes is an identity of the protocol and should sit at roundoff level.
 */
double mean_energy_residual(const EpmDistribution& dist, const DensityMatrix& rho_i,
                            const QuantumChannel& phi);

}  // namespace epmflux
