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

#include <cstdint>

#include "epmflux/epm.hpp"
#include "epmflux/resources.hpp"

namespace epmflux {

/**
 * D_KL(p||q) between two joint tables over identical label sets. Labels with
 * p = 0 contribute nothing; p > 0 on a q = 0 label gives +infinity. The
 * joint divergence equals the sum of the two marginal divergences because
 * both tables factorize; the function verifies that identity internally.
 */
double kl_divergence_tables(const EpmDistribution& p, const EpmDistribution& q);

/**
 * Coherence fluctuation distance: the minimal KL divergence between the
 * joint table of rho_i and that of any state diagonal in the initial energy
 * eigenbasis. The objective is convex in the diagonal weights, so qubits use
 * an exact 1-D golden-section search and d >= 3 a projected-gradient descent
 * on the probability simplex.
 */
struct CfdReport {
  double cfd = 0.0;
  DensityMatrix argmin_state;
  double bound_dephased = 0.0;  // D_KL against the dephased-state table
  double bound_cre = 0.0;       // 2 C_re(rho_i), protocol independent
  double gradient_norm = 0.0;   // first-order certificate at the optimum
  int iterations = 0;
  bool converged = true;
};

CfdReport cfd(const DensityMatrix& rho_i, const QuantumChannel& phi, const EnergyBasis& basis_i,
              const EnergyBasis& basis_f);

/// The two upper bounds alone (dephased-table divergence, 2 C_re).
std::pair<double, double> cfd_bounds(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                     const EnergyBasis& basis_i, const EnergyBasis& basis_f);

/**
 * Tests whether a qubit channel commutes with phase rotations about the
 * energy axis, sampling rotation angles and random states. Phase-covariant
 * dynamics decouple populations from coherences, which makes the CFD vanish.
 */
struct PhaseCovarianceResult {
  bool covariant = false;
  double deviation = 0.0;
};

PhaseCovarianceResult phase_covariance_check(const QuantumChannel& channel,
                                             const EnergyBasis& basis,
                                             std::uint64_t seed = 11);

/**
 * Entanglement fluctuation distance machinery. The estimate minimizes the
 * table divergence over separable states parametrized as mixtures of pure
 * product states (alternating optimization, multistart); it is an upper
 * estimate of the true minimum, never asserted as exact. Bounds come from
 * the BSA separable part and from a separable search minimizing the quantum
 * relative entropy.
 */
struct EfdReport {
  double efd_upper_estimate = 0.0;
  DensityMatrix best_separable_found;
  double bound_bsa = 0.0;         // D_KL against the BSA separable part
  double bound_bsa_relent = 0.0;  // 2 D(rho_i || rho_S)
  double bound_relent_ent = 0.0;  // 2 min_found D(rho_i || sigma_sep)
  bool support_ok = true;
};

struct EfdOptions {
  std::uint64_t seed = 17;
  int starts = 6;
  int mixture_terms = 8;
  int outer_iters = 30;
};

EfdReport efd_bounds(const DensityMatrix& rho_i, const QuantumChannel& phi,
                     const LevelSet& levels_i, const LevelSet& levels_f,
                     const BsaDecomposition& bsa, const EfdOptions& options = {});

/// Full report including the heuristic minimization (runs a BSA internally).
EfdReport efd_estimate(const DensityMatrix& rho_i, const QuantumChannel& phi,
                       const LevelSet& levels_i, const LevelSet& levels_f,
                       const EfdOptions& options = {});

}  // namespace epmflux
