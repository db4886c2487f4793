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
#include <optional>
#include <vector>

#include "epmflux/matrix.hpp"
#include "epmflux/state.hpp"

namespace epmflux {

/**
 * rho = (1 - a) gamma + a tau with the minimal weight a and tau a valid
 * state. The weight comes from the smallest eigenvalue of
 * gamma^{-1/2} rho gamma^{-1/2}; for a = 0 the convention tau = gamma holds.
 */
struct AthermalityDecomposition {
  double a = 0.0;
  DensityMatrix tau;
  DensityMatrix reference;
};

AthermalityDecomposition weight_of_athermality(const DensityMatrix& rho,
                                               const DensityMatrix& gamma);

/**
 * rho = (1 - c) sigma + c tau with sigma diagonal in the reference basis and
 * c minimal. For incoherent inputs c = 0 with sigma = rho (tau set to sigma
 * by convention and flagged).
 */
struct CoherenceDecomposition {
  double c = 0.0;
  DensityMatrix sigma;
  DensityMatrix tau;
  bool tau_conventional = false;  // set when c = 0 (or c = 1 leaves sigma free)
};

enum class CoherenceMethod { Auto, General };

CoherenceDecomposition weight_of_coherence(const DensityMatrix& rho, const EnergyBasis& basis,
                                           CoherenceMethod method = CoherenceMethod::Auto);

/**
 * rho = (1-a) gamma + a(1-c) tau_d + a c tau_c: athermality split followed by
 * the coherence split of the athermal part.
 */
struct TripleDecomposition {
  double a = 0.0;
  double c = 0.0;
  DensityMatrix tau_d;
  DensityMatrix tau_c;
  DensityMatrix reference;
};

TripleDecomposition triple_decompose(const DensityMatrix& rho, const DensityMatrix& gamma,
                                     const EnergyBasis& basis);

/**
 * rho = gamma_A (x) gamma_B + E with both partial traces of E vanishing.
 * Applies only to states whose marginals are thermal (within 1e-8).
 */
struct CorrelationSplit {
  DensityMatrix marginal_a;
  DensityMatrix marginal_b;
  Matrix correlation_operator;
};

CorrelationSplit correlation_split(const DensityMatrix& rho, double beta, const Matrix& h_a,
                                   const Matrix& h_b);

/// One pure product component of the separable part.
struct ProductTerm {
  double weight = 0.0;  // normalized r_j, sums to one
  DensityMatrix state_a;
  DensityMatrix state_b;
};

/**
 * rho = lambda rho_E + (1-lambda) rho_S with rho_S a mixture of pure product
 * states of maximal weight. Found by iterated maximal subtraction of pure
 * product states with multistart seesaw optimization plus exchange sweeps;
 * lambda is an upper bound on the true entangled weight within the solver
 * tolerance.
 */
struct BsaDecomposition {
  double lambda = 0.0;
  std::optional<DensityMatrix> rho_entangled;  // absent when lambda ~ 0
  std::optional<DensityMatrix> rho_separable;  // absent when lambda ~ 1
  std::vector<ProductTerm> product_terms;
  Matrix entangled_part;  // raw remainder lambda * rho_E (exact complement)
  double ppt_min_eigenvalue = 0.0;  // PPT certificate for the separable part
};

struct BsaOptions {
  std::uint64_t seed = 7;
  int max_terms = 16;
  int starts = 24;
  double min_weight = 1e-6;
  int exchange_sweeps = 40;
  double exchange_tol = 1e-10;
  int kicks = 10;       // budget scale of the pure-remainder search
  bool thorough = true;  // false: skip the polish stages (decomposition-only uses)
};

BsaDecomposition bsa_decompose(const DensityMatrix& rho, const BsaOptions& options = {});

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/**
 * Product of two triple decompositions regrouped into the thermal piece,
 * the diagonal-athermality block rho_d and the coherence block rho_c:
 * rho_A (x) rho_B = w gamma_A (x) gamma_B + rho_d + rho_c. The blocks are
 * unnormalized positive operators.
 */
struct NineTermProduct {
  double thermal_weight = 0.0;
  Matrix rho_d;
  Matrix rho_c;
  TripleDecomposition triple_a;
  TripleDecomposition triple_b;
};

NineTermProduct nine_term_split(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                                const DensityMatrix& gamma_a, const DensityMatrix& gamma_b,
                                const EnergyBasis& basis_a, const EnergyBasis& basis_b);

/**
 * Full resource split of a two-qubit state: BSA plus the nine-term regrouping
 * of every product term, with absolute weights t_j = (1-lambda) r_j. This is
 * the ingredient bundle for the entanglement-resolved fluctuation relations.
 */
struct BsaTermSplit {
  double weight = 0.0;         // absolute weight t_j in rho
  double thermal_coeff = 0.0;  // (1-a_A)(1-a_B)
  Matrix rho_d;
  Matrix rho_c;
};

struct BsaResourceSplit {
  double lambda = 0.0;
  Matrix entangled_part;  // lambda * rho_E
  std::vector<BsaTermSplit> terms;
};

BsaResourceSplit bsa_resource_split(const BsaDecomposition& bsa, const DensityMatrix& gamma_a,
                                    const DensityMatrix& gamma_b, const EnergyBasis& basis_a,
                                    const EnergyBasis& basis_b);

/// Serialization of the decompositions (JSON text, see the file formats in
/// the README); implemented in io.cpp.

}  // namespace epmflux
