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
#include <vector>

#include "epmflux/matrix.hpp"
#include "epmflux/schedule.hpp"
#include "epmflux/state.hpp"

namespace epmflux {

struct JumpOperator {
  Matrix op;
  double kappa = 0.0;  // rate, units 1/time
};

/// Lindblad generator data: drive plus a list of jump operators.
struct LindbladSpec {
  HamiltonianSchedule schedule;
  std::vector<JumpOperator> jumps;
};

/**
 * CPTP map stored as a d^2 x d^2 superoperator acting on column-stacked
 * operators (vec(|i><j|) has index j*d + i), with an optional Kraus set.
 */
class QuantumChannel {
 public:
  QuantumChannel() = default;
  QuantumChannel(int dim, Matrix superoperator,
                 std::optional<std::vector<Matrix>> kraus = std::nullopt);

  static QuantumChannel identity(int dim);
  static QuantumChannel from_kraus(std::vector<Matrix> kraus);
  static QuantumChannel unitary(const Matrix& u);

  int dim() const { return dim_; }
  const Matrix& superoperator() const { return superop_; }
  bool has_kraus() const { return kraus_.has_value(); }
  const std::vector<Matrix>& kraus() const;

  /// Acts on an arbitrary operator through the superoperator (linear).
  Matrix apply(const Matrix& x) const;
  DensityMatrix apply_to_state(const DensityMatrix& rho) const;

  /// Choi matrix sum_ij |i><j| (x) Phi[|i><j|]; PSD iff the map is CP.
  Matrix choi_matrix() const;

  /// max_j ||sum_a A_a^dag A_a - I|| style defect; needs the Kraus set.
  double trace_preservation_defect() const;

  bool is_unital(double tol = 1e-9) const;

 private:
  int dim_ = 0;
  Matrix superop_;
  std::optional<std::vector<Matrix>> kraus_;
};

/// Compose maps: result acts as second after first.
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

/**
 * Evolves rho0 from t_i to t_f with fixed-step classical RK4 on the Lindblad
 * equation. Hermiticity and trace are preserved by the generator; drift
 * beyond 1e-6 in the trace raises IntegrationUnstable.
 */
DensityMatrix propagate(const LindbladSpec& spec, const DensityMatrix& rho0, int steps);

/// Same integrator applied to an arbitrary (not necessarily Hermitian) operator.
Matrix propagate_operator(const LindbladSpec& spec, const Matrix& x0, int steps);

/**
 * Extracts the CPTP map of the evolution by propagating all d^2 matrix units
 * on one shared time grid, so the resulting superoperator is exactly linear.
 * Throws CompletePositivityViolation when the Choi matrix has an eigenvalue
 * below -1e-9.
 */
QuantumChannel channel_from_propagator(const LindbladSpec& spec, int steps);

/**
 * Populates the Kraus set from the spectral decomposition of the Choi
 * matrix, dropping eigenvalues below 1e-10.
 */
QuantumChannel kraus_from_choi(const QuantumChannel& channel);

/**
 * Fixed point of the map from the eigenvalue-1 eigenvector of the
 * superoperator (null space of S - I via its Gram matrix), symmetrized and
 * renormalized. Throws NoUniqueFixedPoint when the eigenvalue-1 subspace
 * does not have dimension one within the cluster tolerance.
 */
DensityMatrix fixed_point(const QuantumChannel& channel, double cluster_tol = 1e-8);

/**
 * Reference state for the backward process: the unique fixed point when
 * there is one; for unital maps with a degenerate eigenvalue-1 subspace
 * (e.g. any unitary channel) the maximally mixed state is used instead.
 */
DensityMatrix backward_reference_state(const QuantumChannel& channel);

/**
 * Time-reversed dual map with Kraus operators pi^{1/2} A^dag pi^{-1/2}.
 * Requires pi full rank (min eigenvalue >= 1e-10) and Phi[pi] = pi within
 * 1e-8; derives the Kraus set of the input if absent.
 */
QuantumChannel dual_channel(const QuantumChannel& channel, const DensityMatrix& pi);

}  // namespace epmflux
