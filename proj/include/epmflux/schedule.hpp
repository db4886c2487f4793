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

#include <functional>
#include <optional>

#include "epmflux/matrix.hpp"

namespace epmflux {

/**
 * Local pieces of a bipartite drive. The interaction must vanish at both
 * endpoints so that energies are measured against local Hamiltonians.
 */
struct BipartiteParts {
  int dim_a = 0;
  int dim_b = 0;
  std::function<Matrix(double)> h_a;
  std::function<Matrix(double)> h_b;
  std::function<Matrix(double)> h_int;  // full-dimension operator
};

/**
 * One-parameter family H(t) on [t_i, t_f]. Evaluators must be side-effect
 * free; the schedule owns no mutable state.
 */
class HamiltonianSchedule {
 public:
  HamiltonianSchedule(std::function<Matrix(double)> h, double t_i, double t_f);

  /// Assembles H(t) = H_A(t) (x) I + I (x) H_B(t) + H_int(t) and checks that
  /// the interaction vanishes at the endpoints (within 1e-12).
  static HamiltonianSchedule bipartite(BipartiteParts parts, double t_i, double t_f);

  Matrix at(double t) const { return h_(t); }
  double t_i() const { return t_i_; }
  double t_f() const { return t_f_; }
  const std::optional<BipartiteParts>& bipartite_parts() const { return parts_; }

 private:
  std::function<Matrix(double)> h_;
  double t_i_;
  double t_f_;
  std::optional<BipartiteParts> parts_;
};

/// Time-independent H on [t_i, t_f].
HamiltonianSchedule make_static_schedule(const Matrix& h, double t_i, double t_f);

/// H(t) = (Omega/2) (sin(omega t) sigma_x + cos(omega t) sigma_z).
HamiltonianSchedule make_rotating_xz(double omega_rabi, double omega_drive, double t_i,
                                     double t_f);

/**
 * Bipartite drive with linearly ramped local Hamiltonians and an interaction
 * g * V switched on and off through a smooth sin^2 window that vanishes at
 * both endpoints.
 */
HamiltonianSchedule make_bipartite_switched(const Matrix& h_a_initial, const Matrix& h_a_final,
                                            const Matrix& h_b_initial, const Matrix& h_b_final,
                                            const Matrix& interaction, double strength,
                                            double t_i, double t_f);

}  // namespace epmflux
