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

#include <vector>

#include "epmflux/matrix.hpp"

namespace epmflux {

/**
 * Spectral decomposition of a Hermitian matrix: A = V diag(lambda) V^dagger
 * with eigenvalues ascending and V unitary (eigenvectors in columns, aligned
 * with the eigenvalue order).
 */
struct HermitianEigen {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;

  /// V diag(f(lambda)) V^dagger for an arbitrary per-eigenvalue map.
  template <typename F>
  Matrix assemble(F&& f) const {
    const int d = eigenvectors.rows();
    Matrix out(d, d);
    for (int k = 0; k < d; ++k) {
      const double fk = f(eigenvalues[k]);
      if (fk == 0.0) continue;
      for (int i = 0; i < d; ++i) {
        const Complex vik = eigenvectors(i, k);
        for (int j = 0; j < d; ++j) out(i, j) += fk * vik * std::conj(eigenvectors(j, k));
      }
    }
    return out;
  }
};

/**
 * Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations with a
 * fixed sweep order, so results are reproducible bit-for-bit. Intended for
 * the small dimensions used here (d <= 64).
 *
 * Throws NonHermitianInput when ||A - A^dagger||_F > 1e-10 ||A||_F and
 * ConvergenceFailure if the sweep budget is exhausted.
 */
HermitianEigen hermitian_eig(const Matrix& a);

enum class MatrixFunction { Exp, Log, Sqrt, Inv, InvSqrt };

/**
 * Spectral matrix function V diag(f(lambda)) V^dagger of a Hermitian matrix.
 * Log, Inv and InvSqrt require every eigenvalue to clear the relative floor
 * (1e-12 times the largest eigenvalue); otherwise SingularOperand is thrown.
 * Sqrt clamps eigenvalues in [-floor, 0) to zero.
 */
Matrix matrix_function(const Matrix& a, MatrixFunction f, double eigenvalue_floor_rel = 1e-12);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Matrix& a);

}  // namespace epmflux
