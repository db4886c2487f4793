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

#include <cmath>

#include "epmflux/channel.hpp"
#include "epmflux/eigen.hpp"
#include "epmflux/epm.hpp"
#include "epmflux/matrix.hpp"
#include "epmflux/resources.hpp"
#include "epmflux/rng.hpp"
#include "epmflux/state.hpp"

namespace epmflux::testing {

inline DensityMatrix random_state(Rng& rng, int d) {
  return DensityMatrix::from_numerical(random_density(rng, d));
}

inline DensityMatrix ini_coh_state(double a, double gamma) {
  return DensityMatrix::from_numerical(Matrix::from_rows({{a, gamma}, {gamma, 1.0 - a}}));
}

/// Exact unitary evolution U rho U^dag for a time-independent Hamiltonian,
/// through the spectral exponential. Independent oracle for the integrator.
inline Matrix spectral_unitary_evolve(const Matrix& h, const Matrix& rho, double t) {
  const HermitianEigen eig = hermitian_eig(h);
  const int d = h.rows();
  Matrix u(d, d);
  for (int k = 0; k < d; ++k) {
    const Complex phase = std::exp(Complex(0.0, -eig.eigenvalues[k] * t));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        u(i, j) += phase * eig.eigenvectors(i, k) * std::conj(eig.eigenvectors(j, k));
  }
  return u * rho * u.adjoint();
}

/**
 * Independent oracle for the weight of athermality: bisection on the largest
 * s with rho - s gamma still PSD, checked spectrally. a = 1 - s_max.
 */
inline double athermality_bisection_oracle(const Matrix& rho, const Matrix& gamma) {
  double lo = 0.0, hi = 1.0;  // s in [0, 1]
  auto feasible = [&](double s) { return min_eigenvalue(rho - s * gamma) >= -1e-13; };
  if (!feasible(0.0)) return 1.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 1.0 - lo;
}

/// Werner state p |psi-><psi-| + (1-p) I/4 with dims (2,2).
inline DensityMatrix werner(double p) {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix singlet(4, 4);
  const std::vector<Complex> v{0.0, s, -s, 0.0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) singlet(i, j) = v[i] * std::conj(v[j]);
  Matrix m = p * singlet + (1.0 - p) * 0.25 * Matrix::identity(4);
  return DensityMatrix(std::move(m), std::make_pair(2, 2));
}

inline DensityMatrix bell_phi_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix m(4, 4);
  const std::vector<Complex> v{s, 0.0, 0.0, s};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = v[i] * std::conj(v[j]);
  return DensityMatrix(std::move(m), std::make_pair(2, 2));
}

/// Random product state rho_A (x) rho_B.
inline DensityMatrix random_product_state(Rng& rng) {
  const Matrix a = random_density(rng, 2);
  const Matrix b = random_density(rng, 2);
  return DensityMatrix(kron(a, b), std::make_pair(2, 2));
}

/// Random two-qubit state with concurrence above the threshold (mixes a
/// random state toward a Bell state until it qualifies).
inline DensityMatrix random_entangled_state(Rng& rng, double min_concurrence) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Matrix m = random_density(rng, 4);
    for (double mix = 0.0; mix <= 1.0; mix += 0.1) {
      Matrix candidate = (1.0 - mix) * m + mix * bell_phi_plus().matrix();
      DensityMatrix state(std::move(candidate), std::make_pair(2, 2));
      if (concurrence(state) >= min_concurrence) return state;
    }
  }
  return bell_phi_plus();
}

}  // namespace epmflux::testing
