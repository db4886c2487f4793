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

#include "epmflux/rng.hpp"

namespace epmflux {

std::vector<Complex> random_unit_vector(Rng& rng, int d) {
  std::vector<Complex> v(d);
  double norm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    v[i] = rng.complex_normal();
    norm2 += std::norm(v[i]);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

Matrix random_hermitian(Rng& rng, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = rng.normal();
    for (int j = i + 1; j < d; ++j) {
      const Complex z = 0.5 * rng.complex_normal();
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  }
  return m;
}

Matrix random_density(Rng& rng, int d) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  Matrix rho = g * g.adjoint();
  const double tr = rho.trace().real();
  rho *= Complex(1.0 / tr, 0.0);
  return rho;
}

}  // namespace epmflux
