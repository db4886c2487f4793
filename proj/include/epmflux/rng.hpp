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
#include <cstdint>
#include <random>

#include "epmflux/matrix.hpp"

namespace epmflux {

/**
 * Deterministic random source. mt19937_64 output is pinned by the standard
 * and the mapping to doubles is explicit here, so identical seeds give
 * identical streams on every platform (the std distributions would not).
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller with an explicit cached pair.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cache_ = r * std::sin(theta);
    has_cache_ = true;
    return r * std::cos(theta);
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_cache_ = false;
  double cache_ = 0.0;
};

/// Haar-ish random unit vector of dimension d (Gaussian normalized).
std::vector<Complex> random_unit_vector(Rng& rng, int d);

/// Random Hermitian matrix with entries of scale O(1).
Matrix random_hermitian(Rng& rng, int d);

/// Full-rank random density matrix G G^dag / Tr(G G^dag) (Ginibre).
Matrix random_density(Rng& rng, int d);

}  // namespace epmflux
