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

#include "epmflux/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epmflux/errors.hpp"

namespace epmflux {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

HermitianEigen hermitian_eig(const Matrix& input) {
  if (!input.is_square()) throw DimensionMismatch("hermitian_eig: matrix not square");
  if (!input.all_finite()) throw NonHermitianInput("hermitian_eig: non-finite entries");
  const double norm = input.frobenius_norm();
  // Relative gate with an absolute floor: differences of O(1) Hermitian
  // matrices carry roundoff-level defects even when the result is tiny.
  if (input.hermiticity_defect() > std::max(1e-10 * norm, 1e-13))
    throw NonHermitianInput("hermitian_eig: input is not Hermitian within tolerance");

  const int d = input.rows();
  // Symmetrize away representation roundoff before iterating.
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = 0.5 * (input(i, j) + std::conj(input(j, i)));
  Matrix v = Matrix::identity(d);

  const double tol = 1e-15 * std::max(norm, 1e-300);
  const int max_sweeps = 64;
  int sweep = 0;
  while (off_diagonal_norm(a) > tol) {
    if (++sweep > max_sweeps)
      throw ConvergenceFailure("hermitian_eig: Jacobi sweeps exhausted");
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double r = std::abs(a(p, q));
        if (r <= 1e-300) continue;
        const Complex phase = a(p, q) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // Unitary rotation J: J_pp = c, J_pq = s*phase, J_qp = -s*conj(phase),
        // J_qq = c. Update A <- J^dagger A J and V <- V J in place.
        for (int i = 0; i < d; ++i) {
          const Complex aip = a(i, p);
          const Complex aiq = a(i, q);
          a(i, p) = c * aip - s * std::conj(phase) * aiq;
          a(i, q) = s * phase * aip + c * aiq;
        }
        for (int j = 0; j < d; ++j) {
          const Complex apj = a(p, j);
          const Complex aqj = a(q, j);
          a(p, j) = c * apj - s * phase * aqj;
          a(q, j) = s * std::conj(phase) * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = Complex(a(p, p).real(), 0.0);
        a(q, q) = Complex(a(q, q).real(), 0.0);
        for (int i = 0; i < d; ++i) {
          const Complex vip = v(i, p);
          const Complex viq = v(i, q);
          v(i, p) = c * vip - s * std::conj(phase) * viq;
          v(i, q) = s * phase * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  HermitianEigen result;
  result.eigenvalues.resize(d);
  result.eigenvectors = Matrix(d, d);
  for (int k = 0; k < d; ++k) {
    result.eigenvalues[k] = a(order[k], order[k]).real();
    for (int i = 0; i < d; ++i) result.eigenvectors(i, k) = v(i, order[k]);
  }
  return result;
}

Matrix matrix_function(const Matrix& a, MatrixFunction f, double eigenvalue_floor_rel) {
  const HermitianEigen eig = hermitian_eig(a);
  const double lambda_max = eig.eigenvalues.back();
  const double floor = eigenvalue_floor_rel * std::max(lambda_max, 0.0);

  const bool needs_positive =
      f == MatrixFunction::Log || f == MatrixFunction::Inv || f == MatrixFunction::InvSqrt;
  if (needs_positive) {
    for (double lambda : eig.eigenvalues)
      if (lambda <= floor)
        throw SingularOperand("matrix_function: eigenvalue below floor for non-total function");
  }

  switch (f) {
    case MatrixFunction::Exp:
      return eig.assemble([](double x) { return std::exp(x); });
    case MatrixFunction::Log:
      return eig.assemble([](double x) { return std::log(x); });
    case MatrixFunction::Sqrt:
      for (double lambda : eig.eigenvalues)
        if (lambda < -floor - 1e-300)
          throw SingularOperand("matrix_function: negative eigenvalue for Sqrt");
      return eig.assemble([](double x) { return std::sqrt(std::max(x, 0.0)); });
    case MatrixFunction::Inv:
      return eig.assemble([](double x) { return 1.0 / x; });
    case MatrixFunction::InvSqrt:
      return eig.assemble([](double x) { return 1.0 / std::sqrt(x); });
  }
  throw Error("matrix_function: unknown function tag");
}

double min_eigenvalue(const Matrix& a) { return hermitian_eig(a).eigenvalues.front(); }

}  // namespace epmflux
