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

#include <complex>
#include <initializer_list>
#include <vector>

namespace epmflux {

using Complex = std::complex<double>;

/**
 * Dense complex matrix with row-major storage. This is the carrier for all
 * operators in the library (Hamiltonians, density matrices, projectors,
 * Kraus operators, superoperators). Values are immutable in practice: every
 * operation returns a fresh matrix, so instances are safe to share across
 * threads.
 */
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);

  static Matrix zero(int rows, int cols);
  static Matrix identity(int d);
  static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Complex& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  const Complex& operator()(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(Complex factor);

  Matrix adjoint() const;
  Matrix transpose() const;
  Matrix conjugate() const;
  Complex trace() const;
  double frobenius_norm() const;
  double max_abs() const;

  /// ||A - A^dagger||_F; zero for exactly Hermitian matrices.
  double hermiticity_defect() const;
  bool is_square() const { return rows_ == cols_ && rows_ > 0; }
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Complex factor, Matrix a);
Matrix operator*(Matrix a, Complex factor);
Matrix operator*(double factor, Matrix a);
Matrix operator*(Matrix a, double factor);

/// Tr(A B) without forming the product.
Complex trace_product(const Matrix& a, const Matrix& b);

/// Kronecker product with row index r_a * dim_b + r_b.
Matrix kron(const Matrix& a, const Matrix& b);

enum class Keep { A, B };

/// Partial trace of a (dim_a*dim_b) square matrix over the discarded factor.
Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Keep keep);

/// Partial transpose on the B factor (used by the PPT separability check).
Matrix partial_transpose_b(const Matrix& m, int dim_a, int dim_b);

// Column-stacking convention: vec(|i><j|) has index j*d + i.
std::vector<Complex> matrix_to_vec(const Matrix& m);
Matrix vec_to_matrix(const std::vector<Complex>& v, int d);

namespace ops {
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
Matrix sigma_plus();   // |1><0| raising in the {|0>,|1>} ordering
Matrix sigma_minus();  // |0><1| lowering; stationary state of damping is |0><0|
}  // namespace ops

}  // namespace epmflux
