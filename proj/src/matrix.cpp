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

#include "epmflux/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "epmflux/errors.hpp"

namespace epmflux {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw DimensionMismatch("matrix dimensions must be positive");
  data_.assign(static_cast<size_t>(rows) * cols, Complex(0.0, 0.0));
}

Matrix Matrix::zero(int rows, int cols) { return Matrix(rows, cols); }

Matrix Matrix::identity(int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.begin()->size());
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c)
      throw DimensionMismatch("ragged initializer for matrix");
    int j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionMismatch("matrix addition shape mismatch");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionMismatch("matrix subtraction shape mismatch");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(Complex factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

Matrix Matrix::adjoint() const {
  Matrix m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

Matrix Matrix::transpose() const {
  Matrix m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  return m;
}

Matrix Matrix::conjugate() const {
  Matrix m(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) m.data_[i] = std::conj(data_[i]);
  return m;
}

Complex Matrix::trace() const {
  if (!is_square()) throw DimensionMismatch("trace of non-square matrix");
  Complex t(0.0, 0.0);
  for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::hermiticity_defect() const {
  if (!is_square()) throw DimensionMismatch("hermiticity defect of non-square matrix");
  double s = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) s += std::norm((*this)(i, j) - std::conj((*this)(j, i)));
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  for (const auto& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product shape mismatch");
  Matrix m(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0, 0.0)) continue;
      for (int j = 0; j < b.cols(); ++j) m(i, j) += aik * b(k, j);
    }
  }
  return m;
}

Matrix operator*(Complex factor, Matrix a) { return a *= factor; }
Matrix operator*(Matrix a, Complex factor) { return a *= factor; }
Matrix operator*(double factor, Matrix a) { return a *= Complex(factor, 0.0); }
Matrix operator*(Matrix a, double factor) { return a *= Complex(factor, 0.0); }

Complex trace_product(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw DimensionMismatch("trace_product shape mismatch");
  Complex t(0.0, 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  return t;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (int ia = 0; ia < a.rows(); ++ia)
    for (int ja = 0; ja < a.cols(); ++ja) {
      const Complex f = a(ia, ja);
      if (f == Complex(0.0, 0.0)) continue;
      for (int ib = 0; ib < b.rows(); ++ib)
        for (int jb = 0; jb < b.cols(); ++jb)
          m(ia * b.rows() + ib, ja * b.cols() + jb) = f * b(ib, jb);
    }
  return m;
}

Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Keep keep) {
  const int d = dim_a * dim_b;
  if (m.rows() != d || m.cols() != d)
    throw DimensionMismatch("partial_trace: matrix is not dim_a*dim_b square");
  if (keep == Keep::A) {
    Matrix out(dim_a, dim_a);
    for (int i = 0; i < dim_a; ++i)
      for (int j = 0; j < dim_a; ++j)
        for (int b = 0; b < dim_b; ++b) out(i, j) += m(i * dim_b + b, j * dim_b + b);
    return out;
  }
  Matrix out(dim_b, dim_b);
  for (int i = 0; i < dim_b; ++i)
    for (int j = 0; j < dim_b; ++j)
      for (int a = 0; a < dim_a; ++a) out(i, j) += m(a * dim_b + i, a * dim_b + j);
  return out;
}

Matrix partial_transpose_b(const Matrix& m, int dim_a, int dim_b) {
  const int d = dim_a * dim_b;
  if (m.rows() != d || m.cols() != d)
    throw DimensionMismatch("partial_transpose_b: matrix is not dim_a*dim_b square");
  Matrix out(d, d);
  for (int ia = 0; ia < dim_a; ++ia)
    for (int ja = 0; ja < dim_a; ++ja)
      for (int ib = 0; ib < dim_b; ++ib)
        for (int jb = 0; jb < dim_b; ++jb)
          out(ia * dim_b + jb, ja * dim_b + ib) = m(ia * dim_b + ib, ja * dim_b + jb);
  return out;
}

std::vector<Complex> matrix_to_vec(const Matrix& m) {
  const int d = m.rows();
  std::vector<Complex> v(static_cast<size_t>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) v[static_cast<size_t>(j) * d + i] = m(i, j);
  return v;
}

Matrix vec_to_matrix(const std::vector<Complex>& v, int d) {
  if (static_cast<int>(v.size()) != d * d)
    throw DimensionMismatch("vec_to_matrix: length is not d*d");
  Matrix m(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = v[static_cast<size_t>(j) * d + i];
  return m;
}

namespace ops {
Matrix sigma_x() { return Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}); }
Matrix sigma_y() {
  return Matrix::from_rows({{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}});
}
Matrix sigma_z() { return Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}}); }
Matrix sigma_plus() { return Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}}); }
Matrix sigma_minus() { return Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}); }
}  // namespace ops

}  // namespace epmflux
