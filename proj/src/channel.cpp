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

#include "epmflux/channel.hpp"

#include <cmath>

#include "epmflux/eigen.hpp"
#include "epmflux/errors.hpp"

namespace epmflux {

namespace {

Complex kImagUnit(0.0, 1.0);

struct GeneratorTerms {
  std::vector<Matrix> jump_ops;        // scaled by sqrt(kappa)
  std::vector<Matrix> jump_products;   // L^dag L, scaled by kappa
};

GeneratorTerms prepare_jumps(const LindbladSpec& spec, int dim) {
  GeneratorTerms terms;
  for (const auto& jump : spec.jumps) {
    if (jump.kappa < 0.0) throw Error("lindblad: kappa must be non-negative");
    if (jump.op.rows() != dim || jump.op.cols() != dim)
      throw DimensionMismatch("lindblad: jump operator dimension mismatch");
    if (jump.kappa == 0.0) continue;
    terms.jump_ops.push_back(std::sqrt(jump.kappa) * jump.op);
    terms.jump_products.push_back(jump.kappa * (jump.op.adjoint() * jump.op));
  }
  return terms;
}

Matrix lindblad_rhs(const Matrix& h, const GeneratorTerms& terms, const Matrix& x) {
  Matrix out = (-kImagUnit) * (h * x - x * h);
  for (size_t a = 0; a < terms.jump_ops.size(); ++a) {
    const Matrix& l = terms.jump_ops[a];
    out += l * x * l.adjoint();
    out -= 0.5 * (terms.jump_products[a] * x + x * terms.jump_products[a]);
  }
  return out;
}

}  // namespace

QuantumChannel::QuantumChannel(int dim, Matrix superoperator,
                               std::optional<std::vector<Matrix>> kraus)
    : dim_(dim), superop_(std::move(superoperator)), kraus_(std::move(kraus)) {
  if (superop_.rows() != dim * dim || superop_.cols() != dim * dim)
    throw DimensionMismatch("channel: superoperator must be d^2 x d^2");
}

QuantumChannel QuantumChannel::identity(int dim) {
  return QuantumChannel(dim, Matrix::identity(dim * dim));
}

QuantumChannel QuantumChannel::from_kraus(std::vector<Matrix> kraus) {
  if (kraus.empty()) throw Error("channel: empty Kraus set");
  const int d = kraus.front().rows();
  Matrix superop(d * d, d * d);
  for (const Matrix& a : kraus) {
    if (a.rows() != d || a.cols() != d)
      throw DimensionMismatch("channel: Kraus operator dimension mismatch");
    superop += kron(a.conjugate(), a);  // vec(A X A^dag) = (conj(A) (x) A) vec(X)
  }
  return QuantumChannel(d, std::move(superop), std::move(kraus));
}

QuantumChannel QuantumChannel::unitary(const Matrix& u) {
  return from_kraus({u});
}

const std::vector<Matrix>& QuantumChannel::kraus() const {
  if (!kraus_) throw Error("channel: Kraus set not populated (use kraus_from_choi)");
  return *kraus_;
}

Matrix QuantumChannel::apply(const Matrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_)
    throw DimensionMismatch("channel: operand dimension mismatch");
  const std::vector<Complex> v = matrix_to_vec(x);
  std::vector<Complex> out(v.size(), Complex(0.0, 0.0));
  for (int i = 0; i < superop_.rows(); ++i) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < superop_.cols(); ++j) acc += superop_(i, j) * v[j];
    out[i] = acc;
  }
  return vec_to_matrix(out, dim_);
}

DensityMatrix QuantumChannel::apply_to_state(const DensityMatrix& rho) const {
  return DensityMatrix::from_numerical(apply(rho.matrix()), rho.bipartite_dims());
}

Matrix QuantumChannel::choi_matrix() const {
  const int d = dim_;
  Matrix choi(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      // Column j*d + i of the superoperator is vec(Phi[|i><j|]).
      const int col = j * d + i;
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
          choi(i * d + m, j * d + n) = superop_(n * d + m, col);
    }
  }
  return choi;
}

double QuantumChannel::trace_preservation_defect() const {
  const auto& ks = kraus();
  Matrix sum(dim_, dim_);
  for (const Matrix& a : ks) sum += a.adjoint() * a;
  return (sum - Matrix::identity(dim_)).frobenius_norm();
}

bool QuantumChannel::is_unital(double tol) const {
  const Matrix mixed = (1.0 / dim_) * Matrix::identity(dim_);
  return (apply(mixed) - mixed).frobenius_norm() <= tol;
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  if (second.dim() != first.dim()) throw DimensionMismatch("compose: dimension mismatch");
  return QuantumChannel(first.dim(), second.superoperator() * first.superoperator());
}

Matrix propagate_operator(const LindbladSpec& spec, const Matrix& x0, int steps) {
  if (steps < 1) throw Error("propagate: steps must be >= 1");
  const int d = x0.rows();
  const GeneratorTerms terms = prepare_jumps(spec, d);
  const double t_i = spec.schedule.t_i();
  const double dt = (spec.schedule.t_f() - t_i) / steps;

  Matrix x = x0;
  for (int n = 0; n < steps; ++n) {
    const double t = t_i + n * dt;
    const Matrix h1 = spec.schedule.at(t);
    const Matrix h2 = spec.schedule.at(t + 0.5 * dt);
    const Matrix h4 = spec.schedule.at(t + dt);
    const Matrix k1 = lindblad_rhs(h1, terms, x);
    const Matrix k2 = lindblad_rhs(h2, terms, x + (0.5 * dt) * k1);
    const Matrix k3 = lindblad_rhs(h2, terms, x + (0.5 * dt) * k2);
    const Matrix k4 = lindblad_rhs(h4, terms, x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!x.all_finite()) throw IntegrationUnstable("propagate: non-finite result");
  return x;
}

DensityMatrix propagate(const LindbladSpec& spec, const DensityMatrix& rho0, int steps) {
  Matrix x = propagate_operator(spec, rho0.matrix(), steps);
  if (std::abs(x.trace().real() - 1.0) > 1e-6 || std::abs(x.trace().imag()) > 1e-6)
    throw IntegrationUnstable("propagate: trace drift beyond 1e-6");
  // States have Frobenius norm at most one and a PSD spectrum; a blow-up or
  // negativity beyond integration roundoff means the step count is too low.
  if (x.frobenius_norm() > 1.0 + 1e-6)
    throw IntegrationUnstable("propagate: state norm blew up");
  if (min_eigenvalue(0.5 * (x + x.adjoint())) < -1e-6)
    throw IntegrationUnstable("propagate: negativity beyond tolerance");
  return DensityMatrix::from_numerical(x, rho0.bipartite_dims());
}

QuantumChannel channel_from_propagator(const LindbladSpec& spec, int steps) {
  const Matrix h0 = spec.schedule.at(spec.schedule.t_i());
  const int d = h0.rows();
  Matrix superop(d * d, d * d);
  // All d^2 basis propagations share the same fixed time grid, so the
  // extracted map is linear at the numerical level.
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      Matrix unit(d, d);
      unit(i, j) = 1.0;
      const Matrix image = propagate_operator(spec, unit, steps);
      const std::vector<Complex> col = matrix_to_vec(image);
      const int col_index = j * d + i;
      for (int r = 0; r < d * d; ++r) superop(r, col_index) = col[r];
    }
  }
  QuantumChannel channel(d, std::move(superop));
  const Matrix choi = channel.choi_matrix();
  Matrix sym(choi.rows(), choi.cols());
  for (int i = 0; i < choi.rows(); ++i)
    for (int j = 0; j < choi.cols(); ++j) sym(i, j) = 0.5 * (choi(i, j) + std::conj(choi(j, i)));
  if (min_eigenvalue(sym) < -1e-9)
    throw CompletePositivityViolation("channel_from_propagator: Choi matrix not PSD");
  return channel;
}

QuantumChannel kraus_from_choi(const QuantumChannel& channel) {
  const int d = channel.dim();
  const Matrix choi = channel.choi_matrix();
  Matrix sym(choi.rows(), choi.cols());
  for (int i = 0; i < choi.rows(); ++i)
    for (int j = 0; j < choi.cols(); ++j) sym(i, j) = 0.5 * (choi(i, j) + std::conj(choi(j, i)));
  const HermitianEigen eig = hermitian_eig(sym);
  if (eig.eigenvalues.front() < -1e-9)
    throw CompletePositivityViolation("kraus_from_choi: Choi matrix not PSD");

  std::vector<Matrix> kraus;
  for (int k = 0; k < d * d; ++k) {
    const double mu = eig.eigenvalues[k];
    if (mu < 1e-10) continue;
    const double w = std::sqrt(mu);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int m = 0; m < d; ++m) a(m, i) = w * eig.eigenvectors(i * d + m, k);
    kraus.push_back(std::move(a));
  }
  if (kraus.empty()) throw CompletePositivityViolation("kraus_from_choi: empty Kraus set");
  return QuantumChannel(d, channel.superoperator(), std::move(kraus));
}

DensityMatrix fixed_point(const QuantumChannel& channel, double cluster_tol) {
  const int d = channel.dim();
  const int n = d * d;
  Matrix shifted = channel.superoperator() - Matrix::identity(n);
  // Null space of S - I located through the Gram matrix (Hermitian, so the
  // Jacobi kernel applies). Squaring halves the resolvable precision, so the
  // decision uses the direct residual ||(S - I) v|| of each candidate.
  const Matrix gram = shifted.adjoint() * shifted;
  const HermitianEigen eig = hermitian_eig(gram);

  auto residual_of = [&](int k) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      Complex acc(0.0, 0.0);
      for (int j = 0; j < n; ++j) acc += shifted(i, j) * eig.eigenvectors(j, k);
      r2 += std::norm(acc);
    }
    return std::sqrt(r2);
  };
  int null_count = 0;
  int best = 0;
  double best_residual = HUGE_VAL;
  for (int k = 0; k < n; ++k) {
    const double r = residual_of(k);
    if (r <= cluster_tol) ++null_count;
    if (r < best_residual) {
      best_residual = r;
      best = k;
    }
  }
  if (null_count != 1)
    throw NoUniqueFixedPoint("fixed_point: eigenvalue-1 subspace has dimension " +
                             std::to_string(null_count));

  std::vector<Complex> v(n);
  for (int i = 0; i < n; ++i) v[i] = eig.eigenvectors(i, best);
  Matrix x = vec_to_matrix(v, d);
  Matrix sym(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sym(i, j) = 0.5 * (x(i, j) + std::conj(x(j, i)));
  const double tr = sym.trace().real();
  if (std::abs(tr) < 1e-12)
    throw NoUniqueFixedPoint("fixed_point: fixed direction is traceless");
  sym *= Complex(1.0 / tr, 0.0);
  return DensityMatrix::from_numerical(sym);
}

DensityMatrix backward_reference_state(const QuantumChannel& channel) {
  try {
    return fixed_point(channel);
  } catch (const NoUniqueFixedPoint&) {
    if (channel.is_unital())
      return DensityMatrix((1.0 / channel.dim()) * Matrix::identity(channel.dim()));
    throw;
  }
}

QuantumChannel dual_channel(const QuantumChannel& channel, const DensityMatrix& pi) {
  const int d = channel.dim();
  if (pi.dim() != d) throw DimensionMismatch("dual_channel: fixed point dimension mismatch");
  if (min_eigenvalue(pi.matrix()) < 1e-10)
    throw SingularFixedPoint("dual_channel: fixed point is not full rank");
  if ((channel.apply(pi.matrix()) - pi.matrix()).frobenius_norm() > 1e-8)
    throw NotAFixedPoint("dual_channel: state is not a fixed point of the map");

  const QuantumChannel with_kraus =
      channel.has_kraus() ? channel : kraus_from_choi(channel);
  const Matrix pi_sqrt = matrix_function(pi.matrix(), MatrixFunction::Sqrt);
  const Matrix pi_inv_sqrt = matrix_function(pi.matrix(), MatrixFunction::InvSqrt);

  std::vector<Matrix> dual_kraus;
  dual_kraus.reserve(with_kraus.kraus().size());
  for (const Matrix& a : with_kraus.kraus())
    dual_kraus.push_back(pi_sqrt * a.adjoint() * pi_inv_sqrt);
  QuantumChannel dual = QuantumChannel::from_kraus(std::move(dual_kraus));

  if (dual.trace_preservation_defect() > 1e-8)
    throw NotAFixedPoint("dual_channel: dual map is not trace preserving");
  if ((dual.apply(pi.matrix()) - pi.matrix()).frobenius_norm() > 1e-8)
    throw NotAFixedPoint("dual_channel: dual map does not fix pi");
  return dual;
}

}  // namespace epmflux
