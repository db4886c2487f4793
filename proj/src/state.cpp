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

#include "epmflux/state.hpp"

#include <cmath>

#include "epmflux/errors.hpp"

namespace epmflux {

DensityMatrix::DensityMatrix(Matrix m, std::optional<std::pair<int, int>> dims)
    : m_(std::move(m)), dims_(dims) {
  if (!m_.is_square()) throw InvalidState("density matrix must be square");
  if (!m_.all_finite()) throw InvalidState("density matrix has non-finite entries");
  if (m_.hermiticity_defect() > kHermiticityTol)
    throw InvalidState("density matrix is not Hermitian within tolerance");
  if (std::abs(m_.trace().real() - 1.0) > kTraceTol || std::abs(m_.trace().imag()) > kTraceTol)
    throw InvalidState("density matrix trace differs from one");
  if (min_eigenvalue(m_) < -kPositivityTol)
    throw InvalidState("density matrix has a negative eigenvalue beyond tolerance");
  if (dims_ && dims_->first * dims_->second != m_.rows())
    throw DimensionMismatch("bipartite split does not match matrix dimension");
}

DensityMatrix DensityMatrix::from_numerical(const Matrix& m,
                                            std::optional<std::pair<int, int>> dims) {
  Matrix sym(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) sym(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  const HermitianEigen eig = hermitian_eig(sym);
  double total = 0.0;
  for (double lambda : eig.eigenvalues) total += std::max(lambda, 0.0);
  if (total <= 0.0) throw InvalidState("from_numerical: matrix has no positive weight");
  Matrix repaired = eig.assemble([total](double x) { return std::max(x, 0.0) / total; });
  return DensityMatrix(std::move(repaired), dims);
}

DensityMatrix DensityMatrix::with_dims(int dim_a, int dim_b) const {
  DensityMatrix out = *this;
  if (dim_a * dim_b != m_.rows())
    throw DimensionMismatch("with_dims: split does not match dimension");
  out.dims_ = std::make_pair(dim_a, dim_b);
  return out;
}

EnergyBasis EnergyBasis::from_hamiltonian(const Matrix& h, double degeneracy_tol) {
  const HermitianEigen eig = hermitian_eig(h);
  const int d = h.rows();
  double scale = 1.0;
  for (double e : eig.eigenvalues) scale = std::max(scale, std::abs(e));
  const double tol = degeneracy_tol * scale;

  EnergyBasis basis;
  basis.dim_ = d;
  basis.unitary_ = eig.eigenvectors;
  basis.refined_energies_ = eig.eigenvalues;

  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d && eig.eigenvalues[end] - eig.eigenvalues[end - 1] <= tol) ++end;
    Matrix proj(d, d);
    double energy = 0.0;
    for (int k = start; k < end; ++k) {
      energy += eig.eigenvalues[k];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          proj(i, j) += eig.eigenvectors(i, k) * std::conj(eig.eigenvectors(j, k));
    }
    basis.energies_.push_back(energy / (end - start));
    basis.projectors_.push_back(std::move(proj));
    basis.ranks_.push_back(end - start);
    start = end;
  }
  return basis;
}

EnergyBasis EnergyBasis::from_product(const EnergyBasis& basis_a, const EnergyBasis& basis_b) {
  EnergyBasis product;
  const int da = basis_a.dim(), db = basis_b.dim();
  product.dim_ = da * db;
  product.unitary_ = kron(basis_a.basis_unitary(), basis_b.basis_unitary());
  for (double ea : basis_a.refined_energies())
    for (double eb : basis_b.refined_energies()) product.refined_energies_.push_back(ea + eb);
  for (int la = 0; la < basis_a.size(); ++la)
    for (int lb = 0; lb < basis_b.size(); ++lb) {
      product.energies_.push_back(basis_a.energy(la) + basis_b.energy(lb));
      product.projectors_.push_back(kron(basis_a.projector(la), basis_b.projector(lb)));
      product.ranks_.push_back(basis_a.block_rank(la) * basis_b.block_rank(lb));
    }
  return product;
}

bool EnergyBasis::nondegenerate() const {
  for (int r : ranks_)
    if (r != 1) return false;
  return true;
}

Matrix EnergyBasis::hamiltonian() const {
  Matrix h(dim_, dim_);
  for (size_t l = 0; l < energies_.size(); ++l) h += energies_[l] * projectors_[l];
  return h;
}

std::pair<DensityMatrix, double> thermal_state(const Matrix& h, double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw Error("thermal_state: beta must be finite and non-negative");
  const HermitianEigen eig = hermitian_eig(h);
  const double e_min = eig.eigenvalues.front();
  double z_shifted = 0.0;
  for (double e : eig.eigenvalues) z_shifted += std::exp(-beta * (e - e_min));
  const double z = z_shifted * std::exp(-beta * e_min);
  Matrix gamma =
      eig.assemble([&](double e) { return std::exp(-beta * (e - e_min)) / z_shifted; });
  return {DensityMatrix(std::move(gamma)), z};
}

double free_energy_difference(double z_i, double z_f, double beta) {
  if (!(z_i > 0.0) || !(z_f > 0.0))
    throw NonpositivePartitionFunction("free_energy_difference: Z must be positive");
  if (!(beta > 0.0)) throw Error("free_energy_difference: beta must be positive");
  return -std::log(z_f / z_i) / beta;
}

DensityMatrix dephase(const DensityMatrix& rho, const EnergyBasis& basis) {
  if (basis.dim() != rho.dim()) throw DimensionMismatch("dephase: basis dimension mismatch");
  Matrix out(rho.dim(), rho.dim());
  for (int l = 0; l < basis.size(); ++l) {
    const Matrix& p = basis.projector(l);
    out += p * rho.matrix() * p;
  }
  return DensityMatrix::from_numerical(out, rho.bipartite_dims());
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const HermitianEigen eig = hermitian_eig(rho.matrix());
  double s = 0.0;
  for (double lambda : eig.eigenvalues)
    if (lambda > 0.0) s -= lambda * std::log(lambda);
  return s;
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("relative_entropy: dimension mismatch");
  const HermitianEigen eig_rho = hermitian_eig(rho.matrix());
  const HermitianEigen eig_sigma = hermitian_eig(sigma.matrix());
  const double floor = 1e-14 * std::max(eig_sigma.eigenvalues.back(), 0.0);

  double result = 0.0;
  for (double lambda : eig_rho.eigenvalues)
    if (lambda > 0.0) result += lambda * std::log(lambda);

  // Tr(rho ln sigma) accumulated over sigma's spectral weights; any rho
  // weight on a sigma null direction signals a divergent result.
  const int d = rho.dim();
  for (int k = 0; k < d; ++k) {
    double weight = 0.0;
    for (int i = 0; i < d; ++i) {
      Complex amp(0.0, 0.0);
      for (int j = 0; j < d; ++j) amp += rho.matrix()(i, j) * eig_sigma.eigenvectors(j, k);
      weight += (std::conj(eig_sigma.eigenvectors(i, k)) * amp).real();
    }
    weight = std::max(weight, 0.0);
    const double mu = eig_sigma.eigenvalues[k];
    if (mu <= floor) {
      if (weight > 1e-12)
        throw SupportViolation("relative_entropy: rho not supported inside sigma");
      continue;
    }
    result -= weight * std::log(mu);
  }
  return result;
}

double relative_entropy_of_coherence(const DensityMatrix& rho, const EnergyBasis& basis) {
  return von_neumann_entropy(dephase(rho, basis)) - von_neumann_entropy(rho);
}

}  // namespace epmflux
