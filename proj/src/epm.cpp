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

#include "epmflux/epm.hpp"

#include <algorithm>
#include <cmath>

#include "epmflux/errors.hpp"

namespace epmflux {

Matrix LevelSet::hamiltonian() const {
  Matrix h(dim, dim);
  for (size_t l = 0; l < energies.size(); ++l) h += energies[l] * projectors[l];
  return h;
}

LevelSet level_set_single(const EnergyBasis& basis) {
  LevelSet levels;
  levels.dim = basis.dim();
  levels.bipartite = false;
  for (int l = 0; l < basis.size(); ++l) {
    levels.energies.push_back(basis.energy(l));
    levels.projectors.push_back(basis.projector(l));
    levels.sublabels.push_back({l, -1});
  }
  return levels;
}

LevelSet level_set_bipartite(const EnergyBasis& basis_a, const EnergyBasis& basis_b) {
  LevelSet levels;
  levels.dim = basis_a.dim() * basis_b.dim();
  levels.bipartite = true;
  for (int la = 0; la < basis_a.size(); ++la)
    for (int lb = 0; lb < basis_b.size(); ++lb) {
      levels.energies.push_back(basis_a.energy(la) + basis_b.energy(lb));
      levels.projectors.push_back(kron(basis_a.projector(la), basis_b.projector(lb)));
      levels.sublabels.push_back({la, lb});
    }
  return levels;
}

std::vector<double> born_weights(const Matrix& x, const LevelSet& levels) {
  if (x.rows() != levels.dim) throw DimensionMismatch("born_weights: dimension mismatch");
  std::vector<double> weights(levels.size());
  for (int l = 0; l < levels.size(); ++l)
    weights[l] = trace_product(x, levels.projectors[l]).real();
  return weights;
}

namespace {

std::vector<double> born_probabilities(const Matrix& x, const LevelSet& levels) {
  std::vector<double> p = born_weights(x, levels);
  for (double& v : p) {
    if (v < -1e-9) throw InvalidState("born probability below tolerance");
    v = std::max(v, 0.0);
  }
  return p;
}

}  // namespace

EpmDistribution EpmDistribution::build(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                       LevelSet initial, LevelSet final_levels) {
  if (rho_i.dim() != initial.dim || phi.dim() != initial.dim ||
      final_levels.dim != initial.dim)
    throw DimensionMismatch("epm_distribution: inconsistent dimensions");
  EpmDistribution dist;
  dist.initial_ = std::move(initial);
  dist.final_ = std::move(final_levels);
  dist.p_initial_ = born_probabilities(rho_i.matrix(), dist.initial_);
  dist.p_final_ = born_probabilities(phi.apply(rho_i.matrix()), dist.final_);
  return dist;
}

double EpmDistribution::total_probability() const {
  double pi = 0.0, pf = 0.0;
  for (double v : p_initial_) pi += v;
  for (double v : p_final_) pf += v;
  return pi * pf;
}

double EpmDistribution::mean_delta_e() const {
  double mean = 0.0;
  for (int l = 0; l < initial_.size(); ++l)
    for (int k = 0; k < final_.size(); ++k) mean += joint(l, k) * delta_e(l, k);
  return mean;
}

Complex EpmDistribution::characteristic_function(Complex u) const {
  Complex g(0.0, 0.0);
  const Complex iu = Complex(0.0, 1.0) * u;
  for (int l = 0; l < initial_.size(); ++l)
    for (int k = 0; k < final_.size(); ++k)
      g += joint(l, k) * std::exp(iu * delta_e(l, k));
  return g;
}

std::vector<std::pair<double, double>> EpmDistribution::delta_e_histogram() const {
  std::vector<std::pair<double, double>> entries;
  for (int l = 0; l < initial_.size(); ++l)
    for (int k = 0; k < final_.size(); ++k) entries.push_back({delta_e(l, k), joint(l, k)});
  std::sort(entries.begin(), entries.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& [de, p] : entries) {
    if (!merged.empty() && de - merged.back().first <= 1e-12)
      merged.back().second += p;
    else
      merged.push_back({de, p});
  }
  return merged;
}

EpmDistribution epm_distribution(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                 const EnergyBasis& basis_i, const EnergyBasis& basis_f) {
  return EpmDistribution::build(rho_i, phi, level_set_single(basis_i),
                                level_set_single(basis_f));
}

EpmDistribution epm_distribution_bipartite(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                           const EnergyBasis& basis_i_a,
                                           const EnergyBasis& basis_i_b,
                                           const EnergyBasis& basis_f_a,
                                           const EnergyBasis& basis_f_b) {
  return EpmDistribution::build(rho_i, phi, level_set_bipartite(basis_i_a, basis_i_b),
                                level_set_bipartite(basis_f_a, basis_f_b));
}

Complex characteristic_function_operator(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                         const LevelSet& initial, const LevelSet& final_levels,
                                         Complex u) {
  const Complex iu = Complex(0.0, 1.0) * u;
  const int d = initial.dim;
  Matrix exp_initial(d, d);
  for (int l = 0; l < initial.size(); ++l)
    exp_initial += std::exp(-iu * initial.energies[l]) * initial.projectors[l];
  Matrix exp_final(d, d);
  for (int k = 0; k < final_levels.size(); ++k)
    exp_final += std::exp(iu * final_levels.energies[k]) * final_levels.projectors[k];
  return trace_product(rho_i.matrix(), exp_initial) *
         trace_product(phi.apply(rho_i.matrix()), exp_final);
}

double mean_energy_residual(const EpmDistribution& dist, const DensityMatrix& rho_i,
                            const QuantumChannel& phi) {
  const Matrix h_i = dist.initial_levels().hamiltonian();
  const Matrix h_f = dist.final_levels().hamiltonian();
  const double direct = trace_product(h_f, phi.apply(rho_i.matrix())).real() -
                        trace_product(h_i, rho_i.matrix()).real();
  return std::abs(dist.mean_delta_e() - direct);
}

}  // namespace epmflux
