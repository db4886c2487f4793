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

#include "epmflux/measures.hpp"

#include <algorithm>
#include <cmath>

#include "epmflux/eigen.hpp"
#include "epmflux/errors.hpp"
#include "epmflux/rng.hpp"

namespace epmflux {

namespace {

double marginal_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return HUGE_VAL;
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

void check_same_labels(const EpmDistribution& p, const EpmDistribution& q) {
  if (p.initial_levels().size() != q.initial_levels().size() ||
      p.final_levels().size() != q.final_levels().size())
    throw LabelMismatch("kl_divergence_tables: label count mismatch");
  for (int l = 0; l < p.initial_levels().size(); ++l)
    if (std::abs(p.initial_levels().energies[l] - q.initial_levels().energies[l]) > 1e-12)
      throw LabelMismatch("kl_divergence_tables: initial energies differ");
  for (int k = 0; k < p.final_levels().size(); ++k)
    if (std::abs(p.final_levels().energies[k] - q.final_levels().energies[k]) > 1e-12)
      throw LabelMismatch("kl_divergence_tables: final energies differ");
}

std::vector<double> clip_probabilities(std::vector<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
  return v;
}

/// Projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> y) {
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  const int d = static_cast<int>(y.size());
  for (int k = 0; k < d; ++k) {
    cum += sorted[k];
    const double candidate = (cum - 1.0) / (k + 1);
    if (k == d - 1 || sorted[k + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  for (double& v : y) v = std::max(v - tau, 0.0);
  return y;
}

}  // namespace

double kl_divergence_tables(const EpmDistribution& p, const EpmDistribution& q) {
  check_same_labels(p, q);
  const std::vector<double>& pi = p.p_initial();
  const std::vector<double>& pf = p.p_final();
  const std::vector<double>& qi = q.p_initial();
  const std::vector<double>& qf = q.p_final();

  const double by_marginals = marginal_kl(pi, qi) + marginal_kl(pf, qf);
  if (std::isinf(by_marginals)) return by_marginals;

  // Direct joint-table evaluation; must agree with the marginal sum because
  // both tables factorize.
  double direct = 0.0;
  for (size_t l = 0; l < pi.size(); ++l)
    for (size_t k = 0; k < pf.size(); ++k) {
      const double pj = pi[l] * pf[k];
      if (pj <= 0.0) continue;
      const double qj = qi[l] * qf[k];
      if (qj <= 0.0) return HUGE_VAL;
      direct += pj * std::log(pj / qj);
    }
  if (std::abs(direct - by_marginals) > 1e-10 * std::max(1.0, std::abs(by_marginals)))
    throw Error("kl_divergence_tables: marginal-sum identity violated");
  return by_marginals;
}

// ---------------------------------------------------------------------------
// Coherence fluctuation distance

namespace {

struct CfdProblem {
  // Data of min_sigma D_KL(p(rho) || p(sigma)) over diagonal sigma. The
  // variables are the d weights of sigma in the refined eigenbasis; both
  // table marginals are affine in them, so the objective is convex.
  std::vector<double> p_init;   // block-level initial probabilities of rho
  std::vector<double> p_final;  // final probabilities of rho
  std::vector<std::vector<double>> response;  // final table per basis state
  std::vector<int> block_of;                  // refined index -> block index
  int blocks = 0;

  double objective(const std::vector<double>& q) const {
    std::vector<double> q_block(blocks, 0.0);
    for (size_t m = 0; m < q.size(); ++m) q_block[block_of[m]] += q[m];
    double value = 0.0;
    for (int l = 0; l < blocks; ++l) {
      if (p_init[l] <= 0.0) continue;
      if (q_block[l] <= 0.0) return HUGE_VAL;
      value += p_init[l] * std::log(p_init[l] / q_block[l]);
    }
    for (size_t k = 0; k < p_final.size(); ++k) {
      if (p_final[k] <= 0.0) continue;
      double qk = 0.0;
      for (size_t m = 0; m < q.size(); ++m) qk += q[m] * response[m][k];
      if (qk <= 0.0) return HUGE_VAL;
      value += p_final[k] * std::log(p_final[k] / qk);
    }
    return value;
  }

  std::vector<double> gradient(const std::vector<double>& q) const {
    std::vector<double> q_block(blocks, 0.0);
    for (size_t m = 0; m < q.size(); ++m) q_block[block_of[m]] += q[m];
    std::vector<double> qk(p_final.size(), 0.0);
    for (size_t k = 0; k < p_final.size(); ++k)
      for (size_t m = 0; m < q.size(); ++m) qk[k] += q[m] * response[m][k];
    std::vector<double> g(q.size(), 0.0);
    for (size_t m = 0; m < q.size(); ++m) {
      const int l = block_of[m];
      if (p_init[l] > 0.0 && q_block[l] > 0.0) g[m] -= p_init[l] / q_block[l];
      for (size_t k = 0; k < p_final.size(); ++k)
        if (p_final[k] > 0.0 && qk[k] > 0.0) g[m] -= p_final[k] * response[m][k] / qk[k];
    }
    return g;
  }
};

CfdProblem build_cfd_problem(const DensityMatrix& rho_i, const QuantumChannel& phi,
                             const EnergyBasis& basis_i, const EnergyBasis& basis_f) {
  CfdProblem prob;
  const LevelSet levels_i = level_set_single(basis_i);
  const LevelSet levels_f = level_set_single(basis_f);
  prob.p_init = clip_probabilities(born_weights(rho_i.matrix(), levels_i));
  prob.p_final = clip_probabilities(born_weights(phi.apply(rho_i.matrix()), levels_f));
  prob.blocks = basis_i.size();

  const int d = basis_i.dim();
  const Matrix& u = basis_i.basis_unitary();
  for (int l = 0; l < basis_i.size(); ++l)
    for (int r = 0; r < basis_i.block_rank(l); ++r) prob.block_of.push_back(l);
  for (int m = 0; m < d; ++m) {
    Matrix pure(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) pure(i, j) = u(i, m) * std::conj(u(j, m));
    prob.response.push_back(clip_probabilities(born_weights(phi.apply(pure), levels_f)));
  }
  return prob;
}

DensityMatrix diagonal_state(const EnergyBasis& basis, const std::vector<double>& q) {
  const int d = basis.dim();
  const Matrix& u = basis.basis_unitary();
  Matrix m(d, d);
  for (int idx = 0; idx < d; ++idx)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) += q[idx] * u(i, idx) * std::conj(u(j, idx));
  return DensityMatrix::from_numerical(m);
}

}  // namespace

std::pair<double, double> cfd_bounds(const DensityMatrix& rho_i, const QuantumChannel& phi,
                                     const EnergyBasis& basis_i, const EnergyBasis& basis_f) {
  const EpmDistribution table_rho = epm_distribution(rho_i, phi, basis_i, basis_f);
  const EpmDistribution table_deph =
      epm_distribution(dephase(rho_i, basis_i), phi, basis_i, basis_f);
  const double bound_dephased = kl_divergence_tables(table_rho, table_deph);
  const double bound_cre = 2.0 * relative_entropy_of_coherence(rho_i, basis_i);
  return {bound_dephased, bound_cre};
}

CfdReport cfd(const DensityMatrix& rho_i, const QuantumChannel& phi, const EnergyBasis& basis_i,
              const EnergyBasis& basis_f) {
  const CfdProblem prob = build_cfd_problem(rho_i, phi, basis_i, basis_f);
  const int d = basis_i.dim();

  CfdReport report;
  std::vector<double> best_q;
  double best_value = HUGE_VAL;

  // The dephased state is always feasible; evaluating it up front guarantees
  // cfd <= bound_dephased in the report.
  std::vector<double> q_dephased(d, 0.0);
  {
    const Matrix rot =
        basis_i.basis_unitary().adjoint() * rho_i.matrix() * basis_i.basis_unitary();
    double sum = 0.0;
    for (int m = 0; m < d; ++m) {
      q_dephased[m] = std::max(rot(m, m).real(), 0.0);
      sum += q_dephased[m];
    }
    for (double& v : q_dephased) v /= sum;
  }
  best_q = q_dephased;
  best_value = prob.objective(q_dephased);

  if (d == 2) {
    // Golden-section search on q = (x, 1-x); the objective is convex.
    auto eval = [&](double x) { return prob.objective({x, 1.0 - x}); };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 1e-14, hi = 1.0 - 1e-14;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = eval(x1), f2 = eval(x2);
    int iters = 0;
    while (hi - lo > 1e-14 && iters < 220) {
      ++iters;
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = eval(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = eval(x2);
      }
    }
    const double x = 0.5 * (lo + hi);
    const double value = eval(x);
    if (value < best_value) {
      best_value = value;
      best_q = {x, 1.0 - x};
    }
    report.iterations = iters;
  } else {
    // Projected gradient with Armijo backtracking on the simplex.
    std::vector<double> q = q_dephased;
    for (double& v : q) v = std::max(v, 1e-12);
    q = project_simplex(std::move(q));
    double fq = prob.objective(q);
    int iter = 0;
    for (; iter < 2000; ++iter) {
      const std::vector<double> g = prob.gradient(q);
      double step = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 50; ++bt) {
        std::vector<double> trial(d);
        for (int m = 0; m < d; ++m) trial[m] = q[m] - step * g[m];
        trial = project_simplex(std::move(trial));
        const double ft = prob.objective(trial);
        if (ft < fq - 1e-16) {
          const double delta = fq - ft;
          q = std::move(trial);
          fq = ft;
          moved = true;
          if (delta < 1e-15) iter = 2000;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    report.iterations = iter;
    if (fq < best_value) {
      best_value = fq;
      best_q = q;
    }
  }

  // First-order certificate: length of the projected gradient step.
  {
    const std::vector<double> g = prob.gradient(best_q);
    std::vector<double> stepped(best_q.size());
    for (size_t m = 0; m < best_q.size(); ++m) stepped[m] = best_q[m] - 1e-3 * g[m];
    stepped = project_simplex(std::move(stepped));
    double norm = 0.0;
    for (size_t m = 0; m < best_q.size(); ++m) {
      const double diff = (stepped[m] - best_q[m]) / 1e-3;
      norm += diff * diff;
    }
    report.gradient_norm = std::sqrt(norm);
    report.converged = report.gradient_norm < 1e-6;
  }

  report.cfd = std::max(best_value, 0.0);
  report.argmin_state = diagonal_state(basis_i, best_q);
  const auto [bound_dephased, bound_cre] = cfd_bounds(rho_i, phi, basis_i, basis_f);
  report.bound_dephased = bound_dephased;
  report.bound_cre = bound_cre;
  return report;
}

PhaseCovarianceResult phase_covariance_check(const QuantumChannel& channel,
                                             const EnergyBasis& basis, std::uint64_t seed) {
  if (channel.dim() != 2 || basis.dim() != 2)
    throw DimensionMismatch("phase_covariance_check: qubit channels only");
  Rng rng(seed);
  const Matrix& u = basis.basis_unitary();
  PhaseCovarianceResult result;
  const double angles[] = {M_PI / 7.0, 1.0, 2.5};
  for (double angle : angles) {
    Matrix rot(2, 2);
    rot(0, 0) = std::exp(Complex(0.0, -angle));
    rot(1, 1) = std::exp(Complex(0.0, angle));
    const Matrix r_full = u * rot * u.adjoint();
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix rho = random_density(rng, 2);
      const Matrix lhs = r_full * channel.apply(rho) * r_full.adjoint();
      const Matrix rhs = channel.apply(r_full * rho * r_full.adjoint());
      result.deviation = std::max(result.deviation, (lhs - rhs).frobenius_norm());
    }
  }
  result.covariant = result.deviation < 1e-9;
  return result;
}

// ---------------------------------------------------------------------------
// Entanglement fluctuation distance

namespace {

struct EfdProblem {
  std::vector<double> p_init;
  std::vector<double> p_final;
  const QuantumChannel* phi = nullptr;
  const LevelSet* levels_i = nullptr;
  const LevelSet* levels_f = nullptr;

  double objective_tables(const std::vector<double>& qi, const std::vector<double>& qf) const {
    return marginal_kl(p_init, qi) + marginal_kl(p_final, qf);
  }

  double objective_state(const Matrix& sigma) const {
    return objective_tables(clip_probabilities(born_weights(sigma, *levels_i)),
                            clip_probabilities(born_weights(phi->apply(sigma), *levels_f)));
  }
};

struct ProductMixture {
  std::vector<double> weights;
  std::vector<std::vector<Complex>> vec_a;
  std::vector<std::vector<Complex>> vec_b;

  Matrix assemble() const {
    Matrix sigma(4, 4);
    for (size_t m = 0; m < weights.size(); ++m) {
      Matrix pa(2, 2), pb(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          pa(i, j) = vec_a[m][i] * std::conj(vec_a[m][j]);
          pb(i, j) = vec_b[m][i] * std::conj(vec_b[m][j]);
        }
      sigma += weights[m] * kron(pa, pb);
    }
    return sigma;
  }
};

ProductMixture random_mixture(Rng& rng, int terms) {
  ProductMixture mix;
  for (int m = 0; m < terms; ++m) {
    mix.weights.push_back(1.0 / terms);
    mix.vec_a.push_back(random_unit_vector(rng, 2));
    mix.vec_b.push_back(random_unit_vector(rng, 2));
  }
  return mix;
}

void seed_from_bsa(ProductMixture& mix, const BsaDecomposition& bsa) {
  for (size_t m = 0; m < mix.weights.size() && m < bsa.product_terms.size(); ++m) {
    const auto& term = bsa.product_terms[m];
    // Pure product states: the top eigenvector recovers the local vector.
    const HermitianEigen ea = hermitian_eig(term.state_a.matrix());
    const HermitianEigen eb = hermitian_eig(term.state_b.matrix());
    for (int i = 0; i < 2; ++i) {
      mix.vec_a[m][i] = ea.eigenvectors(i, 1);
      mix.vec_b[m][i] = eb.eigenvectors(i, 1);
    }
    mix.weights[m] = term.weight;
  }
  mix.weights = project_simplex(std::move(mix.weights));
}

/// Convex sub-step: optimal mixture weights for fixed product vectors.
void optimize_weights(const EfdProblem& prob, ProductMixture& mix) {
  const int terms = static_cast<int>(mix.weights.size());
  std::vector<std::vector<double>> ti(terms), tf(terms);
  for (int m = 0; m < terms; ++m) {
    Matrix pa(2, 2), pb(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        pa(i, j) = mix.vec_a[m][i] * std::conj(mix.vec_a[m][j]);
        pb(i, j) = mix.vec_b[m][i] * std::conj(mix.vec_b[m][j]);
      }
    const Matrix p = kron(pa, pb);
    ti[m] = clip_probabilities(born_weights(p, *prob.levels_i));
    tf[m] = clip_probabilities(born_weights(prob.phi->apply(p), *prob.levels_f));
  }
  auto tables = [&](const std::vector<double>& w) {
    std::vector<double> qi(prob.p_init.size(), 0.0), qf(prob.p_final.size(), 0.0);
    for (int m = 0; m < terms; ++m) {
      for (size_t l = 0; l < qi.size(); ++l) qi[l] += w[m] * ti[m][l];
      for (size_t k = 0; k < qf.size(); ++k) qf[k] += w[m] * tf[m][k];
    }
    return std::make_pair(qi, qf);
  };
  std::vector<double> w = mix.weights;
  auto [qi, qf] = tables(w);
  double fw = prob.objective_tables(qi, qf);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<double> g(terms, 0.0);
    for (int m = 0; m < terms; ++m) {
      for (size_t l = 0; l < qi.size(); ++l)
        if (prob.p_init[l] > 0.0 && qi[l] > 0.0) g[m] -= prob.p_init[l] * ti[m][l] / qi[l];
      for (size_t k = 0; k < qf.size(); ++k)
        if (prob.p_final[k] > 0.0 && qf[k] > 0.0) g[m] -= prob.p_final[k] * tf[m][k] / qf[k];
    }
    double step = 0.5;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      std::vector<double> trial(terms);
      for (int m = 0; m < terms; ++m) trial[m] = w[m] - step * g[m];
      trial = project_simplex(std::move(trial));
      auto [qti, qtf] = tables(trial);
      const double ft = prob.objective_tables(qti, qtf);
      if (ft < fw - 1e-16) {
        const double delta = fw - ft;
        w = std::move(trial);
        qi = std::move(qti);
        qf = std::move(qtf);
        fw = ft;
        moved = true;
        if (delta < 1e-14) iter = 300;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  mix.weights = w;
}

/// Local refinement of the product vectors along a deterministic stream.
void optimize_vectors(const EfdProblem& prob, ProductMixture& mix, Rng& rng, int budget) {
  double current = prob.objective_state(mix.assemble());
  double step = 0.3;
  for (int iter = 0; iter < budget; ++iter) {
    bool improved = false;
    for (size_t m = 0; m < mix.weights.size(); ++m) {
      if (mix.weights[m] < 1e-10) continue;
      for (int side = 0; side < 2; ++side) {
        auto& vec = side == 0 ? mix.vec_a[m] : mix.vec_b[m];
        const std::vector<Complex> saved = vec;
        for (int i = 0; i < 2; ++i) vec[i] += step * rng.complex_normal();
        const double norm = std::sqrt(std::norm(vec[0]) + std::norm(vec[1]));
        for (int i = 0; i < 2; ++i) vec[i] /= norm;
        const double trial = prob.objective_state(mix.assemble());
        if (trial < current - 1e-15) {
          current = trial;
          improved = true;
        } else {
          vec = saved;
        }
      }
    }
    if (!improved) step *= 0.6;
    if (step < 1e-6) break;
  }
}

}  // namespace

EfdReport efd_bounds(const DensityMatrix& rho_i, const QuantumChannel& phi,
                     const LevelSet& levels_i, const LevelSet& levels_f,
                     const BsaDecomposition& bsa, const EfdOptions& options) {
  EfdReport report;
  EfdProblem prob;
  prob.p_init = clip_probabilities(born_weights(rho_i.matrix(), levels_i));
  prob.p_final = clip_probabilities(born_weights(phi.apply(rho_i.matrix()), levels_f));
  prob.phi = &phi;
  prob.levels_i = &levels_i;
  prob.levels_f = &levels_f;

  if (!bsa.rho_separable) {
    // Fully entangled input: the separable part is empty and every bound in
    // this family diverges.
    report.bound_bsa = HUGE_VAL;
    report.bound_bsa_relent = HUGE_VAL;
    report.bound_relent_ent = HUGE_VAL;
    report.efd_upper_estimate = HUGE_VAL;
    report.support_ok = false;
    return report;
  }
  const DensityMatrix rho_s = *bsa.rho_separable;

  report.bound_bsa = prob.objective_state(rho_s.matrix());
  try {
    report.bound_bsa_relent = 2.0 * relative_entropy(rho_i, rho_s);
  } catch (const SupportViolation&) {
    report.bound_bsa_relent = HUGE_VAL;
    report.support_ok = false;
  }

  // rho_*-search: minimize the quantum relative entropy over the separable
  // mixture parametrization; twice the best value upper-bounds 2 D_E.
  Rng rng(options.seed + 1);
  double best_relent =
      std::isinf(report.bound_bsa_relent) ? HUGE_VAL : 0.5 * report.bound_bsa_relent;
  auto relent_of = [&](const Matrix& sigma) {
    try {
      return relative_entropy(rho_i, DensityMatrix::from_numerical(sigma));
    } catch (const SupportViolation&) {
      return HUGE_VAL;
    } catch (const InvalidState&) {
      return HUGE_VAL;
    }
  };
  for (int start = 0; start < options.starts; ++start) {
    ProductMixture mix = random_mixture(rng, options.mixture_terms);
    if (start == 0 && !bsa.product_terms.empty()) seed_from_bsa(mix, bsa);
    double current = relent_of(mix.assemble());
    double step = 0.3;
    for (int iter = 0; iter < options.outer_iters; ++iter) {
      bool improved = false;
      for (size_t m = 0; m < mix.weights.size(); ++m) {
        for (int side = 0; side < 2; ++side) {
          auto& vec = side == 0 ? mix.vec_a[m] : mix.vec_b[m];
          const std::vector<Complex> saved = vec;
          for (int i = 0; i < 2; ++i) vec[i] += step * rng.complex_normal();
          const double norm = std::sqrt(std::norm(vec[0]) + std::norm(vec[1]));
          for (int i = 0; i < 2; ++i) vec[i] /= norm;
          const double trial = relent_of(mix.assemble());
          if (trial < current - 1e-15) {
            current = trial;
            improved = true;
          } else {
            vec = saved;
          }
        }
        std::vector<double> saved_w = mix.weights;
        for (double& w : mix.weights) w = std::max(w + 0.1 * step * rng.normal(), 0.0);
        mix.weights = project_simplex(std::move(mix.weights));
        const double trial = relent_of(mix.assemble());
        if (trial < current - 1e-15) {
          current = trial;
          improved = true;
        } else {
          mix.weights = std::move(saved_w);
        }
      }
      if (!improved) step *= 0.6;
      if (step < 1e-6) break;
    }
    best_relent = std::min(best_relent, current);
  }
  report.bound_relent_ent = std::isinf(best_relent) ? HUGE_VAL : 2.0 * best_relent;
  report.best_separable_found = rho_s;
  report.efd_upper_estimate = report.bound_bsa;
  return report;
}

EfdReport efd_estimate(const DensityMatrix& rho_i, const QuantumChannel& phi,
                       const LevelSet& levels_i, const LevelSet& levels_f,
                       const EfdOptions& options) {
  BsaOptions bsa_options;
  bsa_options.seed = options.seed;
  const BsaDecomposition bsa = bsa_decompose(rho_i.with_dims(2, 2), bsa_options);
  EfdReport report = efd_bounds(rho_i, phi, levels_i, levels_f, bsa, options);

  EfdProblem prob;
  prob.p_init = clip_probabilities(born_weights(rho_i.matrix(), levels_i));
  prob.p_final = clip_probabilities(born_weights(phi.apply(rho_i.matrix()), levels_f));
  prob.phi = &phi;
  prob.levels_i = &levels_i;
  prob.levels_f = &levels_f;

  // The BSA separable part is a feasible point of the minimization, so its
  // divergence caps the estimate from the outset.
  Matrix best_sigma =
      bsa.rho_separable ? bsa.rho_separable->matrix() : 0.25 * Matrix::identity(4);
  double best = bsa.rho_separable ? report.bound_bsa : prob.objective_state(best_sigma);

  Rng rng(options.seed);
  for (int start = 0; start < options.starts; ++start) {
    ProductMixture mix = random_mixture(rng, options.mixture_terms);
    if (start == 0 && !bsa.product_terms.empty()) seed_from_bsa(mix, bsa);
    for (int outer = 0; outer < options.outer_iters; ++outer) {
      optimize_weights(prob, mix);
      optimize_vectors(prob, mix, rng, 4);
    }
    optimize_weights(prob, mix);
    const Matrix sigma = mix.assemble();
    const double value = prob.objective_state(sigma);
    if (value < best) {
      best = value;
      best_sigma = sigma;
    }
  }

  report.efd_upper_estimate = std::max(best, 0.0);
  report.best_separable_found =
      DensityMatrix::from_numerical(best_sigma, std::make_pair(2, 2));
  return report;
}

}  // namespace epmflux
