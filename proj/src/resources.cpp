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

#include "epmflux/resources.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>

#include "epmflux/eigen.hpp"
#include "epmflux/errors.hpp"
#include "epmflux/rng.hpp"

namespace epmflux {

namespace {

constexpr double kZeroWeight = 1e-12;

Matrix rotate_into(const Matrix& m, const Matrix& u) {  // U^dag m U, symmetrized
  Matrix r = u.adjoint() * m * u;
  Matrix sym(r.rows(), r.cols());
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) sym(i, j) = 0.5 * (r(i, j) + std::conj(r(j, i)));
  return sym;
}

Matrix rotate_back(const Matrix& m, const Matrix& u) { return u * m * u.adjoint(); }

double off_diagonal_norm(const Matrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j) s += std::norm(m(i, j));
  return std::sqrt(s);
}

Matrix diag_matrix(const std::vector<double>& x) {
  Matrix m(static_cast<int>(x.size()), static_cast<int>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = x[i];
  return m;
}

/// Euclidean projection onto {x >= 0, sum x = s}.
std::vector<double> project_scaled_simplex(std::vector<double> y, double s) {
  const int d = static_cast<int>(y.size());
  if (s <= 0.0) return std::vector<double>(d, 0.0);
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  for (int k = 0; k < d; ++k) {
    cum += sorted[k];
    const double candidate = (cum - s) / (k + 1);
    if (k == d - 1 || sorted[k + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  for (double& v : y) v = std::max(v - tau, 0.0);
  return y;
}

Matrix psd_projection(const Matrix& m) {
  const HermitianEigen eig = hermitian_eig(m);
  return eig.assemble([](double x) { return std::max(x, 0.0); });
}

struct CoherenceLp {
  // max sum(x) subject to x >= 0 and rho_rotated - diag(x) PSD.
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
};

/// Alternating projections feasibility probe for a fixed target mass.
bool pocs_feasible(const Matrix& r, double target, std::vector<double>* x_out,
                   int max_iters = 600, double dist_tol = 1e-11) {
  const int d = r.rows();
  std::vector<double> diag_r(d);
  for (int i = 0; i < d; ++i) diag_r[i] = r(i, i).real();
  std::vector<double> x(d, target / d);
  double dist = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    Matrix m = r - diag_matrix(x);
    const Matrix m_psd = psd_projection(m);
    dist = (m - m_psd).frobenius_norm();
    if (dist <= dist_tol) {
      if (x_out) *x_out = x;
      return true;
    }
    std::vector<double> y(d);
    for (int i = 0; i < d; ++i) y[i] = diag_r[i] - m_psd(i, i).real();
    x = project_scaled_simplex(std::move(y), target);
  }
  if (x_out) *x_out = x;
  return dist <= 10.0 * dist_tol;
}

/**
 * Interior-point refinement of the diagonal-mass maximum. The alternating
 * projection bracket is accurate to ~1e-6 near the feasibility boundary,
 * which is not enough for the downstream tolerances; a short log-det barrier
 * Newton run reaches machine precision whenever rho is strictly positive.
 */
CoherenceLp barrier_polish(const Matrix& r, std::vector<double> x0) {
  CoherenceLp result;
  const int d = r.rows();
  const double mu_min_r = min_eigenvalue(r);
  if (mu_min_r <= 1e-12) return result;  // no strictly feasible interior

  std::vector<double> x = std::move(x0);
  // Pull the start strictly inside: shrink until R - diag(x) is PD.
  const double floor = 1e-10;
  for (double& v : x) v = std::max(v, floor);
  for (int tries = 0; tries < 200; ++tries) {
    if (min_eigenvalue(r - diag_matrix(x)) > 1e-12) break;
    for (double& v : x) v = std::max(0.8 * v, floor * 0.5);
  }
  if (min_eigenvalue(r - diag_matrix(x)) <= 0.0) {
    x.assign(d, 0.25 * mu_min_r);
  }

  // The iterate stays feasible throughout, so every structural stop below
  // (boundary hit, numerically singular Hessian) just ends the refinement
  // and keeps the current point.
  bool done = false;
  for (double mu = 1e-2; mu >= 1e-14 && !done; mu *= 0.2) {
    for (int newton = 0; newton < 40; ++newton) {
      const Matrix m = r - diag_matrix(x);
      const HermitianEigen meig = hermitian_eig(m);
      if (meig.eigenvalues.front() <= 1e-16 * std::max(meig.eigenvalues.back(), 1e-30)) {
        done = true;
        break;
      }
      const Matrix m_inv = meig.assemble([](double v) { return 1.0 / v; });
      std::vector<double> grad(d);
      for (int i = 0; i < d; ++i) grad[i] = 1.0 + mu / x[i] - mu * m_inv(i, i).real();
      // Negated Hessian (positive definite): mu |Minv_ij|^2 + mu delta_ij/x_i^2.
      std::vector<std::vector<double>> h(d, std::vector<double>(d));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          h[i][j] = mu * std::norm(m_inv(i, j));
          if (i == j) h[i][j] += mu / (x[i] * x[i]);
        }
      // Solve h * delta = grad by Gaussian elimination with partial pivoting.
      std::vector<double> delta = grad;
      bool singular = false;
      for (int col = 0; col < d && !singular; ++col) {
        int pivot = col;
        for (int rI = col + 1; rI < d; ++rI)
          if (std::abs(h[rI][col]) > std::abs(h[pivot][col])) pivot = rI;
        std::swap(h[col], h[pivot]);
        std::swap(delta[col], delta[pivot]);
        if (std::abs(h[col][col]) < 1e-300) {
          singular = true;
          break;
        }
        for (int rI = col + 1; rI < d; ++rI) {
          const double f = h[rI][col] / h[col][col];
          for (int cI = col; cI < d; ++cI) h[rI][cI] -= f * h[col][cI];
          delta[rI] -= f * delta[col];
        }
      }
      if (singular) {
        done = true;
        break;
      }
      for (int rI = d - 1; rI >= 0; --rI) {
        for (int cI = rI + 1; cI < d; ++cI) delta[rI] -= h[rI][cI] * delta[cI];
        delta[rI] /= h[rI][rI];
      }
      double step = 1.0;
      std::vector<double> x_next(d);
      bool stepped = false;
      for (int bt = 0; bt < 60; ++bt) {
        bool positive = true;
        for (int i = 0; i < d; ++i) {
          x_next[i] = x[i] + step * delta[i];
          if (x_next[i] <= 0.0) positive = false;
        }
        if (positive && min_eigenvalue(r - diag_matrix(x_next)) > 0.0) {
          stepped = true;
          break;
        }
        step *= 0.5;
      }
      if (!stepped) break;
      double move = 0.0;
      for (int i = 0; i < d; ++i) move += std::abs(x_next[i] - x[i]);
      x = x_next;
      if (move < 1e-15) break;
    }
  }
  result.x = x;
  result.value = 0.0;
  for (double v : x) result.value += v;
  result.converged = true;
  return result;
}

CoherenceDecomposition assemble_coherence(const Matrix& r, const Matrix& u,
                                          const std::vector<double>& x, double c) {
  const int d = r.rows();
  CoherenceDecomposition out;
  out.c = std::clamp(c, 0.0, 1.0);
  const double mass = 1.0 - out.c;
  if (mass > kZeroWeight) {
    std::vector<double> sigma_diag(d);
    for (int i = 0; i < d; ++i) sigma_diag[i] = std::max(x[i], 0.0) / mass;
    out.sigma = DensityMatrix::from_numerical(rotate_back(diag_matrix(sigma_diag), u));
  } else {
    // c = 1: any diagonal state closes the decomposition.
    std::vector<double> sigma_diag(d, 1.0 / d);
    out.sigma = DensityMatrix(rotate_back(diag_matrix(sigma_diag), u));
    out.tau_conventional = true;
  }
  if (out.c > kZeroWeight) {
    Matrix tau = (r - diag_matrix(x)) * (1.0 / out.c);
    out.tau = DensityMatrix::from_numerical(rotate_back(tau, u));
  } else {
    out.tau = out.sigma;
    out.tau_conventional = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Best separable approximation machinery (two qubits)

struct ProductCandidate {
  std::vector<Complex> e{Complex(1, 0), Complex(0, 0)};
  std::vector<Complex> f{Complex(1, 0), Complex(0, 0)};
  double subtractable = 0.0;
};

std::vector<Complex> product_vector(const std::vector<Complex>& e,
                                    const std::vector<Complex>& f) {
  std::vector<Complex> w(4);
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i) w[a * 2 + i] = e[a] * f[i];
  return w;
}

Matrix projector_from_vector(const std::vector<Complex>& w) {
  const int d = static_cast<int>(w.size());
  Matrix p(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p(i, j) = w[i] * std::conj(w[j]);
  return p;
}

/// Exact maximal weight t with R - t |w><w| still PSD, from R's spectrum.
double max_subtractable_weight(const HermitianEigen& eig, const std::vector<Complex>& w,
                               double support_cut) {
  double in_range = 0.0;
  double leak = 0.0;
  const int d = static_cast<int>(w.size());
  for (int k = 0; k < d; ++k) {
    Complex amp(0.0, 0.0);
    for (int i = 0; i < d; ++i) amp += std::conj(eig.eigenvectors(i, k)) * w[i];
    const double weight = std::norm(amp);
    if (eig.eigenvalues[k] > support_cut)
      in_range += weight / eig.eigenvalues[k];
    else
      leak += weight;
  }
  if (leak > 1e-9 || in_range <= 0.0) return 0.0;
  return 1.0 / in_range;
}

/// Closed-form minimal eigenpair of a 2x2 Hermitian matrix.
double min_eigvec_2x2(const Matrix& m, std::vector<Complex>& v) {
  const double alpha = m(0, 0).real();
  const double delta = m(1, 1).real();
  const Complex beta = m(0, 1);
  const double mean = 0.5 * (alpha + delta);
  const double radius = std::sqrt(0.25 * (alpha - delta) * (alpha - delta) + std::norm(beta));
  const double lambda = mean - radius;
  if (std::abs(beta) < 1e-150) {
    v = alpha <= delta ? std::vector<Complex>{Complex(1, 0), Complex(0, 0)}
                       : std::vector<Complex>{Complex(0, 0), Complex(1, 0)};
    return lambda;
  }
  v = {beta, Complex(lambda - alpha, 0.0)};
  const double inv = 1.0 / std::sqrt(std::norm(v[0]) + std::norm(v[1]));
  v[0] *= inv;
  v[1] *= inv;
  return lambda;
}

/**
 * Seesaw minimization of <e,f| Q |e,f> for a fixed PSD quadratic form Q,
 * alternating the exact 2x2 eigenvector solutions in each factor.
 */
void seesaw(const Matrix& q, std::vector<Complex>& e, std::vector<Complex>& f) {
  double prev = 1e300;
  for (int iter = 0; iter < 200; ++iter) {
    // Minimize over f with e fixed.
    Matrix bf(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Complex acc(0.0, 0.0);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) acc += std::conj(e[a]) * q(a * 2 + i, b * 2 + j) * e[b];
        bf(i, j) = acc;
      }
    min_eigvec_2x2(bf, f);
    // Minimize over e with f fixed.
    Matrix be(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Complex acc(0.0, 0.0);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) acc += std::conj(f[i]) * q(a * 2 + i, b * 2 + j) * f[j];
        be(a, b) = acc;
      }
    const double value = min_eigvec_2x2(be, e);
    if (std::abs(prev - value) <= 1e-15 * std::max(1.0, std::abs(value))) break;
    prev = value;
  }
}

/// Gaussian elimination with partial pivoting; solves h x = rhs in place.
bool solve_linear(std::vector<std::vector<double>>& h, std::vector<double>& rhs) {
  const int n = static_cast<int>(rhs.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(h[r][col]) > std::abs(h[pivot][col])) pivot = r;
    std::swap(h[col], h[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    if (std::abs(h[col][col]) < 1e-300) return false;
    for (int r = col + 1; r < n; ++r) {
      const double f = h[r][col] / h[col][col];
      for (int c = col; c < n; ++c) h[r][c] -= f * h[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    for (int c = r + 1; c < n; ++c) rhs[r] -= h[r][c] * rhs[c];
    rhs[r] /= h[r][r];
  }
  return true;
}

/**
 * Exact joint weight optimum for fixed product directions: maximize sum(t)
 * with rho - sum_j t_j |w_j><w_j| PSD and t >= 0, by a log-det barrier
 * Newton method. Returns the weights (possibly ~0 for dropped directions).
 */
std::vector<double> barrier_weight_lp(const Matrix& rho,
                                      const std::vector<std::vector<Complex>>& vectors,
                                      std::vector<double> t) {
  const int n = static_cast<int>(vectors.size());
  const int d = rho.rows();
  if (n == 0) return t;
  std::vector<Matrix> projs;
  projs.reserve(n);
  for (const auto& w : vectors) {
    Matrix p(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) p(i, j) = w[i] * std::conj(w[j]);
    projs.push_back(std::move(p));
  }
  auto m_of = [&](const std::vector<double>& weights) {
    Matrix m = rho;
    for (int j = 0; j < n; ++j) m -= weights[j] * projs[j];
    return m;
  };
  // Strictly feasible start.
  const double floor = 1e-12;
  for (double& v : t) v = std::max(v, floor);
  for (int tries = 0; tries < 300; ++tries) {
    if (min_eigenvalue(m_of(t)) > 1e-13) break;
    for (double& v : t) v = std::max(0.7 * v, 0.5 * floor);
  }
  if (min_eigenvalue(m_of(t)) <= 0.0) t.assign(n, floor);
  if (min_eigenvalue(m_of(t)) <= 0.0) return std::vector<double>(n, 0.0);

  bool done = false;
  for (double mu = 1e-2; mu >= 1e-13 && !done; mu *= 0.25) {
    for (int newton = 0; newton < 30; ++newton) {
      const Matrix m = m_of(t);
      const HermitianEigen meig = hermitian_eig(m);
      if (meig.eigenvalues.front() <= 1e-16 * std::max(meig.eigenvalues.back(), 1e-30)) {
        done = true;
        break;
      }
      const Matrix m_inv = meig.assemble([](double v) { return 1.0 / v; });
      std::vector<Complex> forms(n * n);  // <w_i| M^{-1} |w_j>
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Complex acc(0.0, 0.0);
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
              acc += std::conj(vectors[i][r]) * m_inv(r, c) * vectors[j][c];
          forms[i * n + j] = acc;
        }
      std::vector<double> grad(n);
      for (int j = 0; j < n; ++j)
        grad[j] = 1.0 + mu / t[j] - mu * forms[j * n + j].real();
      std::vector<std::vector<double>> h(n, std::vector<double>(n));
      bool h_finite = true;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          h[i][j] = mu * std::norm(forms[i * n + j]);
          if (i == j) h[i][j] += mu / (t[i] * t[i]);
          if (!std::isfinite(h[i][j])) h_finite = false;
        }
      if (!h_finite) {
        done = true;
        break;
      }
      std::vector<double> delta = grad;
      if (!solve_linear(h, delta)) {
        done = true;
        break;
      }
      bool finite = true;
      for (double v : delta)
        if (!std::isfinite(v)) finite = false;
      if (!finite) {
        done = true;
        break;
      }
      double step = 1.0;
      std::vector<double> t_next(n);
      bool stepped = false;
      for (int bt = 0; bt < 60; ++bt) {
        bool positive = true;
        for (int j = 0; j < n; ++j) {
          t_next[j] = t[j] + step * delta[j];
          if (t_next[j] <= 0.0) positive = false;
        }
        if (positive && min_eigenvalue(m_of(t_next)) > 0.0) {
          stepped = true;
          break;
        }
        step *= 0.5;
      }
      if (!stepped) break;
      double move = 0.0;
      for (int j = 0; j < n; ++j) move += std::abs(t_next[j] - t[j]);
      t = t_next;
      if (move < 1e-15) break;
    }
  }
  return t;
}

/// Best single pure product subtraction from the PSD remainder R.
ProductCandidate best_product_subtraction(const Matrix& r, Rng& rng, int starts,
                                          const std::vector<ProductCandidate>& hints) {
  ProductCandidate best;
  const HermitianEigen eig = hermitian_eig(r);
  const double mu_max = eig.eigenvalues.back();
  if (mu_max <= 1e-14) return best;
  const double support_cut = 1e-12 * mu_max;

  // Penalized pseudo-inverse: kernel directions are made expensive so the
  // seesaw stays inside the range of R.
  const double penalty = 1e3 / support_cut;
  Matrix q = eig.assemble([&](double mu) { return mu > support_cut ? 1.0 / mu : penalty; });

  std::vector<std::pair<std::vector<Complex>, std::vector<Complex>>> seeds;
  for (const auto& h : hints) seeds.push_back({h.e, h.f});
  const std::vector<Complex> zero{Complex(1, 0), Complex(0, 0)};
  const std::vector<Complex> one{Complex(0, 0), Complex(1, 0)};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const std::vector<Complex> plus{Complex(inv_sqrt2, 0), Complex(inv_sqrt2, 0)};
  const std::vector<Complex> plus_i{Complex(inv_sqrt2, 0), Complex(0, inv_sqrt2)};
  seeds.push_back({zero, zero});
  seeds.push_back({zero, one});
  seeds.push_back({one, zero});
  seeds.push_back({one, one});
  seeds.push_back({plus, plus});
  seeds.push_back({plus_i, plus_i});
  for (int s = 0; s < starts; ++s)
    seeds.push_back({random_unit_vector(rng, 2), random_unit_vector(rng, 2)});

  for (auto& [e, f] : seeds) {
    seesaw(q, e, f);
    const std::vector<Complex> w = product_vector(e, f);
    double t = max_subtractable_weight(eig, w, support_cut);
    if (t <= 0.0) continue;
    // Guard the exactness of the PSD subtraction against spectral roundoff.
    Matrix trial = r - t * projector_from_vector(w);
    for (int shrink = 0; shrink < 40 && min_eigenvalue(trial) < -1e-13 * std::max(mu_max, 1.0);
         ++shrink) {
      t *= (1.0 - 1e-12);
      trial = r - t * projector_from_vector(w);
    }
    if (t > best.subtractable) {
      best.e = e;
      best.f = f;
      best.subtractable = t;
    }
  }
  return best;
}

}  // namespace

AthermalityDecomposition weight_of_athermality(const DensityMatrix& rho,
                                               const DensityMatrix& gamma) {
  if (rho.dim() != gamma.dim())
    throw DimensionMismatch("weight_of_athermality: dimension mismatch");
  if (min_eigenvalue(gamma.matrix()) <= 1e-10)
    throw SingularReference("weight_of_athermality: reference state not full rank");

  const Matrix gamma_inv_sqrt = matrix_function(gamma.matrix(), MatrixFunction::InvSqrt);
  const Matrix x = gamma_inv_sqrt * rho.matrix() * gamma_inv_sqrt;
  const double mu_min = min_eigenvalue(x);
  const double a = std::clamp(1.0 - mu_min, 0.0, 1.0);

  AthermalityDecomposition out;
  out.a = a;
  out.reference = gamma;
  if (a < kZeroWeight) {
    out.tau = gamma;  // conventional minimal state at a = 0
  } else {
    Matrix tau = (rho.matrix() - (1.0 - a) * gamma.matrix()) * (1.0 / a);
    out.tau = DensityMatrix::from_numerical(tau);
  }
  return out;
}

CoherenceDecomposition weight_of_coherence(const DensityMatrix& rho, const EnergyBasis& basis,
                                           CoherenceMethod method) {
  if (basis.dim() != rho.dim())
    throw DimensionMismatch("weight_of_coherence: basis dimension mismatch");
  const Matrix& u = basis.basis_unitary();
  const Matrix r = rotate_into(rho.matrix(), u);
  const int d = r.rows();

  if (off_diagonal_norm(r) <= 1e-12) {
    std::vector<double> x(d);
    for (int i = 0; i < d; ++i) x[i] = std::max(r(i, i).real(), 0.0);
    return assemble_coherence(r, u, x, 0.0);
  }

  if (d == 2 && method == CoherenceMethod::Auto) {
    const double p = r(0, 0).real();
    const double q = r(1, 1).real();
    const double g = std::abs(r(0, 1));
    double slack_p, slack_q;
    if (g <= std::min(p, q)) {
      slack_p = g;
      slack_q = g;
    } else if (g > q) {
      slack_q = q;
      slack_p = g * g / q;
    } else {
      slack_p = p;
      slack_q = g * g / p;
    }
    const double c = slack_p + slack_q;
    const std::vector<double> x{p - slack_p, q - slack_q};
    return assemble_coherence(r, u, x, c);
  }

  // General dimension: alternating-projection bisection for a bracket and a
  // feasible diagonal, then interior-point polish for the final digits.
  double lo = 0.0, hi = 1.0;
  std::vector<double> x_best(d, 0.0);
  for (int iter = 0; iter < 45; ++iter) {
    const double mid = 0.5 * (lo + hi);
    std::vector<double> x;
    if (pocs_feasible(r, 1.0 - mid, &x)) {
      hi = mid;
      x_best = x;
    } else {
      lo = mid;
    }
  }
  double best_mass = 0.0;
  for (double v : x_best) best_mass += v;

  const CoherenceLp polished = barrier_polish(r, x_best);
  std::vector<double> x = x_best;
  if (polished.converged && polished.value > best_mass) {
    x = polished.x;
    best_mass = polished.value;
  }
  // Spectral certificate for the reported optimum.
  if (min_eigenvalue(r - diag_matrix(x)) < -1e-9)
    throw OptimizationNotConverged("weight_of_coherence: certificate failed");
  const double c = std::clamp(1.0 - best_mass, 0.0, 1.0);
  return assemble_coherence(r, u, x, c);
}

TripleDecomposition triple_decompose(const DensityMatrix& rho, const DensityMatrix& gamma,
                                     const EnergyBasis& basis) {
  const AthermalityDecomposition atherm = weight_of_athermality(rho, gamma);
  TripleDecomposition out;
  out.a = atherm.a;
  out.reference = gamma;
  if (atherm.a < kZeroWeight) {
    // tau = gamma by convention, which is incoherent: c reported as 0.
    out.c = 0.0;
    out.tau_d = gamma;
    out.tau_c = gamma;
    return out;
  }
  const CoherenceDecomposition coh = weight_of_coherence(atherm.tau, basis);
  out.c = coh.c;
  out.tau_d = coh.sigma;
  out.tau_c = coh.tau;
  return out;
}

CorrelationSplit correlation_split(const DensityMatrix& rho, double beta, const Matrix& h_a,
                                   const Matrix& h_b) {
  const auto& dims = rho.bipartite_dims();
  if (!dims) throw DimensionMismatch("correlation_split: state has no bipartite split");
  const auto [da, db] = *dims;
  if (h_a.rows() != da || h_b.rows() != db)
    throw DimensionMismatch("correlation_split: local Hamiltonian dimensions");

  const auto [gamma_a, za] = thermal_state(h_a, beta);
  const auto [gamma_b, zb] = thermal_state(h_b, beta);
  (void)za;
  (void)zb;
  const Matrix marg_a = partial_trace(rho.matrix(), da, db, Keep::A);
  const Matrix marg_b = partial_trace(rho.matrix(), da, db, Keep::B);
  if ((marg_a - gamma_a.matrix()).frobenius_norm() > 1e-8 ||
      (marg_b - gamma_b.matrix()).frobenius_norm() > 1e-8)
    throw MarginalsNotThermal("correlation_split: marginals differ from thermal references");

  CorrelationSplit out;
  out.marginal_a = gamma_a;
  out.marginal_b = gamma_b;
  out.correlation_operator = rho.matrix() - kron(gamma_a.matrix(), gamma_b.matrix());
  return out;
}

namespace {

struct ProductExtraction {
  struct Term {
    double t;
    std::vector<Complex> e, f;
  };
  std::vector<Term> terms;
  Matrix remainder;
  double total = 0.0;
};

/**
 * Damped greedy subtraction of pure product states followed by polishing
 * sweeps: single-direction re-optimization against the pooled rest plus the
 * exact joint weight solve for the current directions.
 */
ProductExtraction extract_products(const Matrix& rho, Rng& rng, const BsaOptions& options) {
  ProductExtraction out;
  out.remainder = rho;
  auto& terms = out.terms;
  Matrix& remainder = out.remainder;

  auto subtract = [&](const ProductExtraction::Term& term) {
    remainder -= term.t * projector_from_vector(product_vector(term.e, term.f));
  };
  auto add_back = [&](const ProductExtraction::Term& term) {
    remainder += term.t * projector_from_vector(product_vector(term.e, term.f));
  };
  auto vectors_of = [&]() {
    std::vector<std::vector<Complex>> vs;
    vs.reserve(terms.size());
    for (const auto& term : terms) vs.push_back(product_vector(term.e, term.f));
    return vs;
  };
  auto rebuild_remainder = [&]() {
    remainder = rho;
    for (const auto& term : terms)
      remainder -= term.t * projector_from_vector(product_vector(term.e, term.f));
  };
  auto solve_weights = [&]() {
    if (terms.empty()) return 0.0;
    std::vector<double> t0;
    for (const auto& term : terms) t0.push_back(term.t);
    const std::vector<double> t = barrier_weight_lp(rho, vectors_of(), t0);
    double total = 0.0;
    for (size_t j = 0; j < terms.size(); ++j) {
      terms[j].t = t[j];
      total += t[j];
    }
    rebuild_remainder();
    return total;
  };
  auto total_weight = [&]() {
    double total = 0.0;
    for (const auto& term : terms) total += term.t;
    return total;
  };

  // Accumulation: subtracting the full maximal weight would make the
  // remainder singular after one step and lock the later searches into a
  // collapsing range, so only a fraction is taken per step.
  const double damping = 0.5;
  for (int step = 0; step < 6 * options.max_terms; ++step) {
    const ProductCandidate cand = best_product_subtraction(remainder, rng, options.starts, {});
    if (cand.subtractable < options.min_weight) break;
    const bool slots_full = static_cast<int>(terms.size()) >= options.max_terms;
    ProductExtraction::Term term{damping * cand.subtractable, cand.e, cand.f};
    bool merged = false;
    for (auto& existing : terms) {
      Complex ov_e(0.0, 0.0), ov_f(0.0, 0.0);
      for (int i = 0; i < 2; ++i) {
        ov_e += std::conj(existing.e[i]) * term.e[i];
        ov_f += std::conj(existing.f[i]) * term.f[i];
      }
      if (std::norm(ov_e) * std::norm(ov_f) > 1.0 - 1e-6) {
        existing.t += term.t;
        subtract(term);
        merged = true;
        break;
      }
    }
    if (!merged) {
      if (slots_full) break;
      terms.push_back(term);
      subtract(terms.back());
    }
  }

  for (int sweep = 0; sweep < options.exchange_sweeps; ++sweep) {
    double improvement = -total_weight();
    for (size_t j = 0; j < terms.size(); ++j) {
      ProductExtraction::Term old = terms[j];
      add_back(old);
      ProductCandidate hint;
      hint.e = old.e;
      hint.f = old.f;
      const ProductCandidate cand =
          best_product_subtraction(remainder, rng, options.starts / 2, {hint});
      if (cand.subtractable > old.t + 1e-15) {
        terms[j] = ProductExtraction::Term{cand.subtractable, cand.e, cand.f};
        subtract(terms[j]);
      } else {
        subtract(old);
        terms[j] = old;
      }
    }
    solve_weights();
    if (static_cast<int>(terms.size()) < options.max_terms) {
      const ProductCandidate cand = best_product_subtraction(remainder, rng, options.starts, {});
      if (cand.subtractable >= options.min_weight) {
        terms.push_back(ProductExtraction::Term{cand.subtractable, cand.e, cand.f});
        subtract(terms.back());
        solve_weights();
      }
    }
    for (size_t j = terms.size(); j-- > 0;) {
      if (terms[j].t < 1e-10) {
        add_back(terms[j]);
        terms.erase(terms.begin() + j);
      }
    }
    improvement += total_weight();
    if (improvement < options.exchange_tol) break;
  }
  out.total = total_weight();
  return out;
}

/**
 * Smallest entangled weight for a fixed pure remainder direction psi: the
 * least lambda with rho - lambda |psi><psi| both PSD and PPT. The PPT edge
 * is a 1-D problem because the smallest eigenvalue of an affine family is
 * concave in lambda. Returns HUGE_VAL when psi cannot complete rho.
 */
double pure_remainder_edge(const Matrix& rho, const Matrix& rho_tb,
                           const std::vector<Complex>& psi) {
  const Matrix proj = projector_from_vector(psi);
  const Matrix proj_tb = partial_transpose_b(proj, 2, 2);
  constexpr double kTol = -1e-12;

  // PSD cap: largest lambda with rho - lambda P still PSD.
  const HermitianEigen eig = hermitian_eig(rho);
  const double support_cut = 1e-12 * std::max(eig.eigenvalues.back(), 1e-300);
  double quad = 0.0, leak = 0.0;
  for (int k = 0; k < 4; ++k) {
    Complex amp(0.0, 0.0);
    for (int i = 0; i < 4; ++i) amp += std::conj(eig.eigenvectors(i, k)) * psi[i];
    if (eig.eigenvalues[k] > support_cut)
      quad += std::norm(amp) / eig.eigenvalues[k];
    else
      leak += std::norm(amp);
  }
  if (leak > 1e-9 || quad <= 0.0) return HUGE_VAL;
  const double cap = 1.0 / quad;

  auto ppt_margin = [&](double lambda) {
    return min_eigenvalue(rho_tb - lambda * proj_tb);
  };
  if (ppt_margin(0.0) >= kTol) return 0.0;

  // Concave in lambda: locate the peak on [0, cap], then bisect the left edge.
  double lo = 0.0, hi = cap;
  for (int iter = 0; iter < 80; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (ppt_margin(m1) < ppt_margin(m2))
      lo = m1;
    else
      hi = m2;
  }
  const double peak = 0.5 * (lo + hi);
  if (ppt_margin(peak) < kTol) return HUGE_VAL;
  double left = 0.0, right = peak;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (left + right);
    if (ppt_margin(mid) >= kTol)
      right = mid;
    else
      left = mid;
  }
  return right;
}

/**
 * Exact product decomposition of a separable two-qubit state: combine the
 * sub-normalized eigenvectors so that every component has zero
 * preconcurrence (Takagi factorization of the spin-flip overlap matrix plus
 * a phase closure), which for pure two-qubit states means every component is
 * a product state. Returns nothing when the numerics cannot certify the
 * construction; callers then fall back to greedy subtraction.
 */
std::optional<std::vector<ProductExtraction::Term>> wootters_product_terms(
    const Matrix& sigma) {
  const int d = 4;
  const HermitianEigen eig = hermitian_eig(sigma);
  std::vector<std::vector<Complex>> v(d, std::vector<Complex>(d, Complex(0, 0)));
  for (int k = 0; k < d; ++k) {
    const double lambda = std::max(eig.eigenvalues[k], 0.0);
    const double w = std::sqrt(lambda);
    for (int i = 0; i < d; ++i) v[k][i] = w * eig.eigenvectors(i, k);
  }
  const Matrix flip = kron(ops::sigma_y(), ops::sigma_y());

  // tau_{jk} = <v_j | Y conj(v_k)>: complex symmetric.
  Matrix tau(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      Complex acc(0, 0);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          acc += std::conj(v[j][a]) * flip(a, b) * std::conj(v[k][b]);
      tau(j, k) = acc;
    }

  // Takagi via the real embedding [[Re, Im], [Im, -Re]].
  Matrix embed(2 * d, 2 * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      embed(i, j) = tau(i, j).real();
      embed(i, j + d) = tau(i, j).imag();
      embed(i + d, j) = tau(i, j).imag();
      embed(i + d, j + d) = -tau(i, j).real();
    }
  const HermitianEigen takagi = hermitian_eig(embed);

  // Top-half eigenpairs carry the non-negative Takagi values.
  std::vector<double> mu(d);
  std::vector<std::vector<Complex>> u(d, std::vector<Complex>(d));
  for (int k = 0; k < d; ++k) {
    const int idx = 2 * d - 1 - k;
    mu[k] = std::max(takagi.eigenvalues[idx], 0.0);
    for (int i = 0; i < d; ++i)
      u[k][i] = Complex(takagi.eigenvectors(i, idx).real(),
                        takagi.eigenvectors(i + d, idx).real());
  }

  // y_k = sum_j u[k][j] v_j; require <y_i|Y conj(y_k)> diagonal = mu and
  // sum |y><y| = sigma.
  std::vector<std::vector<Complex>> y(d, std::vector<Complex>(d, Complex(0, 0)));
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) y[k][i] += u[k][j] * v[j][i];
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      Complex acc(0, 0);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc += std::conj(y[j][a]) * flip(a, b) * std::conj(y[k][b]);
      const double expected = (j == k) ? mu[j] : 0.0;
      if (std::abs(acc - Complex(expected, 0.0)) > 1e-8) return std::nullopt;
    }

  // mu is sorted descending already (top-half taken in descending order).
  if (mu[0] - mu[1] - mu[2] - mu[3] > 1e-7) return std::nullopt;  // not separable

  // Phase closure: mu_0 e^{i phi_0} + ... + mu_3 e^{i phi_3} = 0, built from
  // two triangles sharing the side s.
  const double lo = std::max(std::abs(mu[0] - mu[1]), std::abs(mu[2] - mu[3]));
  const double hi = std::min(mu[0] + mu[1], mu[2] + mu[3]);
  if (hi < lo - 1e-10) return std::nullopt;
  const double s = 0.5 * (std::max(lo, 0.0) + std::max(hi, lo));
  std::array<double, 4> phi{0.0, 0.0, 0.0, 0.0};
  auto triangle_angle = [](double adjacent, double other, double base) {
    if (adjacent <= 1e-15 || base <= 1e-15) return 0.0;
    const double c =
        std::clamp((adjacent * adjacent + base * base - other * other) /
                       (2.0 * adjacent * base),
                   -1.0, 1.0);
    return std::acos(c);
  };
  if (s > 1e-15) {
    phi[0] = triangle_angle(mu[0], mu[1], s);
    phi[1] = -triangle_angle(mu[1], mu[0], s);
    phi[2] = M_PI + triangle_angle(mu[2], mu[3], s);
    phi[3] = M_PI - triangle_angle(mu[3], mu[2], s);
  } else {
    phi = {0.0, M_PI, 0.0, M_PI};
  }
  {
    Complex closure(0, 0);
    for (int k = 0; k < 4; ++k) closure += mu[k] * std::exp(Complex(0.0, phi[k]));
    if (std::abs(closure) > 1e-6 * std::max(mu[0], 1e-30)) return std::nullopt;
  }

  // Hadamard mixing with half phases: every component has zero
  // preconcurrence, hence is a pure product state.
  const double had[4][4] = {
      {1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
  std::vector<ProductExtraction::Term> terms;
  Matrix rebuilt(4, 4);
  for (int i = 0; i < 4; ++i) {
    std::vector<Complex> x(4, Complex(0, 0));
    for (int j = 0; j < 4; ++j) {
      const Complex coeff = 0.5 * had[i][j] * std::exp(Complex(0.0, 0.5 * phi[j]));
      for (int a = 0; a < 4; ++a) x[a] += coeff * y[j][a];
    }
    double weight = 0.0;
    for (const Complex& c : x) weight += std::norm(c);
    if (weight < 1e-14) continue;
    // Rank-1 projection of the 2x2 reshape onto an exact product vector.
    Matrix z(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) z(a, b) = x[a * 2 + b];
    const Matrix gram = z.adjoint() * z;  // conj(f) f^T up to norm
    const HermitianEigen geig = hermitian_eig(gram);
    if (geig.eigenvalues[0] > 1e-4 * std::max(geig.eigenvalues[1], 1e-30))
      return std::nullopt;  // component is not close to a product state
    std::vector<Complex> f{std::conj(geig.eigenvectors(0, 1)),
                           std::conj(geig.eigenvectors(1, 1))};
    std::vector<Complex> e(2, Complex(0, 0));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) e[a] += z(a, b) * std::conj(f[b]);
    double e_norm2 = std::norm(e[0]) + std::norm(e[1]);
    if (e_norm2 < 1e-30) return std::nullopt;
    const double inv = 1.0 / std::sqrt(e_norm2);
    for (auto& c : e) c *= inv;
    ProductExtraction::Term term{weight, e, f};
    rebuilt += weight * projector_from_vector(product_vector(e, f));
    terms.push_back(std::move(term));
  }
  if ((rebuilt - sigma).frobenius_norm() > 1e-6) return std::nullopt;
  return terms;
}

struct PureRemainder {
  double lambda = HUGE_VAL;
  std::vector<Complex> psi;
};

/// Compact Nelder-Mead on R^n; returns the best value found, x holds argmin.
double nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                   std::vector<double>& x, double init_step, int max_evals) {
  const int n = static_cast<int>(x.size());
  int evals = 0;
  std::vector<std::pair<double, std::vector<double>>> simplex;
  auto eval = [&](const std::vector<double>& p) {
    ++evals;
    return f(p);
  };
  simplex.push_back({eval(x), x});
  for (int i = 0; i < n; ++i) {
    std::vector<double> p = x;
    p[i] += init_step;
    simplex.push_back({eval(p), p});
  }
  auto order = [&]() {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  };
  order();
  while (evals < max_evals) {
    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) centroid[j] += simplex[i].second[j];
    }
    for (double& c : centroid) c /= n;
    auto blend = [&](double coeff) {
      std::vector<double> p(n);
      for (int j = 0; j < n; ++j)
        p[j] = centroid[j] + coeff * (simplex[n].second[j] - centroid[j]);
      return p;
    };
    const std::vector<double> reflected = blend(-1.0);
    const double fr = eval(reflected);
    if (fr < simplex[0].first) {
      const std::vector<double> expanded = blend(-2.0);
      const double fe = eval(expanded);
      simplex[n] = fe < fr ? std::make_pair(fe, expanded) : std::make_pair(fr, reflected);
    } else if (fr < simplex[n - 1].first) {
      simplex[n] = {fr, reflected};
    } else {
      const std::vector<double> contracted = blend(0.5);
      const double fc = eval(contracted);
      if (fc < simplex[n].first) {
        simplex[n] = {fc, contracted};
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j)
            simplex[i].second[j] = 0.5 * (simplex[i].second[j] + simplex[0].second[j]);
          simplex[i].first = eval(simplex[i].second);
        }
      }
    }
    order();
    if (std::abs(simplex[n].first - simplex[0].first) < 1e-13) break;
  }
  x = simplex[0].second;
  return simplex[0].first;
}

/// Minimizes the pure-remainder weight over the direction psi.
PureRemainder best_pure_remainder(const Matrix& rho, Rng& rng, int max_evals, bool thorough,
                                  const std::vector<std::vector<Complex>>& seeds) {
  const Matrix rho_tb = partial_transpose_b(rho, 2, 2);

  auto params_of = [](const std::vector<Complex>& psi) {
    std::vector<double> p(8);
    for (int i = 0; i < 4; ++i) {
      p[2 * i] = psi[i].real();
      p[2 * i + 1] = psi[i].imag();
    }
    return p;
  };
  auto psi_of = [](const std::vector<double>& p) {
    std::vector<Complex> psi(4);
    double norm2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      psi[i] = Complex(p[2 * i], p[2 * i + 1]);
      norm2 += std::norm(psi[i]);
    }
    if (norm2 < 1e-20) return std::vector<Complex>();
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& c : psi) c *= inv;
    return psi;
  };
  auto objective = [&](const std::vector<double>& p) {
    const std::vector<Complex> psi = psi_of(p);
    if (psi.empty()) return 1e6;
    const double edge = pure_remainder_edge(rho, rho_tb, psi);
    return std::isfinite(edge) ? edge : 1e6;
  };

  // Collect starting directions: provided seeds, spectral candidates of rho
  // and its partial transpose, the direction that best cures the negative
  // partial-transpose eigenvector, and random ones; refine the best few.
  std::vector<std::vector<Complex>> candidates = seeds;
  const HermitianEigen rho_eig = hermitian_eig(rho);
  const HermitianEigen tb_eig = hermitian_eig(rho_tb);
  for (int k = 0; k < 4; ++k) {
    std::vector<Complex> a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = rho_eig.eigenvectors(i, k);
      b[i] = tb_eig.eigenvectors(i, k);
    }
    candidates.push_back(std::move(a));
    candidates.push_back(std::move(b));
  }
  {
    // The subtraction must cure the NPT witness direction z: the pure state
    // whose partial transpose is most negative along z is the bottom
    // eigenvector of (z z^dag)^{T_B}.
    std::vector<Complex> z(4);
    for (int i = 0; i < 4; ++i) z[i] = tb_eig.eigenvectors(i, 0);
    const Matrix z_tb = partial_transpose_b(projector_from_vector(z), 2, 2);
    const HermitianEigen z_eig = hermitian_eig(z_tb);
    std::vector<Complex> cure(4);
    for (int i = 0; i < 4; ++i) cure[i] = z_eig.eigenvectors(i, 0);
    candidates.push_back(std::move(cure));
  }
  const int random_candidates = thorough ? 32 : 12;
  for (int s = 0; s < random_candidates; ++s) candidates.push_back(random_unit_vector(rng, 4));

  std::vector<std::pair<double, std::vector<Complex>>> scored;
  for (const auto& psi : candidates) {
    const double edge = pure_remainder_edge(rho, rho_tb, psi);
    if (std::isfinite(edge)) scored.push_back({edge, psi});
  }
  PureRemainder best;
  if (scored.empty()) return best;
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (scored[0].first < best.lambda) {
    best.lambda = scored[0].first;
    best.psi = scored[0].second;
  }

  const int refine = std::min<int>(thorough ? 8 : 3, static_cast<int>(scored.size()));
  for (int k = 0; k < refine; ++k) {
    std::vector<double> p = params_of(scored[k].second);
    const double value = nelder_mead(objective, p, 0.2, max_evals);
    if (value < best.lambda) {
      const std::vector<Complex> psi = psi_of(p);
      if (!psi.empty()) {
        best.lambda = value;
        best.psi = psi;
      }
    }
  }
  // Polish rounds: restart around the incumbent with shrinking simplices and
  // deterministic jitter to step over Nelder-Mead stagnation.
  const int polish_rounds = thorough ? 6 : 0;
  for (int round = 0; round < polish_rounds; ++round) {
    std::vector<double> p = params_of(best.psi);
    if (round % 2 == 1)
      for (double& c : p) c += 0.05 * rng.normal();
    const double step = round < 2 ? 0.05 : 0.01;
    const double value = nelder_mead(objective, p, step, max_evals / 2);
    if (value < best.lambda) {
      const std::vector<Complex> psi = psi_of(p);
      if (!psi.empty()) {
        best.lambda = value;
        best.psi = psi;
      }
    }
  }
  return best;
}

}  // namespace

BsaDecomposition bsa_decompose(const DensityMatrix& rho, const BsaOptions& options) {
  const auto& dims = rho.bipartite_dims();
  if (!dims || dims->first != 2 || dims->second != 2)
    throw DimensionMismatch("bsa_decompose: expected a two-qubit state with dims (2,2)");

  Rng rng(options.seed);

  // Direct route: peel product states off rho itself.
  ProductExtraction direct = extract_products(rho.matrix(), rng, options);

  // Pure-remainder route: for two qubits the optimal entangled part is a
  // pure state and separability is equivalent to PPT, so the minimal weight
  // for a fixed direction reduces to a one-dimensional edge problem. The
  // certified separable complement then goes through the same product
  // extraction.
  ProductExtraction best = std::move(direct);
  {
    std::vector<std::vector<Complex>> seeds;
    const HermitianEigen rem_eig = hermitian_eig(best.remainder);
    std::vector<Complex> top(4);
    for (int i = 0; i < 4; ++i) top[i] = rem_eig.eigenvectors(i, 3);
    seeds.push_back(std::move(top));
    const HermitianEigen rho_eig = hermitian_eig(rho.matrix());
    std::vector<Complex> rho_top(4);
    for (int i = 0; i < 4; ++i) rho_top[i] = rho_eig.eigenvectors(i, 3);
    seeds.push_back(std::move(rho_top));

    const PureRemainder pure = best_pure_remainder(rho.matrix(), rng, 80 * options.kicks,
                                                    options.thorough, seeds);
    if (std::isfinite(pure.lambda) && pure.lambda < 1.0 - 1e-9) {
      const Matrix shield = pure.lambda * projector_from_vector(pure.psi);
      const Matrix sigma = (1.0 / (1.0 - pure.lambda)) * (rho.matrix() - shield);
      ProductExtraction stage_b;
      const auto exact_terms = wootters_product_terms(sigma);
      if (exact_terms) {
        stage_b.terms = *exact_terms;
        stage_b.total = 0.0;
        for (const auto& term : stage_b.terms) stage_b.total += term.t;
      } else {
        stage_b = extract_products(sigma, rng, options);
      }
      for (auto& term : stage_b.terms) term.t *= 1.0 - pure.lambda;
      stage_b.total *= 1.0 - pure.lambda;
      stage_b.remainder = rho.matrix();
      for (const auto& term : stage_b.terms)
        stage_b.remainder -= term.t * projector_from_vector(product_vector(term.e, term.f));
      if (stage_b.total > best.total) best = std::move(stage_b);
    }
  }

  const double separable_weight = std::min(best.total, 1.0);
  const auto& terms = best.terms;
  const Matrix& remainder = best.remainder;

  BsaDecomposition out;
  out.lambda = std::clamp(1.0 - separable_weight, 0.0, 1.0);
  out.entangled_part = remainder;
  if (out.lambda > 1e-9)
    out.rho_entangled =
        DensityMatrix::from_numerical((1.0 / out.lambda) * remainder, std::make_pair(2, 2));
  if (separable_weight > 1e-12) {
    Matrix rho_s(4, 4);
    for (const auto& term : terms) {
      const double r_j = term.t / separable_weight;
      Matrix pa = projector_from_vector(term.e);
      Matrix pb = projector_from_vector(term.f);
      rho_s += r_j * kron(pa, pb);
      ProductTerm pt;
      pt.weight = r_j;
      pt.state_a = DensityMatrix::from_numerical(pa);
      pt.state_b = DensityMatrix::from_numerical(pb);
      out.product_terms.push_back(std::move(pt));
    }
    out.rho_separable = DensityMatrix::from_numerical(rho_s, std::make_pair(2, 2));
    out.ppt_min_eigenvalue = min_eigenvalue(partial_transpose_b(rho_s, 2, 2));
  }
  return out;
}

double concurrence(const DensityMatrix& rho) {
  const auto& dims = rho.bipartite_dims();
  if (!dims || dims->first != 2 || dims->second != 2)
    throw DimensionMismatch("concurrence: expected a two-qubit state with dims (2,2)");
  const Matrix yy = kron(ops::sigma_y(), ops::sigma_y());
  const Matrix spin_flipped = yy * rho.matrix().conjugate() * yy;
  const Matrix sqrt_rho = matrix_function(rho.matrix(), MatrixFunction::Sqrt);
  const Matrix m = sqrt_rho * spin_flipped * sqrt_rho;
  HermitianEigen eig = hermitian_eig(m);
  std::array<double, 4> mu{};
  for (int k = 0; k < 4; ++k) mu[k] = std::sqrt(std::max(eig.eigenvalues[3 - k], 0.0));
  return std::max(0.0, mu[0] - mu[1] - mu[2] - mu[3]);
}

NineTermProduct nine_term_split(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                                const DensityMatrix& gamma_a, const DensityMatrix& gamma_b,
                                const EnergyBasis& basis_a, const EnergyBasis& basis_b) {
  NineTermProduct out;
  out.triple_a = triple_decompose(rho_a, gamma_a, basis_a);
  out.triple_b = triple_decompose(rho_b, gamma_b, basis_b);
  const TripleDecomposition& ta = out.triple_a;
  const TripleDecomposition& tb = out.triple_b;

  const double wa_th = 1.0 - ta.a;  // thermal coefficients per factor
  const double wb_th = 1.0 - tb.a;
  const double wa_d = ta.a * (1.0 - ta.c);
  const double wb_d = tb.a * (1.0 - tb.c);
  const double wa_c = ta.a * ta.c;
  const double wb_c = tb.a * tb.c;

  out.thermal_weight = wa_th * wb_th;
  const Matrix& ga = gamma_a.matrix();
  const Matrix& gb = gamma_b.matrix();
  const Matrix& da = ta.tau_d.matrix();
  const Matrix& db = tb.tau_d.matrix();
  const Matrix& ca = ta.tau_c.matrix();
  const Matrix& cb = tb.tau_c.matrix();

  const int dim = ga.rows() * gb.rows();
  out.rho_d = Matrix(dim, dim);
  out.rho_d += (wa_th * wb_d) * kron(ga, db);
  out.rho_d += (wa_d * wb_th) * kron(da, gb);
  out.rho_d += (wa_d * wb_d) * kron(da, db);

  out.rho_c = Matrix(dim, dim);
  out.rho_c += (wa_th * wb_c) * kron(ga, cb);
  out.rho_c += (wa_c * wb_th) * kron(ca, gb);
  out.rho_c += (wa_d * wb_c) * kron(da, cb);
  out.rho_c += (wa_c * wb_d) * kron(ca, db);
  out.rho_c += (wa_c * wb_c) * kron(ca, cb);
  return out;
}

BsaResourceSplit bsa_resource_split(const BsaDecomposition& bsa, const DensityMatrix& gamma_a,
                                    const DensityMatrix& gamma_b, const EnergyBasis& basis_a,
                                    const EnergyBasis& basis_b) {
  BsaResourceSplit out;
  out.lambda = bsa.lambda;
  out.entangled_part = bsa.entangled_part;
  const double separable_weight = 1.0 - bsa.lambda;
  for (const auto& term : bsa.product_terms) {
    const NineTermProduct nine =
        nine_term_split(term.state_a, term.state_b, gamma_a, gamma_b, basis_a, basis_b);
    BsaTermSplit split;
    split.weight = separable_weight * term.weight;
    split.thermal_coeff = nine.thermal_weight;
    split.rho_d = nine.rho_d;
    split.rho_c = nine.rho_c;
    out.terms.push_back(std::move(split));
  }
  return out;
}

}  // namespace epmflux
