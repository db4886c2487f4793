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

#include "epmflux/ftheorems.hpp"

#include <cmath>

#include "epmflux/eigen.hpp"
#include "epmflux/errors.hpp"

namespace epmflux {

namespace {

constexpr double kTinyWeight = 1e-12;

double safe_log(double x) { return x > 0.0 ? std::log(x) : -HUGE_VAL; }

struct SideTables {
  std::vector<double> initial;  // Tr(X Pi^i_l) per label of the initial side
  std::vector<double> final;    // Tr(Map[X] Pi^f_k) per label of the final side
};

SideTables side_tables(const Matrix& x, const QuantumChannel& map, const LevelSet& initial,
                       const LevelSet& final_levels) {
  SideTables t;
  t.initial = born_weights(x, initial);
  t.final = born_weights(map.apply(x), final_levels);
  return t;
}

}  // namespace

FtContext make_ft_context(const DensityMatrix& rho_i, const QuantumChannel& phi,
                          const LevelSet& levels_i, const LevelSet& levels_f, double beta) {
  FtContext ctx;
  ctx.rho_i = rho_i;
  ctx.phi = phi;
  ctx.levels_i = levels_i;
  ctx.levels_f = levels_f;
  ctx.beta = beta;
  ctx.dim = levels_i.dim;
  auto [gamma_i, z_i] = thermal_state(levels_i.hamiltonian(), beta);
  auto [gamma_f, z_f] = thermal_state(levels_f.hamiltonian(), beta);
  ctx.gamma_i = std::move(gamma_i);
  ctx.gamma_f = std::move(gamma_f);
  ctx.z_i = z_i;
  ctx.z_f = z_f;
  ctx.delta_f = free_energy_difference(z_i, z_f, beta);
  return ctx;
}

std::string to_string(JarzynskiForm form) {
  switch (form) {
    case JarzynskiForm::CoherenceOperator:
      return "coherence_operator";
    case JarzynskiForm::Athermality:
      return "athermality";
    case JarzynskiForm::Triple:
      return "triple";
    case JarzynskiForm::CorrelationOperator:
      return "correlation_operator";
    case JarzynskiForm::Bsa:
      return "bsa";
  }
  return "unknown";
}

double jarzynski_lhs(const EpmDistribution& dist, double beta, double delta_f) {
  if (!(beta > 0.0)) throw Error("jarzynski_lhs: beta must be positive");
  double lhs = 0.0;
  for (int l = 0; l < dist.initial_levels().size(); ++l)
    for (int k = 0; k < dist.final_levels().size(); ++k)
      lhs += dist.joint(l, k) * std::exp(-beta * (dist.delta_e(l, k) - delta_f));
  return lhs;
}

double jarzynski_lhs_operator(const FtContext& ctx) {
  const Matrix gamma_i_inv = matrix_function(ctx.gamma_i.matrix(), MatrixFunction::Inv);
  const double first = trace_product(ctx.rho_i.matrix(), gamma_i_inv).real();
  const double second =
      trace_product(ctx.phi.apply(ctx.rho_i.matrix()), ctx.gamma_f.matrix()).real();
  return first * second;
}

JarzynskiReport jarzynski_coherence_operator(const FtContext& ctx, const EpmDistribution& dist) {
  // chi = rho_i - gamma_i is purely off-diagonal only when the populations
  // match the Gibbs weights; otherwise this form does not apply.
  const std::vector<double> p_rho = born_weights(ctx.rho_i.matrix(), ctx.levels_i);
  const std::vector<double> p_gamma = born_weights(ctx.gamma_i.matrix(), ctx.levels_i);
  for (size_t l = 0; l < p_rho.size(); ++l)
    if (std::abs(p_rho[l] - p_gamma[l]) > 1e-10)
      throw DecompositionInapplicable(
          "coherence_operator form: populations differ from Gibbs weights");

  const Matrix phi_gamma = ctx.phi.apply(ctx.gamma_i.matrix());
  const Matrix phi_rho = ctx.phi.apply(ctx.rho_i.matrix());
  const double uncertainty = trace_product(ctx.gamma_f.matrix(), phi_gamma).real();
  // Tr(gamma_f Phi[chi]) evaluated through linearity; chi is never formed as
  // a state.
  const double coherence =
      trace_product(ctx.gamma_f.matrix(), phi_rho).real() - uncertainty;

  JarzynskiReport report;
  report.form = JarzynskiForm::CoherenceOperator;
  report.lhs = jarzynski_lhs(dist, ctx.beta, ctx.delta_f);
  report.rhs = ctx.dim * (uncertainty + coherence);
  report.term_breakdown = {{"uncertainty", uncertainty},
                           {"coherence", coherence},
                           {"dimension", static_cast<double>(ctx.dim)}};
  return report;
}

JarzynskiReport jarzynski_athermality(const FtContext& ctx, const EpmDistribution& dist,
                                      const AthermalityDecomposition& decomp) {
  const double a = decomp.a;
  const Matrix gamma_i_inv = matrix_function(ctx.gamma_i.matrix(), MatrixFunction::Inv);
  const double tau_initial = trace_product(gamma_i_inv, decomp.tau.matrix()).real();
  const double thermal_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(ctx.gamma_i.matrix())).real();
  const double tau_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(decomp.tau.matrix())).real();

  const double j_initial = (1.0 - a) * ctx.dim + a * tau_initial;
  const double j_final = (1.0 - a) * thermal_final + a * tau_final;

  JarzynskiReport report;
  report.form = JarzynskiForm::Athermality;
  report.lhs = jarzynski_lhs(dist, ctx.beta, ctx.delta_f);
  report.rhs = j_initial * j_final;
  report.term_breakdown = {{"a", a},
                           {"initial_factor", j_initial},
                           {"final_factor", j_final},
                           {"tau_initial", tau_initial},
                           {"thermal_final", thermal_final},
                           {"tau_final", tau_final}};
  return report;
}

JarzynskiReport jarzynski_triple(const FtContext& ctx, const EpmDistribution& dist,
                                 const TripleDecomposition& decomp) {
  const double a = decomp.a;
  const double c = decomp.c;
  const Matrix gamma_i_inv = matrix_function(ctx.gamma_i.matrix(), MatrixFunction::Inv);
  const double taud_initial = trace_product(gamma_i_inv, decomp.tau_d.matrix()).real();
  const double tauc_initial = trace_product(gamma_i_inv, decomp.tau_c.matrix()).real();
  const double thermal_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(ctx.gamma_i.matrix())).real();
  const double taud_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(decomp.tau_d.matrix())).real();
  const double tauc_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(decomp.tau_c.matrix())).real();

  const double j_initial =
      (1.0 - a) * ctx.dim + a * (1.0 - c) * taud_initial + a * c * tauc_initial;
  const double j_final =
      (1.0 - a) * thermal_final + a * (1.0 - c) * taud_final + a * c * tauc_final;

  JarzynskiReport report;
  report.form = JarzynskiForm::Triple;
  report.lhs = jarzynski_lhs(dist, ctx.beta, ctx.delta_f);
  report.rhs = j_initial * j_final;
  report.term_breakdown = {{"a", a},
                           {"c", c},
                           {"initial_factor", j_initial},
                           {"final_factor", j_final},
                           {"tau_d_initial", taud_initial},
                           {"tau_c_initial", tauc_initial},
                           {"thermal_final", thermal_final},
                           {"tau_d_final", taud_final},
                           {"tau_c_final", tauc_final}};
  return report;
}

JarzynskiReport jarzynski_correlation(const FtContext& ctx, const EpmDistribution& dist,
                                      const CorrelationSplit& split) {
  const Matrix gamma_i_inv = matrix_function(ctx.gamma_i.matrix(), MatrixFunction::Inv);
  const double corr_initial =
      trace_product(gamma_i_inv, split.correlation_operator).real();
  const double thermal_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(ctx.gamma_i.matrix())).real();
  const double corr_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(split.correlation_operator)).real();

  const double j_initial = ctx.dim + corr_initial;
  const double j_final = thermal_final + corr_final;

  JarzynskiReport report;
  report.form = JarzynskiForm::CorrelationOperator;
  report.lhs = jarzynski_lhs(dist, ctx.beta, ctx.delta_f);
  report.rhs = j_initial * j_final;
  report.term_breakdown = {{"initial_factor", j_initial},
                           {"final_factor", j_final},
                           {"correlation_initial", corr_initial},
                           {"thermal_final", thermal_final},
                           {"correlation_final", corr_final}};
  return report;
}

JarzynskiReport jarzynski_bsa(const FtContext& ctx, const EpmDistribution& dist,
                              const BsaResourceSplit& split) {
  const Matrix gamma_i_inv = matrix_function(ctx.gamma_i.matrix(), MatrixFunction::Inv);
  const double thermal_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(ctx.gamma_i.matrix())).real();

  // The entangled weight enters through the raw remainder lambda*rho_E, so
  // the assembly stays exact even when lambda is vanishingly small.
  double j_initial = trace_product(gamma_i_inv, split.entangled_part).real();
  double j_final =
      trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(split.entangled_part)).real();
  const double entangled_initial = j_initial;
  const double entangled_final = j_final;

  double classical_initial = 0.0;
  double classical_final = 0.0;
  for (const auto& term : split.terms) {
    const double di = trace_product(gamma_i_inv, term.rho_d).real();
    const double ci = trace_product(gamma_i_inv, term.rho_c).real();
    const double df =
        trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(term.rho_d)).real();
    const double cf =
        trace_product(ctx.gamma_f.matrix(), ctx.phi.apply(term.rho_c)).real();
    classical_initial += term.weight * (term.thermal_coeff * ctx.dim + di + ci);
    classical_final += term.weight * (term.thermal_coeff * thermal_final + df + cf);
  }
  j_initial += classical_initial;
  j_final += classical_final;

  JarzynskiReport report;
  report.form = JarzynskiForm::Bsa;
  report.lhs = jarzynski_lhs(dist, ctx.beta, ctx.delta_f);
  report.rhs = j_initial * j_final;
  report.term_breakdown = {{"lambda", split.lambda},
                           {"initial_factor", j_initial},
                           {"final_factor", j_final},
                           {"entangled_initial", entangled_initial},
                           {"entangled_final", entangled_final},
                           {"classical_initial", classical_initial},
                           {"classical_final", classical_final}};
  return report;
}

// ---------------------------------------------------------------------------
// Entropy tables

namespace {

struct RowScaffold {
  std::vector<EntropyRow> rows;
  SideTables fwd_rho;     // rho_i through Phi over (levels_i, levels_f)
  SideTables fwd_gamma;   // gamma_i through Phi
  SideTables bwd_rho;     // rho~_i through Phi~ over (levels_f, levels_i)
  SideTables bwd_gamma;   // gamma_f through Phi~
};

RowScaffold build_scaffold(const FtContext& fwd, const BackwardContext& bwd) {
  RowScaffold s;
  s.fwd_rho = side_tables(fwd.rho_i.matrix(), fwd.phi, fwd.levels_i, fwd.levels_f);
  s.fwd_gamma = side_tables(fwd.gamma_i.matrix(), fwd.phi, fwd.levels_i, fwd.levels_f);
  s.bwd_rho = side_tables(bwd.rho_tilde_i.matrix(), bwd.phi_tilde, fwd.levels_f, fwd.levels_i);
  s.bwd_gamma = side_tables(fwd.gamma_f.matrix(), bwd.phi_tilde, fwd.levels_f, fwd.levels_i);

  const int n_i = fwd.levels_i.size();
  const int n_f = fwd.levels_f.size();
  for (int l = 0; l < n_i; ++l) {
    for (int k = 0; k < n_f; ++k) {
      EntropyRow row;
      row.label_initial = fwd.levels_i.sublabels[l];
      row.label_final = fwd.levels_f.sublabels[k];
      row.p_forward = s.fwd_rho.initial[l] * s.fwd_rho.final[k];
      row.p_backward = s.bwd_rho.initial[k] * s.bwd_rho.final[l];
      row.tpm_part = fwd.beta * (fwd.levels_f.energies[k] - fwd.levels_i.energies[l] -
                                 fwd.delta_f);
      // Gibbs-ratio route to the TPM part; must agree with beta(dE - dF).
      const double gibbs_route =
          safe_log(s.fwd_gamma.initial[l]) - safe_log(s.bwd_gamma.initial[k]);
      if (std::abs(gibbs_route - row.tpm_part) > 1e-10)
        throw Error("entropy_table: Gibbs-ratio TPM identity violated (degenerate blocks?)");
      row.d_sigma = safe_log(s.fwd_gamma.final[k]) - safe_log(s.bwd_gamma.final[l]);

      if (row.p_forward <= 0.0) {
        row.flag = SupportFlag::ForwardZero;
        row.ds_tot = 0.0;
      } else if (row.p_backward <= 0.0) {
        row.flag = SupportFlag::BackwardZero;
        row.ds_tot = HUGE_VAL;
      } else {
        row.ds_tot = std::log(row.p_forward / row.p_backward);
      }
      s.rows.push_back(row);
    }
  }
  return s;
}

void finalize(TrajectoryEntropyTable& table) {
  table.full_backward_support = true;
  table.max_abs_residual = 0.0;
  for (const auto& row : table.rows) {
    if (row.flag == SupportFlag::BackwardZero) table.full_backward_support = false;
    if (row.flag == SupportFlag::Ok)
      table.max_abs_residual = std::max(table.max_abs_residual, std::abs(row.residual));
  }
}

}  // namespace

TrajectoryEntropyTable entropy_table(const FtContext& fwd, const BackwardContext& bwd,
                                     const TripleInputs& inputs) {
  RowScaffold s = build_scaffold(fwd, bwd);

  const double a = inputs.forward.a, c = inputs.forward.c;
  const double at = inputs.backward.a, ct = inputs.backward.c;
  const SideTables taud =
      side_tables(inputs.forward.tau_d.matrix(), fwd.phi, fwd.levels_i, fwd.levels_f);
  const SideTables tauc =
      side_tables(inputs.forward.tau_c.matrix(), fwd.phi, fwd.levels_i, fwd.levels_f);
  const SideTables taud_t = side_tables(inputs.backward.tau_d.matrix(), bwd.phi_tilde,
                                        fwd.levels_f, fwd.levels_i);
  const SideTables tauc_t = side_tables(inputs.backward.tau_c.matrix(), bwd.phi_tilde,
                                        fwd.levels_f, fwd.levels_i);

  auto theta_term = [](double a_, double c_, double p_taud, double p_gamma) {
    return std::log((1.0 - a_) + a_ * (1.0 - c_) * p_taud / p_gamma);
  };
  auto sigma_term = [](double a_, double c_, double p_tauc, double p_taud, double p_gamma) {
    return std::log1p(a_ * c_ * p_tauc /
                      ((1.0 - a_) * p_gamma + a_ * (1.0 - c_) * p_taud));
  };

  TrajectoryEntropyTable table;
  table.mode = EntropyMode::SingleTriple;
  table.rows = std::move(s.rows);
  int idx = 0;
  for (int l = 0; l < fwd.levels_i.size(); ++l) {
    for (int k = 0; k < fwd.levels_f.size(); ++k, ++idx) {
      EntropyRow& row = table.rows[idx];
      const double theta_i = theta_term(a, c, taud.initial[l], s.fwd_gamma.initial[l]);
      const double theta_f = theta_term(a, c, taud.final[k], s.fwd_gamma.final[k]);
      const double theta_ti = theta_term(at, ct, taud_t.initial[k], s.bwd_gamma.initial[k]);
      const double theta_tf = theta_term(at, ct, taud_t.final[l], s.bwd_gamma.final[l]);
      const double sigma_i =
          sigma_term(a, c, tauc.initial[l], taud.initial[l], s.fwd_gamma.initial[l]);
      const double sigma_f =
          sigma_term(a, c, tauc.final[k], taud.final[k], s.fwd_gamma.final[k]);
      const double sigma_ti =
          sigma_term(at, ct, tauc_t.initial[k], taud_t.initial[k], s.bwd_gamma.initial[k]);
      const double sigma_tf =
          sigma_term(at, ct, tauc_t.final[l], taud_t.final[l], s.bwd_gamma.final[l]);
      row.d_theta = theta_i + theta_f - theta_ti - theta_tf;
      row.d_sigma_coh = sigma_i + sigma_f - sigma_ti - sigma_tf;
      if (row.flag == SupportFlag::Ok)
        row.residual =
            row.ds_tot - (row.tpm_part + row.d_sigma + row.d_theta + row.d_sigma_coh);
    }
  }
  finalize(table);
  return table;
}

TrajectoryEntropyTable entropy_table(const FtContext& fwd, const BackwardContext& bwd,
                                     const CorrelationInputs& inputs) {
  RowScaffold s = build_scaffold(fwd, bwd);
  const SideTables corr = side_tables(inputs.forward, fwd.phi, fwd.levels_i, fwd.levels_f);
  const SideTables corr_t =
      side_tables(inputs.backward, bwd.phi_tilde, fwd.levels_f, fwd.levels_i);

  TrajectoryEntropyTable table;
  table.mode = EntropyMode::BipartiteCorrelation;
  table.rows = std::move(s.rows);
  int idx = 0;
  for (int l = 0; l < fwd.levels_i.size(); ++l) {
    for (int k = 0; k < fwd.levels_f.size(); ++k, ++idx) {
      EntropyRow& row = table.rows[idx];
      const double psi_i = std::log1p(corr.initial[l] / s.fwd_gamma.initial[l]);
      const double psi_f = std::log1p(corr.final[k] / s.fwd_gamma.final[k]);
      const double psi_ti = std::log1p(corr_t.initial[k] / s.bwd_gamma.initial[k]);
      const double psi_tf = std::log1p(corr_t.final[l] / s.bwd_gamma.final[l]);
      row.d_psi = psi_i + psi_f - psi_ti - psi_tf;
      if (row.flag == SupportFlag::Ok)
        row.residual = row.ds_tot - (row.tpm_part + row.d_sigma + row.d_psi);
    }
  }
  finalize(table);
  return table;
}

TrajectoryEntropyTable entropy_table(const FtContext& fwd, const BackwardContext& bwd,
                                     const BsaInputs& inputs) {
  RowScaffold s = build_scaffold(fwd, bwd);

  struct BsaSideData {
    SideTables entangled;
    std::vector<SideTables> term_d;
    std::vector<SideTables> term_c;
  };
  auto collect = [](const BsaResourceSplit& split, const QuantumChannel& map,
                    const LevelSet& initial, const LevelSet& final_levels) {
    BsaSideData data;
    data.entangled = side_tables(split.entangled_part, map, initial, final_levels);
    for (const auto& term : split.terms) {
      data.term_d.push_back(side_tables(term.rho_d, map, initial, final_levels));
      data.term_c.push_back(side_tables(term.rho_c, map, initial, final_levels));
    }
    return data;
  };
  const BsaSideData fdata = collect(inputs.forward, fwd.phi, fwd.levels_i, fwd.levels_f);
  const BsaSideData bdata = collect(inputs.backward, bwd.phi_tilde, fwd.levels_f, fwd.levels_i);

  // Lambda/Xi pieces per label. The product-term sum is accumulated with the
  // absolute weights t_j; e^{Lambda} = A/(1-lambda) and the entangled ratio
  // enters through the raw remainder, so nothing divides by lambda.
  auto lambda_xi = [](const BsaResourceSplit& split, const BsaSideData& data, bool initial_side,
                      int label, double p_gamma, double p_rho) -> std::pair<double, double> {
    const double sep_weight = 1.0 - split.lambda;
    if (sep_weight < kTinyWeight) {
      // Fully entangled state: the whole correction is the direct ratio.
      return {0.0, std::log(p_rho / p_gamma)};
    }
    double acc = 0.0;
    for (size_t j = 0; j < split.terms.size(); ++j) {
      const double pd =
          initial_side ? data.term_d[j].initial[label] : data.term_d[j].final[label];
      const double pc =
          initial_side ? data.term_c[j].initial[label] : data.term_c[j].final[label];
      acc += split.terms[j].weight * (split.terms[j].thermal_coeff + (pd + pc) / p_gamma);
    }
    const double exp_lambda = acc / sep_weight;
    const double p_ent =
        initial_side ? data.entangled.initial[label] : data.entangled.final[label];
    const double lambda_term = std::log(exp_lambda);
    const double xi_term = std::log(sep_weight + p_ent / (p_gamma * exp_lambda));
    return {lambda_term, xi_term};
  };

  TrajectoryEntropyTable table;
  table.mode = EntropyMode::BipartiteBsa;
  table.rows = std::move(s.rows);
  int idx = 0;
  for (int l = 0; l < fwd.levels_i.size(); ++l) {
    for (int k = 0; k < fwd.levels_f.size(); ++k, ++idx) {
      EntropyRow& row = table.rows[idx];
      const auto [lam_i, xi_i] =
          lambda_xi(inputs.forward, fdata, true, l, s.fwd_gamma.initial[l],
                    s.fwd_rho.initial[l]);
      const auto [lam_f, xi_f] =
          lambda_xi(inputs.forward, fdata, false, k, s.fwd_gamma.final[k], s.fwd_rho.final[k]);
      const auto [lam_ti, xi_ti] =
          lambda_xi(inputs.backward, bdata, true, k, s.bwd_gamma.initial[k],
                    s.bwd_rho.initial[k]);
      const auto [lam_tf, xi_tf] =
          lambda_xi(inputs.backward, bdata, false, l, s.bwd_gamma.final[l],
                    s.bwd_rho.final[l]);
      row.d_lambda = lam_i + lam_f - lam_ti - lam_tf;
      row.d_xi = xi_i + xi_f - xi_ti - xi_tf;
      // Direct total-correlation correction; equals d_lambda + d_xi row-wise.
      row.d_psi = std::log(s.fwd_rho.initial[l] / s.fwd_gamma.initial[l]) +
                  std::log(s.fwd_rho.final[k] / s.fwd_gamma.final[k]) -
                  std::log(s.bwd_rho.initial[k] / s.bwd_gamma.initial[k]) -
                  std::log(s.bwd_rho.final[l] / s.bwd_gamma.final[l]);
      if (row.flag == SupportFlag::Ok)
        row.residual = row.ds_tot - (row.tpm_part + row.d_sigma + row.d_lambda + row.d_xi);
    }
  }
  finalize(table);
  return table;
}

IntegralFtReport integral_ft_check(const TrajectoryEntropyTable& table,
                                   const EpmDistribution& forward, double beta,
                                   double delta_f) {
  IntegralFtReport report;
  for (const auto& row : table.rows) {
    if (row.flag == SupportFlag::BackwardZero) {
      report.valid = false;
      continue;
    }
    if (row.flag == SupportFlag::ForwardZero || row.p_forward <= 0.0) continue;
    const double p = row.p_forward;
    report.mean_exp_neg_ds += p * std::exp(-row.ds_tot);
    report.mean_ds += p * row.ds_tot;
    report.mean_sigma += p * row.d_sigma;
    report.mean_theta += p * row.d_theta;
    report.mean_sigma_coh += p * row.d_sigma_coh;
    report.mean_psi += p * row.d_psi;
    report.mean_lambda += p * row.d_lambda;
    report.mean_xi += p * row.d_xi;
    report.mean_exp_neg_sigma_coh += p * std::exp(-row.d_sigma_coh);
  }
  const double tpm_mean = beta * (forward.mean_delta_e() - delta_f);
  double corrections = report.mean_sigma;
  switch (table.mode) {
    case EntropyMode::SingleTriple:
      corrections += report.mean_theta + report.mean_sigma_coh;
      break;
    case EntropyMode::BipartiteCorrelation:
      corrections += report.mean_psi;
      break;
    case EntropyMode::BipartiteBsa:
      corrections += report.mean_lambda + report.mean_xi;
      break;
  }
  report.second_law_budget = tpm_mean + corrections;
  return report;
}

}  // namespace epmflux
