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

#include <doctest.h>

#include "epmflux/errors.hpp"
#include "epmflux/ftheorems.hpp"
#include "epmflux/scenario.hpp"
#include "testutil.hpp"

using namespace epmflux;

namespace {

Json qubit_config(double a, double gamma, double beta, double kappa) {
  Json j;
  j["name"] = "ft_qubit";
  j["system"] = "single";
  j["beta"] = beta;
  j["initial_state"] = {{"family", "ini_coh"}, {"params", {{"a", a}, {"gamma", gamma}}}};
  j["schedule"] = {{"name", "rotating_xz"},
                   {"params", {{"Omega", 1.0}, {"omega", 1.0}}},
                   {"t_i", 0.0},
                   {"t_f", 2.0}};
  if (kappa > 0.0) j["jumps"] = Json::array({{{"operator", "sigma_x"}, {"kappa", kappa}}});
  j["steps_per_unit_time"] = 400;
  j["seed"] = 9;
  return j;
}

Json bipartite_config(const Json& initial, double beta) {
  Json j;
  j["name"] = "ft_bipartite";
  j["system"] = "bipartite";
  j["beta"] = beta;
  j["initial_state"] = initial;
  j["schedule"] = {{"name", "bipartite_switched"},
                   {"params", {{"strength", 0.8}}},
                   {"h_a", {{"gap", 1.0}}},
                   {"h_b", {{"gap", 1.3}}},
                   {"h_a_final", {{"gap", 1.4}}},
                   {"interaction", "xx"},
                   {"t_i", 0.0},
                   {"t_f", 1.5}};
  j["steps_per_unit_time"] = 300;
  j["seed"] = 11;
  return j;
}

double relative_error(const JarzynskiReport& report) {
  return std::abs(report.lhs - report.rhs) / std::max(1.0, std::abs(report.lhs));
}

}  // namespace

TEST_CASE("Jarzynski LHS limits and closed forms") {
  // Tiny beta: the exponential average approaches one.
  const Matrix h = Matrix::from_rows({{0.0, 0.0}, {0.0, 1.0}});
  const EnergyBasis basis = EnergyBasis::from_hamiltonian(h);
  const LevelSet levels = level_set_single(basis);
  const DensityMatrix rho = testing::ini_coh_state(0.7, 0.25);
  const QuantumChannel identity = QuantumChannel::identity(2);
  const EpmDistribution dist = EpmDistribution::build(rho, identity, levels, levels);
  const FtContext tiny = make_ft_context(rho, identity, levels, levels, 1e-8);
  CHECK(std::abs(jarzynski_lhs(dist, tiny.beta, tiny.delta_f) - 1.0) < 1e-6);

  // Thermal state through the identity channel: d Z(2 beta) / Z(beta)^2.
  const double beta = 1.3;
  const auto [gamma, z_beta] = thermal_state(h, beta);
  const auto [gamma2, z_2beta] = thermal_state(h, 2.0 * beta);
  (void)gamma2;
  const EpmDistribution gibbs_dist = EpmDistribution::build(gamma, identity, levels, levels);
  const FtContext ctx = make_ft_context(gamma, identity, levels, levels, beta);
  const double lhs = jarzynski_lhs(gibbs_dist, beta, ctx.delta_f);
  CHECK(lhs == doctest::Approx(2.0 * z_2beta / (z_beta * z_beta)).epsilon(1e-12));
  CHECK(std::abs(lhs - jarzynski_lhs_operator(ctx)) < 1e-9 * std::max(1.0, lhs));
}

TEST_CASE("Jarzynski forms on a driven qubit") {
  const PreparedScenario s =
      prepare_scenario(parse_scenario_config(qubit_config(0.8, 0.2, 1.0, 0.1)));
  const EpmDistribution dist =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);

  const double lhs = jarzynski_lhs(dist, s.config.beta, s.ctx.delta_f);
  CHECK(std::abs(lhs - jarzynski_lhs_operator(s.ctx)) < 1e-9 * std::max(1.0, lhs));

  const JarzynskiReport atherm =
      jarzynski_athermality(s.ctx, dist, weight_of_athermality(s.rho_i, s.ctx.gamma_i));
  CHECK(relative_error(atherm) < 1e-9);

  const JarzynskiReport triple =
      jarzynski_triple(s.ctx, dist, triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i));
  CHECK(relative_error(triple) < 1e-9);

  // Coherent general state: populations differ from Gibbs weights.
  CHECK_THROWS_AS(jarzynski_coherence_operator(s.ctx, dist), DecompositionInapplicable);
}

TEST_CASE("athermality form reduces to the thermal expression at a = 0") {
  Json config = qubit_config(0.5, 0.0, 1.0, 0.1);
  config["initial_state"] = {{"family", "thermal"}};
  const PreparedScenario s = prepare_scenario(parse_scenario_config(config));
  const EpmDistribution dist =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);
  const AthermalityDecomposition decomp = weight_of_athermality(s.rho_i, s.ctx.gamma_i);
  CHECK(decomp.a < 1e-9);
  const JarzynskiReport report = jarzynski_athermality(s.ctx, dist, decomp);
  const double thermal_final =
      trace_product(s.ctx.gamma_f.matrix(), s.phi.apply(s.ctx.gamma_i.matrix())).real();
  CHECK(report.rhs == doctest::Approx(2.0 * thermal_final).epsilon(1e-9));
  CHECK(relative_error(report) < 1e-9);
}

TEST_CASE("triple form with an incoherent state matches the athermality form") {
  Json config = qubit_config(0.5, 0.0, 1.0, 0.05);
  config["initial_state"] = {
      {"literal",
       {{"dim", 2}, {"real", {0.85, 0.0, 0.0, 0.15}}, {"imag", {0.0, 0.0, 0.0, 0.0}}}}};
  const PreparedScenario s = prepare_scenario(parse_scenario_config(config));
  const EpmDistribution dist =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);
  const JarzynskiReport atherm =
      jarzynski_athermality(s.ctx, dist, weight_of_athermality(s.rho_i, s.ctx.gamma_i));
  const TripleDecomposition triple = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
  CHECK(triple.c < 1e-9);
  const JarzynskiReport triple_report = jarzynski_triple(s.ctx, dist, triple);
  CHECK(std::abs(triple_report.rhs - atherm.rhs) < 1e-12 * std::max(1.0, atherm.rhs));
}

TEST_CASE("coherence-operator form applies to Gibbs-coherent states") {
  Json config = qubit_config(0.5, 0.0, 1.0, 0.1);
  config["initial_state"] = {{"family", "gibbs_coherent"}, {"params", {{"strength", 0.1}}}};
  const PreparedScenario s = prepare_scenario(parse_scenario_config(config));
  const EpmDistribution dist =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);
  const JarzynskiReport report = jarzynski_coherence_operator(s.ctx, dist);
  CHECK(relative_error(report) < 1e-9);
}

TEST_CASE("all bipartite forms agree with the LHS") {
  // Thermal marginals with exchange correlations: every decomposition route
  // applies, including the correlation operator.
  const Json initial = {{"family", "correlated_thermal"},
                        {"params", {{"xx", 0.08}, {"yy", 0.05}, {"zz", 0.06}}}};
  const PreparedScenario s =
      prepare_scenario(parse_scenario_config(bipartite_config(initial, 1.0)));
  const EpmDistribution dist =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);

  const JarzynskiReport atherm =
      jarzynski_athermality(s.ctx, dist, weight_of_athermality(s.rho_i, s.ctx.gamma_i));
  CHECK(relative_error(atherm) < 1e-9);

  const JarzynskiReport triple =
      jarzynski_triple(s.ctx, dist, triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i));
  CHECK(relative_error(triple) < 1e-9);

  const JarzynskiReport corr = jarzynski_correlation(
      s.ctx, dist, correlation_split(s.rho_i, s.config.beta, s.h_i_a, s.h_i_b));
  CHECK(relative_error(corr) < 1e-9);

  BsaOptions options;
  options.seed = 3;
  options.thorough = false;
  const BsaResourceSplit split =
      bsa_resource_split(bsa_decompose(s.rho_i, options), s.gamma_i_a, s.gamma_i_b,
                         s.basis_i_a, s.basis_i_b);
  const JarzynskiReport bsa = jarzynski_bsa(s.ctx, dist, split);
  CHECK(relative_error(bsa) < 1e-9);
}

TEST_CASE("entropy table reduces to TPM plus classical uncertainty for thermal input") {
  Json config = qubit_config(0.5, 0.0, 1.0, 0.1);
  config["initial_state"] = {{"family", "thermal"}};
  const PreparedScenario s = prepare_scenario(parse_scenario_config(config));
  TripleInputs inputs;
  inputs.forward = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
  inputs.backward = triple_decompose(s.bwd.rho_tilde_i, s.ctx.gamma_f, s.basis_f);
  const TrajectoryEntropyTable table = entropy_table(s.ctx, s.bwd, inputs);
  for (const auto& row : table.rows) {
    CHECK(std::abs(row.d_theta) < 1e-10);
    CHECK(std::abs(row.d_sigma_coh) < 1e-10);
    if (row.flag == SupportFlag::Ok)
      CHECK(std::abs(row.ds_tot - row.tpm_part - row.d_sigma) < 1e-9);
  }
}

TEST_CASE("single-mode residuals vanish for coherent qubits") {
  const PreparedScenario s =
      prepare_scenario(parse_scenario_config(qubit_config(0.75, 0.3, 1.0, 0.1)));
  TripleInputs inputs;
  inputs.forward = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
  inputs.backward = triple_decompose(s.bwd.rho_tilde_i, s.ctx.gamma_f, s.basis_f);
  const TrajectoryEntropyTable table = entropy_table(s.ctx, s.bwd, inputs);
  CHECK(table.full_backward_support);
  CHECK(table.max_abs_residual < 1e-9);

  const EpmDistribution forward =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);
  const IntegralFtReport report =
      integral_ft_check(table, forward, s.config.beta, s.ctx.delta_f);
  CHECK(report.valid);
  CHECK(std::abs(report.mean_exp_neg_ds - 1.0) < 1e-9);
  CHECK(report.mean_ds >= -1e-10);
  CHECK(report.second_law_budget >= -1e-9);
}

TEST_CASE("bipartite BSA-mode rows split the correlation correction") {
  const Json initial = {{"family", "werner"}, {"params", {{"p", 0.7}}}};
  const PreparedScenario s =
      prepare_scenario(parse_scenario_config(bipartite_config(initial, 1.0)));
  BsaOptions options;
  options.seed = 5;
  options.thorough = false;
  BsaInputs inputs;
  inputs.forward = bsa_resource_split(bsa_decompose(s.rho_i, options), s.gamma_i_a,
                                      s.gamma_i_b, s.basis_i_a, s.basis_i_b);
  BsaOptions backward_options = options;
  backward_options.seed = 6;
  inputs.backward =
      bsa_resource_split(bsa_decompose(s.bwd.rho_tilde_i, backward_options), s.gamma_f_a,
                         s.gamma_f_b, s.basis_f_a, s.basis_f_b);
  const TrajectoryEntropyTable table = entropy_table(s.ctx, s.bwd, inputs);
  CHECK(table.max_abs_residual < 1e-9);
  for (const auto& row : table.rows) {
    if (row.flag != SupportFlag::Ok) continue;
    CHECK(std::abs(row.d_psi - row.d_lambda - row.d_xi) < 1e-9);
  }

  const EpmDistribution forward =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);
  const IntegralFtReport report =
      integral_ft_check(table, forward, s.config.beta, s.ctx.delta_f);
  CHECK(report.valid);
  CHECK(std::abs(report.mean_exp_neg_ds - 1.0) < 1e-9);
  CHECK(report.mean_ds >= -1e-10);
}

TEST_CASE("bipartite correlation-mode rows balance") {
  const Json initial = {{"family", "correlated_thermal"},
                        {"params", {{"xx", 0.1}, {"zz", 0.05}}}};
  const PreparedScenario s =
      prepare_scenario(parse_scenario_config(bipartite_config(initial, 0.8)));
  CorrelationInputs inputs;
  inputs.forward =
      correlation_split(s.rho_i, s.config.beta, s.h_i_a, s.h_i_b).correlation_operator;
  inputs.backward = correlation_split(s.bwd.rho_tilde_i, s.config.beta, s.h_f_a, s.h_f_b)
                        .correlation_operator;
  const TrajectoryEntropyTable table = entropy_table(s.ctx, s.bwd, inputs);
  CHECK(table.max_abs_residual < 1e-9);
}

TEST_CASE("support flags are reported, not dropped") {
  // A pure excited initial state makes some forward rows impossible.
  Json config = qubit_config(0.5, 0.0, 1.0, 0.0);
  config["schedule"] = {
      {"name", "static"}, {"params", {{"gap", 1.0}}}, {"t_i", 0.0}, {"t_f", 1.0}};
  config["initial_state"] = {
      {"literal",
       {{"dim", 2}, {"real", {1.0, 0.0, 0.0, 0.0}}, {"imag", {0.0, 0.0, 0.0, 0.0}}}}};
  const PreparedScenario s = prepare_scenario(parse_scenario_config(config));
  TripleInputs inputs;
  inputs.forward = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
  inputs.backward = triple_decompose(s.bwd.rho_tilde_i, s.ctx.gamma_f, s.basis_f);
  const TrajectoryEntropyTable table = entropy_table(s.ctx, s.bwd, inputs);
  int forward_zero = 0;
  for (const auto& row : table.rows)
    if (row.flag == SupportFlag::ForwardZero) ++forward_zero;
  CHECK(forward_zero > 0);
  CHECK(static_cast<int>(table.rows.size()) == 4);
}

TEST_CASE("reduction chain: vanishing weights kill the corrections") {
  Json config = qubit_config(0.5, 0.0, 2.0, 0.2);
  config["initial_state"] = {{"family", "thermal"}};
  const PreparedScenario s = prepare_scenario(parse_scenario_config(config));
  TripleInputs inputs;
  inputs.forward = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
  inputs.backward = triple_decompose(s.bwd.rho_tilde_i, s.ctx.gamma_f, s.basis_f);
  CHECK(inputs.forward.a < 1e-9);
  CHECK(inputs.backward.a < 1e-9);
  const TrajectoryEntropyTable table = entropy_table(s.ctx, s.bwd, inputs);
  for (const auto& row : table.rows) {
    CHECK(std::abs(row.d_theta) < 1e-10);
    CHECK(std::abs(row.d_sigma_coh) < 1e-10);
  }
}
