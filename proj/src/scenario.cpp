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

#include "epmflux/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

#include "epmflux/eigen.hpp"
#include "epmflux/errors.hpp"
#include "epmflux/rng.hpp"

namespace epmflux {

namespace {

namespace fs = std::filesystem;

double get_param(const Json& params, const std::string& key) {
  if (!params.is_object() || !params.contains(key))
    throw ConfigError("missing parameter: " + key);
  return params.at(key).get<double>();
}

double get_param_or(const Json& params, const std::string& key, double fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  return params.at(key).get<double>();
}

Matrix local_hamiltonian(const Json& j) {
  if (j.is_object() && j.contains("dim")) return matrix_from_json(j);
  if (j.is_object() && j.contains("gap"))
    return 0.5 * j.at("gap").get<double>() * ops::sigma_z();
  throw ConfigError("local Hamiltonian must be a literal or {\"gap\": w}");
}

Matrix named_interaction(const Json& j) {
  if (j.is_object()) return matrix_from_json(j);
  const std::string name = j.get<std::string>();
  if (name == "xx") return kron(ops::sigma_x(), ops::sigma_x());
  if (name == "zz") return kron(ops::sigma_z(), ops::sigma_z());
  if (name == "heisenberg")
    return kron(ops::sigma_x(), ops::sigma_x()) + kron(ops::sigma_y(), ops::sigma_y()) +
           kron(ops::sigma_z(), ops::sigma_z());
  throw ConfigError("unknown interaction: " + name);
}

Matrix named_single_operator(const std::string& name) {
  if (name == "sigma_x") return ops::sigma_x();
  if (name == "sigma_y") return ops::sigma_y();
  if (name == "sigma_z") return ops::sigma_z();
  if (name == "sigma_plus") return ops::sigma_plus();
  if (name == "sigma_minus") return ops::sigma_minus();
  throw ConfigError("unknown operator: " + name);
}

Matrix named_jump_operator(const std::string& name, bool bipartite) {
  if (!bipartite) return named_single_operator(name);
  if (name.size() > 2 && name.substr(name.size() - 2) == "_A")
    return kron(named_single_operator(name.substr(0, name.size() - 2)), Matrix::identity(2));
  if (name.size() > 2 && name.substr(name.size() - 2) == "_B")
    return kron(Matrix::identity(2), named_single_operator(name.substr(0, name.size() - 2)));
  throw ConfigError("bipartite jump operators need an _A or _B suffix: " + name);
}

Matrix bell_state(const std::string& which) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Complex> v(4, Complex(0.0, 0.0));
  if (which == "phi_plus") {
    v[0] = s;
    v[3] = s;
  } else if (which == "phi_minus") {
    v[0] = s;
    v[3] = -s;
  } else if (which == "psi_plus") {
    v[1] = s;
    v[2] = s;
  } else if (which == "psi_minus") {
    v[1] = s;
    v[2] = -s;
  } else {
    throw ConfigError("unknown Bell state: " + which);
  }
  Matrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

Matrix werner_state(double p) {
  if (p < 0.0 || p > 1.0) throw ConfigError("Werner parameter must lie in [0, 1]");
  return p * bell_state("psi_minus") + (1.0 - p) * 0.25 * Matrix::identity(4);
}

}  // namespace

ScenarioConfig parse_scenario_config(const Json& j) {
  ScenarioConfig config;
  config.raw = j;
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  config.schema_version = j.value("schema_version", 1);
  if (config.schema_version != 1) throw ConfigError("unsupported schema_version");
  config.name = j.value("name", std::string("scenario"));
  const std::string system = j.value("system", std::string("single"));
  if (system == "single")
    config.bipartite = false;
  else if (system == "bipartite")
    config.bipartite = true;
  else
    throw ConfigError("system must be 'single' or 'bipartite'");
  config.beta = j.value("beta", 1.0);
  if (!(config.beta > 0.0) || !std::isfinite(config.beta))
    throw ConfigError("beta must be positive and finite");
  if (!j.contains("initial_state")) throw ConfigError("missing initial_state");
  config.initial_state = j.at("initial_state");
  if (!j.contains("schedule")) throw ConfigError("missing schedule");
  config.schedule = j.at("schedule");
  if (j.contains("jumps")) {
    for (const auto& jump : j.at("jumps")) {
      const std::string op = jump.at("operator").get<std::string>();
      const double kappa = jump.at("kappa").get<double>();
      if (kappa < 0.0) throw ConfigError("kappa must be non-negative");
      config.jumps.push_back({op, kappa});
    }
  }
  config.steps_per_unit_time = j.value("steps_per_unit_time", 2000);
  if (config.steps_per_unit_time < 1) throw ConfigError("steps_per_unit_time must be >= 1");
  if (j.contains("backward_initial_state") && !j.at("backward_initial_state").is_null())
    config.backward_initial_state = j.at("backward_initial_state");
  if (j.contains("kraus_file")) config.kraus_file = j.at("kraus_file").get<std::string>();
  if (j.contains("tasks"))
    for (const auto& t : j.at("tasks")) config.tasks.push_back(t.get<std::string>());
  config.seed = j.value("seed", 1u);
  if (j.contains("tolerances")) {
    config.tol_identity = j.at("tolerances").value("identity", 1e-9);
    config.tol_row = j.at("tolerances").value("row", 1e-9);
  }
  config.expect_sigma_ift = j.value("expect_sigma_ift", false);
  return config;
}

EnergyBasis product_basis(const EnergyBasis& basis_a, const EnergyBasis& basis_b) {
  return EnergyBasis::from_product(basis_a, basis_b);
}

namespace {

HamiltonianSchedule schedule_from_config(const Json& j, bool bipartite) {
  const std::string name = j.value("name", std::string());
  const double t_i = j.value("t_i", 0.0);
  const double t_f = j.value("t_f", 1.0);
  if (!(t_f > t_i)) throw ConfigError("schedule needs t_f > t_i");
  if (name == "static") {
    if (bipartite) throw ConfigError("static schedule is single-system; use bipartite_switched");
    Matrix h = j.contains("h") ? matrix_from_json(j.at("h"))
                               : local_hamiltonian(j.value("params", Json::object()));
    if (h.hermiticity_defect() > 1e-10) throw ConfigError("static Hamiltonian not Hermitian");
    return make_static_schedule(h, t_i, t_f);
  }
  if (name == "rotating_xz") {
    const Json params = j.value("params", Json::object());
    return make_rotating_xz(get_param(params, "Omega"), get_param(params, "omega"), t_i, t_f);
  }
  if (name == "bipartite_switched") {
    if (!bipartite) throw ConfigError("bipartite_switched needs system=bipartite");
    const Json params = j.value("params", Json::object());
    const Matrix h_a = local_hamiltonian(j.at("h_a"));
    const Matrix h_b = local_hamiltonian(j.at("h_b"));
    const Matrix h_a_final = j.contains("h_a_final") ? local_hamiltonian(j.at("h_a_final")) : h_a;
    const Matrix h_b_final = j.contains("h_b_final") ? local_hamiltonian(j.at("h_b_final")) : h_b;
    const Matrix interaction =
        named_interaction(j.contains("interaction") ? j.at("interaction") : Json("xx"));
    const double strength = get_param_or(params, "strength", 1.0);
    return make_bipartite_switched(h_a, h_a_final, h_b, h_b_final, interaction, strength, t_i,
                                   t_f);
  }
  throw ConfigError("unknown schedule: " + name);
}

DensityMatrix state_from_config(const Json& j, const PreparedScenario& scenario,
                                std::uint64_t seed_mix) {
  const bool bipartite = scenario.config.bipartite;
  auto with_dims = [&](Matrix m) {
    if (bipartite)
      return DensityMatrix(std::move(m),
                           std::make_pair(scenario.basis_i_a.dim(), scenario.basis_i_b.dim()));
    return DensityMatrix(std::move(m));
  };
  if (j.is_object() && j.contains("literal")) return with_dims(matrix_from_json(j.at("literal")));
  if (j.is_object() && j.contains("literal_file"))
    return with_dims(matrix_from_json(Json::parse(read_text_file(j.at("literal_file")))));
  const std::string family = j.value("family", std::string());
  const Json params = j.value("params", Json::object());
  if (family == "ini_coh") {
    const double a = get_param(params, "a");
    const double gamma = get_param(params, "gamma");
    if (a < 0.0 || a > 1.0) throw ConfigError("ini_coh: a must lie in [0, 1]");
    if (gamma * gamma > a * (1.0 - a) + 1e-12)
      throw ConfigError("ini_coh: gamma^2 must not exceed a(1-a)");
    Matrix m = Matrix::from_rows({{a, gamma}, {gamma, 1.0 - a}});
    return DensityMatrix::from_numerical(m);
  }
  if (family == "thermal") {
    const double beta = get_param_or(params, "beta", scenario.config.beta);
    auto [state, z] = thermal_state(scenario.levels_i.hamiltonian(), beta);
    (void)z;
    return bipartite ? state.with_dims(scenario.basis_i_a.dim(), scenario.basis_i_b.dim())
                     : state;
  }
  if (family == "gibbs_coherent") {
    // Thermal populations plus an off-diagonal coherence operator; the form
    // needed by the chi-based Jarzynski relation.
    if (bipartite) throw ConfigError("gibbs_coherent is a single-system family");
    const double strength = get_param(params, "strength");
    auto [gamma, z] = thermal_state(scenario.levels_i.hamiltonian(), scenario.config.beta);
    (void)z;
    const Matrix& u = scenario.basis_i.basis_unitary();
    const int d = scenario.basis_i.dim();
    Matrix chi(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (a != b) chi(a, b) = strength;
    const Matrix m = gamma.matrix() + u * chi * u.adjoint();
    return DensityMatrix(m);  // validation rejects non-physical strengths
  }
  if (family == "werner") {
    if (!bipartite) throw ConfigError("werner is a bipartite family");
    return with_dims(werner_state(get_param(params, "p")));
  }
  if (family == "bell") {
    if (!bipartite) throw ConfigError("bell is a bipartite family");
    return with_dims(bell_state(params.value("which", std::string("psi_minus"))));
  }
  if (family == "correlated_thermal") {
    if (!bipartite) throw ConfigError("correlated_thermal is a bipartite family");
    const double xx = get_param_or(params, "xx", 0.0);
    const double yy = get_param_or(params, "yy", 0.0);
    const double zz = get_param_or(params, "zz", 0.0);
    auto [ga, za] = thermal_state(scenario.h_i_a, scenario.config.beta);
    auto [gb, zb] = thermal_state(scenario.h_i_b, scenario.config.beta);
    (void)za;
    (void)zb;
    Matrix m = kron(ga.matrix(), gb.matrix());
    m += 0.25 * xx * kron(ops::sigma_x(), ops::sigma_x());
    m += 0.25 * yy * kron(ops::sigma_y(), ops::sigma_y());
    m += 0.25 * zz * kron(ops::sigma_z(), ops::sigma_z());
    return with_dims(std::move(m));  // PSD validated on construction
  }
  if (family == "random") {
    const std::uint64_t seed =
        params.contains("seed") ? params.at("seed").get<std::uint64_t>() : seed_mix;
    Rng rng(seed);
    return with_dims(random_density(rng, scenario.levels_i.dim));
  }
  throw ConfigError("unknown state family: " + family);
}

}  // namespace

PreparedScenario prepare_scenario(const ScenarioConfig& config) {
  PreparedScenario scenario;
  scenario.config = config;
  scenario.schedule = schedule_from_config(config.schedule, config.bipartite);
  const double t_i = scenario.schedule.t_i();
  const double t_f = scenario.schedule.t_f();

  if (config.bipartite) {
    const auto& parts = scenario.schedule.bipartite_parts();
    if (!parts) throw ConfigError("bipartite scenario needs a bipartite schedule");
    scenario.h_i_a = parts->h_a(t_i);
    scenario.h_i_b = parts->h_b(t_i);
    scenario.h_f_a = parts->h_a(t_f);
    scenario.h_f_b = parts->h_b(t_f);
    scenario.basis_i_a = EnergyBasis::from_hamiltonian(scenario.h_i_a);
    scenario.basis_i_b = EnergyBasis::from_hamiltonian(scenario.h_i_b);
    scenario.basis_f_a = EnergyBasis::from_hamiltonian(scenario.h_f_a);
    scenario.basis_f_b = EnergyBasis::from_hamiltonian(scenario.h_f_b);
    scenario.basis_i = product_basis(scenario.basis_i_a, scenario.basis_i_b);
    scenario.basis_f = product_basis(scenario.basis_f_a, scenario.basis_f_b);
    scenario.levels_i = level_set_bipartite(scenario.basis_i_a, scenario.basis_i_b);
    scenario.levels_f = level_set_bipartite(scenario.basis_f_a, scenario.basis_f_b);
    auto [gia, zia] = thermal_state(scenario.h_i_a, config.beta);
    auto [gib, zib] = thermal_state(scenario.h_i_b, config.beta);
    auto [gfa, zfa] = thermal_state(scenario.h_f_a, config.beta);
    auto [gfb, zfb] = thermal_state(scenario.h_f_b, config.beta);
    (void)zia;
    (void)zib;
    (void)zfa;
    (void)zfb;
    scenario.gamma_i_a = gia;
    scenario.gamma_i_b = gib;
    scenario.gamma_f_a = gfa;
    scenario.gamma_f_b = gfb;
  } else {
    scenario.basis_i = EnergyBasis::from_hamiltonian(scenario.schedule.at(t_i));
    scenario.basis_f = EnergyBasis::from_hamiltonian(scenario.schedule.at(t_f));
    scenario.levels_i = level_set_single(scenario.basis_i);
    scenario.levels_f = level_set_single(scenario.basis_f);
  }

  if (config.kraus_file) {
    scenario.phi = QuantumChannel::from_kraus(read_kraus_file(*config.kraus_file));
    if (scenario.phi.dim() != scenario.levels_i.dim)
      throw ConfigError("kraus_file dimension does not match the scenario");
  } else {
    LindbladSpec spec{scenario.schedule, {}};
    for (const auto& [name, kappa] : config.jumps)
      spec.jumps.push_back({named_jump_operator(name, config.bipartite), kappa});
    const int steps =
        std::max<int>(1, std::llround(config.steps_per_unit_time * (t_f - t_i)));
    scenario.phi = channel_from_propagator(spec, steps);
  }

  scenario.rho_i = state_from_config(config.initial_state, scenario, config.seed);
  scenario.ctx = make_ft_context(scenario.rho_i, scenario.phi, scenario.levels_i,
                                 scenario.levels_f, config.beta);

  const QuantumChannel phi_kraus = kraus_from_choi(scenario.phi);
  const DensityMatrix pi = backward_reference_state(scenario.phi);
  scenario.bwd.phi_tilde = dual_channel(phi_kraus, pi);
  if (config.backward_initial_state) {
    scenario.bwd.rho_tilde_i =
        state_from_config(*config.backward_initial_state, scenario, config.seed + 1);
  } else {
    scenario.bwd.rho_tilde_i =
        config.bipartite ? scenario.ctx.gamma_f.with_dims(scenario.basis_f_a.dim(),
                                                          scenario.basis_f_b.dim())
                         : scenario.ctx.gamma_f;
  }
  return scenario;
}

// ---------------------------------------------------------------------------
// Task execution

namespace {

void push_assert(ScenarioResult& result, const std::string& name, double measured,
                 double tolerance, bool pass) {
  result.assertions.push_back({name, measured, tolerance, pass});
  if (!pass) result.all_pass = false;
}

/// |lhs - rhs| <= tol * max(1, |lhs|)
void assert_identity(ScenarioResult& result, const std::string& name, double lhs, double rhs,
                     double tol) {
  const double err = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
  push_assert(result, name, err, tol, err <= tol);
}

struct EntropyBundle {
  std::optional<TrajectoryEntropyTable> single_triple;
  std::optional<TrajectoryEntropyTable> bipartite_bsa;
  std::optional<TrajectoryEntropyTable> bipartite_correlation;
  std::string correlation_note;
};

EntropyBundle build_entropy_tables(const PreparedScenario& s) {
  EntropyBundle bundle;
  const auto& config = s.config;
  if (!config.bipartite) {
    TripleInputs inputs;
    inputs.forward = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
    inputs.backward = triple_decompose(s.bwd.rho_tilde_i, s.ctx.gamma_f, s.basis_f);
    bundle.single_triple = entropy_table(s.ctx, s.bwd, inputs);
    return bundle;
  }
  BsaOptions options;
  options.seed = config.seed;
  BsaInputs bsa_inputs;
  bsa_inputs.forward =
      bsa_resource_split(bsa_decompose(s.rho_i, options), s.gamma_i_a, s.gamma_i_b,
                         s.basis_i_a, s.basis_i_b);
  BsaOptions backward_options = options;
  backward_options.seed = config.seed + 1;
  bsa_inputs.backward =
      bsa_resource_split(bsa_decompose(s.bwd.rho_tilde_i, backward_options), s.gamma_f_a,
                         s.gamma_f_b, s.basis_f_a, s.basis_f_b);
  bundle.bipartite_bsa = entropy_table(s.ctx, s.bwd, bsa_inputs);

  try {
    CorrelationInputs corr;
    corr.forward =
        correlation_split(s.rho_i, config.beta, s.h_i_a, s.h_i_b).correlation_operator;
    corr.backward = correlation_split(s.bwd.rho_tilde_i, config.beta, s.h_f_a, s.h_f_b)
                        .correlation_operator;
    bundle.bipartite_correlation = entropy_table(s.ctx, s.bwd, corr);
  } catch (const MarginalsNotThermal& e) {
    bundle.correlation_note = e.what();
  }
  return bundle;
}

std::string mode_name(EntropyMode mode) {
  switch (mode) {
    case EntropyMode::SingleTriple:
      return "single_triple";
    case EntropyMode::BipartiteCorrelation:
      return "bipartite_correlation";
    case EntropyMode::BipartiteBsa:
      return "bipartite_bsa";
  }
  return "unknown";
}

void run_crooks_task(const PreparedScenario& s, const EntropyBundle& bundle,
                     const std::string& out_dir, ScenarioResult& result) {
  auto handle = [&](const TrajectoryEntropyTable& table) {
    write_text_file(out_dir + "/trajectory_" + mode_name(table.mode) + ".csv",
                    entropy_csv(table));
    push_assert(result, "crooks/" + mode_name(table.mode) + "/max_row_residual",
                table.max_abs_residual, s.config.tol_row,
                table.max_abs_residual <= s.config.tol_row);
  };
  if (bundle.single_triple) handle(*bundle.single_triple);
  if (bundle.bipartite_bsa) {
    handle(*bundle.bipartite_bsa);
    // Row-wise split of the total-correlation correction.
    double max_split = 0.0;
    for (const auto& row : bundle.bipartite_bsa->rows)
      if (row.flag == SupportFlag::Ok)
        max_split = std::max(max_split, std::abs(row.d_psi - row.d_lambda - row.d_xi));
    push_assert(result, "crooks/bipartite_bsa/psi_split_residual", max_split, s.config.tol_row,
                max_split <= s.config.tol_row);
  }
  if (bundle.bipartite_correlation) handle(*bundle.bipartite_correlation);
}

void run_integral_task(const PreparedScenario& s, const EntropyBundle& bundle,
                       const EpmDistribution& forward, const std::string& out_dir,
                       ScenarioResult& result) {
  Json out;
  auto handle = [&](const TrajectoryEntropyTable& table) {
    const IntegralFtReport report =
        integral_ft_check(table, forward, s.config.beta, s.ctx.delta_f);
    const std::string mode = mode_name(table.mode);
    Json j;
    j["mean_exp_neg_ds"] = report.mean_exp_neg_ds;
    j["mean_ds"] = report.mean_ds;
    j["mean_sigma"] = report.mean_sigma;
    j["mean_theta"] = report.mean_theta;
    j["mean_sigma_coh"] = report.mean_sigma_coh;
    j["mean_psi"] = report.mean_psi;
    j["mean_lambda"] = report.mean_lambda;
    j["mean_xi"] = report.mean_xi;
    j["mean_exp_neg_sigma_coh"] = report.mean_exp_neg_sigma_coh;
    j["second_law_budget"] = report.second_law_budget;
    j["valid"] = report.valid;
    out[mode] = std::move(j);
    if (report.valid) {
      push_assert(result, "integral_ft/" + mode + "/ift_deviation",
                  std::abs(report.mean_exp_neg_ds - 1.0), s.config.tol_identity,
                  std::abs(report.mean_exp_neg_ds - 1.0) <= s.config.tol_identity);
      push_assert(result, "integral_ft/" + mode + "/mean_ds", report.mean_ds, -1e-10,
                  report.mean_ds >= -1e-10);
      push_assert(result, "integral_ft/" + mode + "/second_law_budget",
                  report.second_law_budget, -1e-9, report.second_law_budget >= -1e-9);
      if (s.config.expect_sigma_ift && table.mode == EntropyMode::SingleTriple)
        push_assert(result, "integral_ft/sigma_ift_deviation",
                    std::abs(report.mean_exp_neg_sigma_coh - 1.0), s.config.tol_identity,
                    std::abs(report.mean_exp_neg_sigma_coh - 1.0) <= s.config.tol_identity);
      result.summary.push_back({"mean_exp_neg_ds_" + mode, report.mean_exp_neg_ds});
      result.summary.push_back({"mean_ds_" + mode, report.mean_ds});
    }
  };
  if (bundle.single_triple) handle(*bundle.single_triple);
  if (bundle.bipartite_bsa) handle(*bundle.bipartite_bsa);
  if (bundle.bipartite_correlation) handle(*bundle.bipartite_correlation);
  if (!bundle.correlation_note.empty()) out["correlation_note"] = bundle.correlation_note;
  write_text_file(out_dir + "/integral_ft.json", out.dump(2) + "\n");
}

void run_jarzynski_task(const PreparedScenario& s, const EpmDistribution& dist,
                        const std::string& out_dir, ScenarioResult& result) {
  Json out = Json::array();
  const double lhs = jarzynski_lhs(dist, s.config.beta, s.ctx.delta_f);
  const double lhs_operator = jarzynski_lhs_operator(s.ctx);
  assert_identity(result, "jarzynski/lhs_operator_route", lhs, lhs_operator,
                  s.config.tol_identity);
  result.summary.push_back({"jarzynski_lhs", lhs});

  std::vector<JarzynskiReport> reports;
  reports.push_back(
      jarzynski_athermality(s.ctx, dist, weight_of_athermality(s.rho_i, s.ctx.gamma_i)));
  reports.push_back(
      jarzynski_triple(s.ctx, dist, triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i)));
  try {
    reports.push_back(jarzynski_coherence_operator(s.ctx, dist));
  } catch (const DecompositionInapplicable&) {
    // populations differ from Gibbs weights; form skipped
  }
  if (s.config.bipartite) {
    try {
      reports.push_back(jarzynski_correlation(
          s.ctx, dist, correlation_split(s.rho_i, s.config.beta, s.h_i_a, s.h_i_b)));
    } catch (const MarginalsNotThermal&) {
    }
    BsaOptions options;
    options.seed = s.config.seed;
    reports.push_back(jarzynski_bsa(
        s.ctx, dist,
        bsa_resource_split(bsa_decompose(s.rho_i, options), s.gamma_i_a, s.gamma_i_b,
                           s.basis_i_a, s.basis_i_b)));
  }
  for (const auto& report : reports) {
    out.push_back(jarzynski_to_json(report));
    assert_identity(result, "jarzynski/" + to_string(report.form), report.lhs, report.rhs,
                    s.config.tol_identity);
    result.summary.push_back(
        {"jarzynski_err_" + to_string(report.form),
         std::abs(report.lhs - report.rhs) / std::max(1.0, std::abs(report.lhs))});
  }
  write_text_file(out_dir + "/jarzynski.json", out.dump(2) + "\n");
}

void run_decompose_task(const PreparedScenario& s, const std::string& out_dir,
                        ScenarioResult& result) {
  Json out;
  if (!s.config.bipartite) {
    const TripleDecomposition triple = triple_decompose(s.rho_i, s.ctx.gamma_i, s.basis_i);
    out["triple"] = triple_to_json(triple);
    Matrix recon = (1.0 - triple.a) * s.ctx.gamma_i.matrix() +
                   (triple.a * (1.0 - triple.c)) * triple.tau_d.matrix() +
                   (triple.a * triple.c) * triple.tau_c.matrix();
    const double residual = (recon - s.rho_i.matrix()).frobenius_norm();
    push_assert(result, "decompose/triple_reconstruction", residual, 1e-8, residual <= 1e-8);
    result.summary.push_back({"athermality_a", triple.a});
    result.summary.push_back({"coherence_c", triple.c});
  } else {
    BsaOptions options;
    options.seed = s.config.seed;
    const BsaDecomposition bsa = bsa_decompose(s.rho_i, options);
    out["bsa"] = bsa_to_json(bsa);
    Matrix recon = bsa.entangled_part;
    for (const auto& term : bsa.product_terms)
      recon += ((1.0 - bsa.lambda) * term.weight) *
               kron(term.state_a.matrix(), term.state_b.matrix());
    const double residual = (recon - s.rho_i.matrix()).frobenius_norm();
    push_assert(result, "decompose/bsa_reconstruction", residual, 1e-6, residual <= 1e-6);
    const double conc = concurrence(s.rho_i);
    result.summary.push_back({"lambda", bsa.lambda});
    result.summary.push_back({"concurrence", conc});
    try {
      out["correlation"] =
          correlation_to_json(correlation_split(s.rho_i, s.config.beta, s.h_i_a, s.h_i_b));
    } catch (const MarginalsNotThermal& e) {
      out["correlation_note"] = e.what();
    }
  }
  write_text_file(out_dir + "/decompositions.json", out.dump(2) + "\n");
}

void run_cfd_sweep_task(const PreparedScenario& s, const std::string& out_dir,
                        ScenarioResult& result, bool figure_assertions) {
  if (s.config.bipartite) throw ConfigError("cfd_sweep needs a single-system scenario");
  const Json params = s.config.initial_state.value("params", Json::object());
  const double a = get_param_or(params, "a", 0.9);

  std::ostringstream csv;
  csv << "gamma,cfd,bound_dephased,bound_cre\n";
  std::vector<double> cfds, dephs, cres;
  std::vector<double> gammas;
  for (int i = 0; i <= 30; ++i) gammas.push_back(0.01 * i);

  for (double g : gammas) {
    if (g * g > a * (1.0 - a) + 1e-12)
      throw ConfigError("cfd_sweep: gamma exceeds the physical range for a");
    const DensityMatrix rho =
        DensityMatrix::from_numerical(Matrix::from_rows({{a, g}, {g, 1.0 - a}}));
    const CfdReport report = cfd(rho, s.phi, s.basis_i, s.basis_f);
    cfds.push_back(report.cfd);
    dephs.push_back(report.bound_dephased);
    cres.push_back(report.bound_cre);
    csv << format_double(g) << ',' << format_double(report.cfd) << ','
        << format_double(report.bound_dephased) << ',' << format_double(report.bound_cre)
        << '\n';
  }
  write_text_file(out_dir + "/cfd_sweep.csv", csv.str());

  double min_slack_deph = HUGE_VAL, min_slack_cre = HUGE_VAL, min_cfd = HUGE_VAL;
  for (size_t i = 0; i < gammas.size(); ++i) {
    min_slack_deph = std::min(min_slack_deph, dephs[i] - cfds[i]);
    min_slack_cre = std::min(min_slack_cre, cres[i] - dephs[i]);
    min_cfd = std::min(min_cfd, cfds[i]);
  }
  push_assert(result, "cfd_sweep/cfd_nonnegative", min_cfd, -1e-12, min_cfd >= -1e-12);
  push_assert(result, "cfd_sweep/bound_dephased_slack", min_slack_deph, -1e-9,
              min_slack_deph >= -1e-9);
  push_assert(result, "cfd_sweep/bound_cre_slack", min_slack_cre, -1e-9,
              min_slack_cre >= -1e-9);
  if (figure_assertions) {
    const double at_zero = std::max({cfds[0], dephs[0], cres[0]});
    push_assert(result, "cfd_sweep/vanish_at_zero", at_zero, 1e-10, at_zero <= 1e-10);
    double min_step = HUGE_VAL;
    for (size_t i = 1; i < cfds.size(); ++i) min_step = std::min(min_step, cfds[i] - cfds[i - 1]);
    push_assert(result, "cfd_sweep/cfd_monotone", min_step, -1e-10, min_step >= -1e-10);
  }
  result.summary.push_back({"cfd_max", cfds.back()});
  result.summary.push_back({"bound_dephased_max", dephs.back()});
  result.summary.push_back({"bound_cre_max", cres.back()});
}

void run_cfd_task(const PreparedScenario& s, const std::string& out_dir,
                  ScenarioResult& result) {
  if (s.config.bipartite) throw ConfigError("cfd needs a single-system scenario");
  const CfdReport report = cfd(s.rho_i, s.phi, s.basis_i, s.basis_f);
  Json j;
  j["cfd"] = report.cfd;
  j["bound_dephased"] = report.bound_dephased;
  j["bound_cre"] = report.bound_cre;
  j["gradient_norm"] = report.gradient_norm;
  j["iterations"] = report.iterations;
  j["argmin_state"] = matrix_to_json(report.argmin_state.matrix());
  write_text_file(out_dir + "/cfd.json", j.dump(2) + "\n");
  push_assert(result, "cfd/bound_dephased_slack", report.bound_dephased - report.cfd, -1e-9,
              report.bound_dephased - report.cfd >= -1e-9);
  push_assert(result, "cfd/bound_cre_slack", report.bound_cre - report.bound_dephased, -1e-9,
              report.bound_cre - report.bound_dephased >= -1e-9);
  result.summary.push_back({"cfd", report.cfd});
  result.summary.push_back({"bound_dephased", report.bound_dephased});
  result.summary.push_back({"bound_cre", report.bound_cre});
}

void run_efd_task(const PreparedScenario& s, const std::string& out_dir,
                  ScenarioResult& result) {
  if (!s.config.bipartite) throw ConfigError("efd needs a bipartite scenario");
  EfdOptions options;
  options.seed = s.config.seed;
  const EfdReport report =
      efd_estimate(s.rho_i, s.phi, s.levels_i, s.levels_f, options);
  Json j;
  j["efd_upper_estimate"] = report.efd_upper_estimate;
  j["bound_bsa"] = report.bound_bsa;
  j["bound_bsa_relent"] = report.bound_bsa_relent;
  j["bound_relent_ent"] = report.bound_relent_ent;
  j["support_ok"] = report.support_ok;
  j["best_separable_found"] = matrix_to_json(report.best_separable_found.matrix());
  write_text_file(out_dir + "/efd.json", j.dump(2) + "\n");
  if (!std::isinf(report.bound_bsa)) {
    push_assert(result, "efd/estimate_below_bsa_bound",
                report.efd_upper_estimate - report.bound_bsa, 1e-9,
                report.efd_upper_estimate <= report.bound_bsa + 1e-9);
    if (!std::isinf(report.bound_bsa_relent))
      push_assert(result, "efd/bsa_bound_below_relent", report.bound_bsa - report.bound_bsa_relent,
                  1e-9, report.bound_bsa <= report.bound_bsa_relent + 1e-9);
  }
  result.summary.push_back({"efd_upper_estimate", report.efd_upper_estimate});
  result.summary.push_back({"efd_bound_bsa", report.bound_bsa});
}

}  // namespace

ScenarioResult run_scenario_tasks(const PreparedScenario& s, const std::string& out_dir) {
  fs::create_directories(out_dir);
  ScenarioResult result;

  const EpmDistribution forward =
      EpmDistribution::build(s.rho_i, s.phi, s.levels_i, s.levels_f);
  const EpmDistribution backward =
      EpmDistribution::build(s.bwd.rho_tilde_i, s.bwd.phi_tilde, s.levels_f, s.levels_i);
  write_text_file(out_dir + "/epm_forward.csv", epm_csv(forward));
  write_text_file(out_dir + "/epm_backward.csv", epm_csv(backward));

  // Protocol-level identities checked on every run.
  const double residual = mean_energy_residual(forward, s.rho_i, s.phi);
  push_assert(result, "epm/mean_energy_residual", residual, 1e-8, residual <= 1e-8);
  const double total = forward.total_probability();
  push_assert(result, "epm/normalization", std::abs(total - 1.0), 1e-10,
              std::abs(total - 1.0) <= 1e-10);
  result.summary.push_back({"mean_delta_e", forward.mean_delta_e()});
  result.summary.push_back({"delta_f", s.ctx.delta_f});

  std::optional<EntropyBundle> bundle;
  auto entropy_bundle = [&]() -> const EntropyBundle& {
    if (!bundle) bundle = build_entropy_tables(s);
    return *bundle;
  };

  for (const std::string& task : s.config.tasks) {
    if (task == "decompose")
      run_decompose_task(s, out_dir, result);
    else if (task == "jarzynski")
      run_jarzynski_task(s, forward, out_dir, result);
    else if (task == "crooks")
      run_crooks_task(s, entropy_bundle(), out_dir, result);
    else if (task == "integral_ft")
      run_integral_task(s, entropy_bundle(), forward, out_dir, result);
    else if (task == "cfd")
      run_cfd_task(s, out_dir, result);
    else if (task == "cfd_sweep")
      run_cfd_sweep_task(s, out_dir, result, false);
    else if (task == "fig2" || task == "fig3")
      run_cfd_sweep_task(s, out_dir, result, true);
    else if (task == "efd")
      run_efd_task(s, out_dir, result);
    else
      throw ConfigError("unknown task: " + task);
  }
  return result;
}

namespace {

Json manifest_json(const ScenarioConfig& config, const ScenarioResult& result) {
  Json m;
  m["name"] = config.name;
  m["config_hash"] = fnv1a_hex(config.raw.dump());
  m["seed"] = config.seed;
  m["tolerances"] = {{"identity", config.tol_identity}, {"row", config.tol_row}};
  Json asserts = Json::array();
  for (const auto& a : result.assertions) {
    Json entry;
    entry["name"] = a.name;
    entry["measured"] = a.measured;
    entry["tolerance"] = a.tolerance;
    entry["pass"] = a.pass;
    asserts.push_back(std::move(entry));
  }
  m["assertions"] = std::move(asserts);
  m["all_pass"] = result.all_pass;
  return m;
}

ScenarioConfig config_with_overrides(Json raw, const RunOverrides& overrides) {
  if (overrides.seed) raw["seed"] = *overrides.seed;
  if (overrides.tol_identity) raw["tolerances"]["identity"] = *overrides.tol_identity;
  if (overrides.tol_row) raw["tolerances"]["row"] = *overrides.tol_row;
  return parse_scenario_config(raw);
}

int run_config_json(const Json& raw, const RunOverrides& overrides) {
  ScenarioConfig config;
  try {
    config = config_with_overrides(raw, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string base = overrides.out_dir.value_or("out");
  const std::string out_dir = base + "/" + config.name;
  try {
    const PreparedScenario scenario = prepare_scenario(config);
    const ScenarioResult result = run_scenario_tasks(scenario, out_dir);
    write_text_file(out_dir + "/manifest.json",
                    manifest_json(config, result).dump(2) + "\n");
    for (const auto& a : result.assertions)
      std::cout << (a.pass ? "[pass] " : "[FAIL] ") << a.name
                << " measured=" << format_double(a.measured)
                << " tolerance=" << format_double(a.tolerance) << "\n";
    return result.all_pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

void set_dotted_path(Json& j, const std::string& path, double value) {
  Json* node = &j;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

int thread_budget() {
  if (const char* env = std::getenv("EPMFLUX_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

int run_scenario(const std::string& config_path, const RunOverrides& overrides) {
  Json raw;
  try {
    raw = Json::parse(read_text_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return run_config_json(raw, overrides);
}

int run_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<double>& values, const RunOverrides& overrides) {
  Json raw;
  try {
    raw = Json::parse(read_text_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (values.empty()) {
    std::cerr << "config error: sweep needs at least one value\n";
    return 2;
  }
  const std::string base = overrides.out_dir.value_or("out");
  const std::string name = raw.value("name", std::string("scenario"));

  struct PointOutcome {
    int code = 0;
    std::vector<std::pair<std::string, double>> summary;
  };
  auto run_point = [&](double value) -> PointOutcome {
    Json point = raw;
    set_dotted_path(point, parameter, value);
    point["name"] = name + "/sweep/" + parameter + "=" + format_double(value);
    PointOutcome outcome;
    ScenarioConfig config;
    try {
      config = config_with_overrides(point, overrides);
      const PreparedScenario scenario = prepare_scenario(config);
      const ScenarioResult result = run_scenario_tasks(scenario, base + "/" + config.name);
      write_text_file(base + "/" + config.name + "/manifest.json",
                      manifest_json(config, result).dump(2) + "\n");
      outcome.code = result.all_pass ? 0 : 1;
      outcome.summary = result.summary;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      outcome.code = 2;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      outcome.code = 1;
    }
    return outcome;
  };

  // Sweep points are independent; run them in parallel (capped) and merge in
  // value order so the output is deterministic.
  std::vector<PointOutcome> outcomes(values.size());
  const int budget = thread_budget();
  size_t next = 0;
  while (next < values.size()) {
    const size_t batch = std::min<size_t>(budget, values.size() - next);
    std::vector<std::future<PointOutcome>> futures;
    for (size_t b = 0; b < batch; ++b)
      futures.push_back(
          std::async(std::launch::async, run_point, values[next + b]));
    for (size_t b = 0; b < batch; ++b) outcomes[next + b] = futures[b].get();
    next += batch;
  }

  // Merged CSV: parameter column plus the union of summary keys in first-seen
  // order.
  std::vector<std::string> columns;
  for (const auto& outcome : outcomes)
    for (const auto& [key, value] : outcome.summary) {
      (void)value;
      if (std::find(columns.begin(), columns.end(), key) == columns.end())
        columns.push_back(key);
    }
  std::ostringstream csv;
  csv << parameter;
  for (const auto& c : columns) csv << ',' << c;
  csv << '\n';
  for (size_t i = 0; i < values.size(); ++i) {
    csv << format_double(values[i]);
    for (const auto& c : columns) {
      csv << ',';
      for (const auto& [key, value] : outcomes[i].summary)
        if (key == c) {
          csv << format_double(value);
          break;
        }
    }
    csv << '\n';
  }
  fs::create_directories(base + "/" + name);
  write_text_file(base + "/" + name + "/sweep_" + parameter + ".csv", csv.str());

  int code = 0;
  for (const auto& outcome : outcomes) code = std::max(code, outcome.code);
  return code;
}

Json fig2_config() {
  Json j;
  j["schema_version"] = 1;
  j["name"] = "fig2";
  j["system"] = "single";
  j["beta"] = 1.0;
  j["initial_state"] = {{"family", "ini_coh"}, {"params", {{"a", 0.9}, {"gamma", 0.25}}}};
  j["schedule"] = {{"name", "rotating_xz"},
                   {"params", {{"Omega", 1.0}, {"omega", 1.0}}},
                   {"t_i", 0.0},
                   {"t_f", 10.0}};
  j["tasks"] = Json::array({"fig2"});
  j["seed"] = 2;
  return j;
}

Json fig3_config() {
  Json j = fig2_config();
  j["name"] = "fig3";
  j["jumps"] = Json::array({{{"operator", "sigma_x"}, {"kappa", 0.1}}});
  j["tasks"] = Json::array({"fig3"});
  j["seed"] = 3;
  return j;
}

}  // namespace epmflux
