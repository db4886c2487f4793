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

#include <optional>
#include <string>
#include <vector>

#include "epmflux/ftheorems.hpp"
#include "epmflux/io.hpp"
#include "epmflux/measures.hpp"

namespace epmflux {

/**
 * Scenario runner: a JSON config names the system, the initial state, the
 * drive, the jump operators and a list of tasks; running it writes CSV/JSON
 * artifacts plus a manifest with one entry per checked assertion. Identical
 * (config, seed) pairs give byte-identical outputs.
 */
struct ScenarioConfig {
  int schema_version = 1;
  std::string name = "scenario";
  bool bipartite = false;
  double beta = 1.0;
  Json initial_state;
  Json schedule;
  std::vector<std::pair<std::string, double>> jumps;  // operator name, kappa
  int steps_per_unit_time = 2000;
  std::optional<Json> backward_initial_state;
  std::optional<std::string> kraus_file;  // channel override
  std::vector<std::string> tasks;
  std::uint64_t seed = 1;
  double tol_identity = 1e-9;
  double tol_row = 1e-9;
  bool expect_sigma_ift = false;
  Json raw;
};

ScenarioConfig parse_scenario_config(const Json& j);

/// Rank-1 product structure of two local bases (labels are local pairs).
EnergyBasis product_basis(const EnergyBasis& basis_a, const EnergyBasis& basis_b);

/// Fully prepared numerical scenario: bases, channel, states, backward side.
struct PreparedScenario {
  ScenarioConfig config;
  HamiltonianSchedule schedule = make_static_schedule(Matrix::identity(2), 0.0, 1.0);
  EnergyBasis basis_i;  // global (product structure for bipartite systems)
  EnergyBasis basis_f;
  EnergyBasis basis_i_a, basis_i_b, basis_f_a, basis_f_b;  // bipartite locals
  Matrix h_i_a, h_i_b, h_f_a, h_f_b;                       // local Hamiltonians
  LevelSet levels_i;
  LevelSet levels_f;
  QuantumChannel phi;
  DensityMatrix rho_i;
  FtContext ctx;
  BackwardContext bwd;
  DensityMatrix gamma_i_a, gamma_i_b, gamma_f_a, gamma_f_b;  // bipartite thermals
};

PreparedScenario prepare_scenario(const ScenarioConfig& config);

struct Assertion {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ScenarioResult {
  std::vector<Assertion> assertions;
  std::vector<std::pair<std::string, double>> summary;  // scalar metrics, ordered
  bool all_pass = true;
};

/// Executes the configured tasks, writing artifacts under out_dir.
ScenarioResult run_scenario_tasks(const PreparedScenario& scenario, const std::string& out_dir);

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_identity;
  std::optional<double> tol_row;
};

/// Full CLI entry: parse, run, write manifest. Returns the process exit code
/// (0 success, 1 assertion failure, 2 config error).
int run_scenario(const std::string& config_path, const RunOverrides& overrides);

/// Runs the scenario once per parameter value and merges the summary rows
/// into one keyed CSV. The parameter is addressed by dotted path into the
/// config (e.g. "initial_state.params.gamma"). Points may run in parallel
/// (capped by EPMFLUX_THREADS); the merge order is the value order.
int run_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<double>& values, const RunOverrides& overrides);

/// Built-in single-qubit sweep scenarios (unitary and dissipative drives).
Json fig2_config();
Json fig3_config();

}  // namespace epmflux
