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

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "epmflux/scenario.hpp"

namespace {

epmflux::RunOverrides make_overrides(const std::string& out_dir, std::int64_t seed,
                                     double tol_identity, double tol_row) {
  epmflux::RunOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
  if (tol_identity > 0.0) overrides.tol_identity = tol_identity;
  if (tol_row > 0.0) overrides.tol_row = tol_row;
  return overrides;
}

int run_builtin_figure(const epmflux::Json& config, const epmflux::RunOverrides& overrides) {
  const std::string base = overrides.out_dir.value_or("out");
  const std::string path =
      base + "/." + config.at("name").get<std::string>() + ".config.json";
  std::filesystem::create_directories(base);
  epmflux::write_text_file(path, config.dump(2) + "\n");
  return epmflux::run_scenario(path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epmflux: end-point-measurement statistics, resource decompositions and "
               "fluctuation-identity checks for small quantum systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  double tol_identity = -1.0;
  double tol_row = -1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "output directory (default: out)");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--tol-identity", tol_identity, "identity-check tolerance (default 1e-9)");
    cmd->add_option("--tol-row", tol_row, "row-residual tolerance (default 1e-9)");
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario JSON file")->required();
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "run a scenario once per parameter value");
  std::string parameter;
  std::vector<double> values;
  sweep->add_option("config", config_path, "scenario JSON file")->required();
  sweep->add_option("--param", parameter, "dotted config path, e.g. initial_state.params.gamma")
      ->required();
  sweep->add_option("--values", values, "parameter values")->required()->expected(-1);
  add_common(sweep);

  CLI::App* fig2 = app.add_subcommand("fig2", "single-qubit coherence sweep, unitary drive");
  add_common(fig2);
  CLI::App* fig3 = app.add_subcommand("fig3", "single-qubit coherence sweep, dissipative drive");
  add_common(fig3);

  CLI11_PARSE(app, argc, argv);

  const epmflux::RunOverrides overrides = make_overrides(out_dir, seed, tol_identity, tol_row);
  try {
    if (run->parsed()) return epmflux::run_scenario(config_path, overrides);
    if (sweep->parsed()) return epmflux::run_sweep(config_path, parameter, values, overrides);
    if (fig2->parsed()) return run_builtin_figure(epmflux::fig2_config(), overrides);
    if (fig3->parsed()) return run_builtin_figure(epmflux::fig3_config(), overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
