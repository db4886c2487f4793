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

#include <map>
#include <string>
#include <vector>

#include "epmflux/epm.hpp"
#include "epmflux/resources.hpp"

namespace epmflux {

/**
 * Forward-process data shared by every fluctuation relation: the initial
 * state, the map, both level sets, the thermal references and the free
 * energy bookkeeping.
 */
struct FtContext {
  DensityMatrix rho_i;
  QuantumChannel phi;
  LevelSet levels_i;
  LevelSet levels_f;
  DensityMatrix gamma_i;
  DensityMatrix gamma_f;
  double beta = 1.0;
  double z_i = 0.0;
  double z_f = 0.0;
  double delta_f = 0.0;
  int dim = 0;
};

FtContext make_ft_context(const DensityMatrix& rho_i, const QuantumChannel& phi,
                          const LevelSet& levels_i, const LevelSet& levels_f, double beta);

enum class JarzynskiForm { CoherenceOperator, Athermality, Triple, CorrelationOperator, Bsa };

std::string to_string(JarzynskiForm form);

struct JarzynskiReport {
  JarzynskiForm form{};
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<std::pair<std::string, double>> term_breakdown;
};

/// <e^{-beta(dE - dF)}> from the joint table.
double jarzynski_lhs(const EpmDistribution& dist, double beta, double delta_f);

/// Factorized operator route Tr(rho gamma_i^{-1}) Tr(Phi[rho] gamma_f).
double jarzynski_lhs_operator(const FtContext& ctx);

/**
 * Right-hand sides of the Jarzynski identity assembled term by term from a
 * chosen decomposition of the initial state. Each is an exact restructuring
 * of the two operator traces, so rhs matches lhs at roundoff whenever the
 * decomposition reconstructs rho_i. The lhs field of the report is filled
 * from the table route.
 */
JarzynskiReport jarzynski_coherence_operator(const FtContext& ctx, const EpmDistribution& dist);
JarzynskiReport jarzynski_athermality(const FtContext& ctx, const EpmDistribution& dist,
                                      const AthermalityDecomposition& decomp);
JarzynskiReport jarzynski_triple(const FtContext& ctx, const EpmDistribution& dist,
                                 const TripleDecomposition& decomp);
JarzynskiReport jarzynski_correlation(const FtContext& ctx, const EpmDistribution& dist,
                                      const CorrelationSplit& split);
JarzynskiReport jarzynski_bsa(const FtContext& ctx, const EpmDistribution& dist,
                              const BsaResourceSplit& split);

// ---------------------------------------------------------------------------
// Trajectory-level entropy production

enum class EntropyMode { SingleTriple, BipartiteCorrelation, BipartiteBsa };
enum class SupportFlag { Ok, ForwardZero, BackwardZero };

struct EntropyRow {
  std::array<int, 2> label_initial{};  // sublabels of l
  std::array<int, 2> label_final{};    // sublabels of k
  double p_forward = 0.0;              // P_Gamma(l,k)
  double p_backward = 0.0;             // P_tilde(k,l)
  double ds_tot = 0.0;
  double tpm_part = 0.0;  // beta (dE - dF)
  double d_sigma = 0.0;
  double d_theta = 0.0;
  double d_sigma_coh = 0.0;  // coherence correction (single mode)
  double d_psi = 0.0;        // total-correlation correction (bipartite modes)
  double d_lambda = 0.0;     // classical-correlation part (BSA mode)
  double d_xi = 0.0;         // entanglement part (BSA mode)
  double residual = 0.0;
  SupportFlag flag = SupportFlag::Ok;
};

/// Backward-process data: initial state rho~_i evolving under the dual map.
struct BackwardContext {
  DensityMatrix rho_tilde_i;
  QuantumChannel phi_tilde;
};

struct TripleInputs {
  TripleDecomposition forward;   // of rho_i w.r.t. gamma_i in the initial basis
  TripleDecomposition backward;  // of rho~_i w.r.t. gamma_f in the final basis
};

struct CorrelationInputs {
  Matrix forward;   // correlation operator of rho_i
  Matrix backward;  // correlation operator of rho~_i
};

struct BsaInputs {
  BsaResourceSplit forward;
  BsaResourceSplit backward;
};

struct TrajectoryEntropyTable {
  EntropyMode mode{};
  std::vector<EntropyRow> rows;
  bool full_backward_support = true;
  double max_abs_residual = 0.0;
};

TrajectoryEntropyTable entropy_table(const FtContext& fwd, const BackwardContext& bwd,
                                     const TripleInputs& inputs);
TrajectoryEntropyTable entropy_table(const FtContext& fwd, const BackwardContext& bwd,
                                     const CorrelationInputs& inputs);
TrajectoryEntropyTable entropy_table(const FtContext& fwd, const BackwardContext& bwd,
                                     const BsaInputs& inputs);

/**
 * Integral fluctuation relations over the forward distribution. Rows with
 * zero forward probability contribute nothing; a positive-forward row with
 * zero backward probability invalidates the exponential averages and is
 * surfaced through the `valid` flag rather than dropped silently.
 */
struct IntegralFtReport {
  double mean_exp_neg_ds = 0.0;
  double mean_ds = 0.0;
  double mean_sigma = 0.0;
  double mean_theta = 0.0;
  double mean_sigma_coh = 0.0;
  double mean_psi = 0.0;
  double mean_lambda = 0.0;
  double mean_xi = 0.0;
  double mean_exp_neg_sigma_coh = 0.0;
  double second_law_budget = 0.0;  // beta(<dE> - dF) + sum of mean corrections
  bool valid = true;
};

IntegralFtReport integral_ft_check(const TrajectoryEntropyTable& table,
                                   const EpmDistribution& forward, double beta, double delta_f);

}  // namespace epmflux
