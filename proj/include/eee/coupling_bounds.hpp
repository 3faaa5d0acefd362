// Copyright 2026 The eee-dynamics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EEE_COUPLING_BOUNDS_HPP_
#define EEE_COUPLING_BOUNDS_HPP_

#include <string>
#include <vector>

#include "eee/chain_analysis.hpp"
#include "eee/common.hpp"
#include "eee/game_model.hpp"

namespace eee {

enum class ReferenceSource { kSupplied, kFallback };

std::string ToString(ReferenceSource source);

struct CouplingReport {
  double eps_env = 0.0;                // max_a ||Phi(a) - Phi_U||_{r,inf}
  std::vector<double> eps_local;       // per agent max_a ||phi_i(a) - phi_U,i||
  double eps_local_max = 0.0;
  double lambda = 0.0;                 // eps_env + |I| * eps_local_max
  ReferenceSource reference_source = ReferenceSource::kSupplied;
};

// Throws ConfigurationError when references are absent and fallback is off.
CouplingReport CouplingValue(const GameSpec& spec, bool allow_fallback = false);

// Q-stability under a model error: eps_mu_i |S_i| G_i / (1 - delta_i)^2 per agent.
std::vector<double> QStabilityBound(const GameSpec& spec, const std::vector<double>& eps_mu);

// Structural constants shared by the chained bounds.
struct BoundInputs {
  double kappa = 0.0;
  std::vector<double> minimal_mass;
  std::vector<double> signal_ceiling;
  std::vector<double> reward_bound;     // G_i
  std::vector<double> discount;         // delta_i
  std::vector<double> temperature;      // tau_i
  std::vector<int> n_signals;           // |S_i|
  std::vector<int> n_actions;           // |A_i|
  std::vector<double> others_dim;       // |Z_-i| |X_-i|
  int n_env = 0;
  int action_total = 0;                 // A-hat = sum_j |A_j|
  double lambda = 0.0;
};

BoundInputs CollectBoundInputs(const GameSpec& spec, const ChainDiagnostics& diagnostics,
                               const CouplingReport& coupling,
                               const std::vector<double>& temperature = {});

// ||mu_i - mu-bar_i||_inf <= (1 + p_i^max) kappa |W| |Z_-i| |X_-i| A-hat
//                            ||sigma - sigma-bar|| lambda / m_i.
std::vector<double> ModelPerturbationBound(const GameSpec& spec,
                                           const ChainDiagnostics& diagnostics,
                                           const CouplingReport& coupling,
                                           double sigma_distance);

// rho = max_i (1 + p_i^max) kappa |W| |Z_-i| |X_-i| A-hat |S_i| G_i
//       / (m_i (1 - delta_i)) * max_i sqrt|A_i| / tau_i * lambda + max_i delta_i.
double ContractionFactor(const GameSpec& spec, const ChainDiagnostics& diagnostics,
                         const CouplingReport& coupling,
                         const std::vector<double>& temperature = {});

struct MarginCheck {
  bool holds = false;
  bool zero_margin = false;
  double lhs = 0.0;  // chained Q-deviation bound
  double rhs = 0.0;  // xi_i / 2
};

// (1 + p_i^max) kappa |W||Z_-i||X_-i| A-hat lambda |S_i| G_i
//   / (m_i (1 - delta_i)^2) < xi_i / 2, with ||sigma - sigma-bar|| <= 1.
std::vector<MarginCheck> MarginCondition(const GameSpec& spec,
                                         const ChainDiagnostics& diagnostics,
                                         const CouplingReport& coupling,
                                         const std::vector<double>& xi);

struct TheoremBounds {
  std::vector<double> prop1_bound;   // Q deviation implied by propA2_bound
  std::vector<double> propA2_bound;  // model deviation at sigma_distance
  double sigma_distance = 1.0;
  double rho = 0.0;
  bool rho_certificate = false;      // rho < 1
  std::vector<MarginCheck> margin_condition;  // empty when no margins supplied
  std::vector<double> xi;
  BoundInputs inputs;
};

TheoremBounds ComputeTheoremBounds(const GameSpec& spec, const ChainDiagnostics& diagnostics,
                                   const CouplingReport& coupling,
                                   const std::vector<double>& xi,
                                   const std::vector<double>& temperature = {},
                                   double sigma_distance = 1.0);

}  // namespace eee

#endif  // EEE_COUPLING_BOUNDS_HPP_
