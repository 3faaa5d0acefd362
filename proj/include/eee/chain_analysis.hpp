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

#ifndef EEE_CHAIN_ANALYSIS_HPP_
#define EEE_CHAIN_ANALYSIS_HPP_

#include <vector>

#include "eee/common.hpp"
#include "eee/game_model.hpp"
#include "eee/profiles.hpp"

namespace eee {

// Exact chain over joint states psi = (w, z, x) under a strategy profile.
struct JointTransition {
  JointIndexer indexer;
  Matrix matrix;  // rows and columns in indexer order
};

struct StationaryDistribution {
  Vector pi;
  double residual = 0.0;  // max |pi T - pi|
};

enum class StationaryMethod { kDirect, kPower };

struct StationaryOptions {
  double tolerance = 1e-12;
  long max_power_iterations = 1'000'000;
};

struct ChainDiagnostics {
  double kappa = 0.0;
  std::vector<double> minimal_mass;    // m_i
  std::vector<double> signal_ceiling;  // p_i^max
};

// T(psi, psi+) = sum_a sigma(z,x)[a] Phi_{w w+}(a)
//                * prod_i sum_{s_i} M_i(w, s_i) 1{z_i+ = l_i(z_i, s_i)}
//                                   phi_i(x_i, s_i, a_i)[x_i+].
JointTransition BuildJointTransition(const GameSpec& spec, const Strategy& sigma);

// Direct solve with power-iteration fallback. Throws ChainError when neither
// reaches the tolerance.
StationaryDistribution SolveStationary(const Matrix& t,
                                       const StationaryOptions& options = {});
inline StationaryDistribution SolveStationary(const JointTransition& t,
                                              const StationaryOptions& options = {}) {
  return SolveStationary(t.matrix, options);
}

// Single-method solvers, exposed so the two routes can cross-check.
StationaryDistribution SolveStationaryDirect(const Matrix& t);
StationaryDistribution SolveStationaryPower(const Matrix& t,
                                            const StationaryOptions& options = {});

// Marginal pi(z_i, x_i) for each agent as a |Z_i| x |X_i| matrix.
std::vector<Matrix> SituationMarginals(const GameSpec& spec, const JointIndexer& ix,
                                       const Vector& pi);

// mu_i(z_i, x_i)[s_i] = N(s_i, z_i, x_i) / D(z_i, x_i) from a solved pi.
ConsistentModel ConsistentModelFromStationary(const GameSpec& spec,
                                              const JointIndexer& ix,
                                              const Vector& pi);

ConsistentModel ComputeConsistentModel(const GameSpec& spec, const Strategy& sigma);

// kappa = max_ij |A#_ij| where A# = (I - T + 1 pi^T)^{-1} - 1 pi^T.
double MeyerConditionNumber(const Matrix& t_ref);
inline double MeyerConditionNumber(const JointTransition& t_ref) {
  return MeyerConditionNumber(t_ref.matrix);
}

// Group inverse of I - T for an ergodic chain.
Matrix GroupInverse(const Matrix& t, const Vector& pi);

// kappa on the uncoupled reference chain, m_i under sigma, p_i^max from M_i.
// With allow_fallback, absent references are replaced by action averages.
ChainDiagnostics ComputeChainDiagnostics(const GameSpec& spec, const Strategy& sigma,
                                         bool allow_fallback = false);

// Elementwise minimum of m_i (kappa and p_i^max must agree).
ChainDiagnostics MergeMinimalMass(const ChainDiagnostics& a, const ChainDiagnostics& b);

}  // namespace eee

#endif  // EEE_CHAIN_ANALYSIS_HPP_
