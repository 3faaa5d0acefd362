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

#include "eee/chain_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace eee {

namespace {

// Agent-local next-state factor for one (w, z_i, x_i, a_i): a |Z_i| x |X_i|
// table F(z+, x+) = sum_s M_i(w, s) 1{z+ = l_i(z_i, s)} phi_i(x_i, s, a_i)[x+].
void LocalFactor(const AgentSpec& a, int w, int z, int x, int action,
                 std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(a.n_memory) * a.n_states, 0.0);
  const Matrix& phi = a.local_kernels[action];
  for (int s = 0; s < a.n_signals; ++s) {
    const double ps = a.signal_kernel(w, s);
    if (ps == 0.0) continue;
    const int zn = a.next_memory(z, s);
    const int row = a.local_row(x, s);
    for (int xn = 0; xn < a.n_states; ++xn) {
      out[static_cast<std::size_t>(zn) * a.n_states + xn] += ps * phi(row, xn);
    }
  }
}

double StationaryResidual(const Matrix& t, const Vector& pi) {
  return ((pi.transpose() * t) - pi.transpose()).cwiseAbs().maxCoeff();
}

void CheckSquareStochastic(const Matrix& t) {
  if (t.rows() != t.cols() || t.rows() == 0) {
    throw StructuralError("transition matrix must be square and non-empty");
  }
}

std::string SituationLabel(int agent, int z, int x) {
  std::ostringstream os;
  os << "agent " << agent + 1 << " state (z=" << z + 1 << ", x=" << x + 1 << ")";
  return os.str();
}

}  // namespace

JointTransition BuildJointTransition(const GameSpec& spec, const Strategy& sigma) {
  CheckShape(spec, sigma);
  const std::size_t n = spec.n_joint_states();
  if (n > kMaxJointStates) {
    throw StructuralError("joint state space too large: " + std::to_string(n) +
                          " states");
  }
  if (spec.env_kernels.size() != spec.n_joint_actions()) {
    throw StructuralError("env_kernels must hold one kernel per joint action");
  }
  JointTransition jt{JointIndexer(spec), Matrix::Zero(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(n))};
  const JointIndexer& ix = jt.indexer;
  const int n_agents = spec.n_agents();
  const std::size_t env_stride = n / static_cast<std::size_t>(spec.n_env);

  // Column offset contributed by each agent's (z+, x+) within one w+ block.
  std::vector<std::vector<std::size_t>> local_offset(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const auto& a = spec.agents[i];
    JointIndexer::JointState probe{0, std::vector<int>(n_agents, 0),
                                   std::vector<int>(n_agents, 0)};
    for (int zn = 0; zn < a.n_memory; ++zn) {
      for (int xn = 0; xn < a.n_states; ++xn) {
        probe.z[i] = zn;
        probe.x[i] = xn;
        local_offset[i].push_back(ix.Flatten(probe));
      }
    }
  }

  std::vector<std::vector<double>> factors(n_agents);
  std::vector<int> odometer(n_agents, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto psi = ix.Unflatten(r);
    for (std::size_t ja = 0; ja < ix.n_actions(); ++ja) {
      const auto acts = ix.UnflattenAction(ja);
      double pa = 1.0;
      for (int i = 0; i < n_agents && pa != 0.0; ++i) {
        pa *= sigma.agents[i](psi.z[i], psi.x[i], acts[i]);
      }
      if (pa == 0.0) continue;
      for (int i = 0; i < n_agents; ++i) {
        LocalFactor(spec.agents[i], psi.w, psi.z[i], psi.x[i], acts[i], factors[i]);
      }
      const Matrix& env = spec.env_kernels[ja];
      // Enumerate the product over agents of their local factors.
      std::fill(odometer.begin(), odometer.end(), 0);
      while (true) {
        double p = pa;
        std::size_t offset = 0;
        for (int i = 0; i < n_agents && p != 0.0; ++i) {
          p *= factors[i][odometer[i]];
          offset += local_offset[i][odometer[i]];
        }
        if (p != 0.0) {
          for (int wn = 0; wn < spec.n_env; ++wn) {
            const double pw = env(psi.w, wn);
            if (pw != 0.0) {
              jt.matrix(static_cast<Eigen::Index>(r),
                        static_cast<Eigen::Index>(wn * env_stride + offset)) += p * pw;
            }
          }
        }
        int i = n_agents - 1;
        while (i >= 0) {
          if (++odometer[i] < static_cast<int>(factors[i].size())) break;
          odometer[i] = 0;
          --i;
        }
        if (i < 0) break;
      }
    }
  }
  return jt;
}

StationaryDistribution SolveStationaryDirect(const Matrix& t) {
  CheckSquareStochastic(t);
  const Eigen::Index n = t.rows();
  Matrix a = t.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) {
    throw ChainError("stationary direct solve: singular system", INFINITY);
  }
  Vector pi = lu.solve(b);
  if (!pi.allFinite()) {
    throw ChainError("stationary direct solve: non-finite solution", INFINITY);
  }
  if (pi.minCoeff() < -1e-9) {
    throw ChainError("stationary direct solve: negative mass", StationaryResidual(t, pi));
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return {pi, StationaryResidual(t, pi)};
}

StationaryDistribution SolveStationaryPower(const Matrix& t,
                                            const StationaryOptions& options) {
  CheckSquareStochastic(t);
  const Eigen::Index n = t.rows();
  Vector pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const Matrix tt = t.transpose();
  double residual = INFINITY;
  for (long k = 0; k < options.max_power_iterations; ++k) {
    Vector next = tt * pi;
    next /= next.sum();
    residual = (next - pi).cwiseAbs().maxCoeff();
    pi.swap(next);
    if (residual <= options.tolerance) {
      return {pi, StationaryResidual(t, pi)};
    }
  }
  throw ChainError("power iteration did not converge", residual);
}

StationaryDistribution SolveStationary(const Matrix& t, const StationaryOptions& options) {
  double direct_residual = INFINITY;
  try {
    auto sd = SolveStationaryDirect(t);
    if (sd.residual <= options.tolerance) return sd;
    direct_residual = sd.residual;
  } catch (const ChainError& e) {
    direct_residual = e.residual();
  }
  try {
    return SolveStationaryPower(t, options);
  } catch (const ChainError& e) {
    std::ostringstream os;
    os << "chain may violate the ergodicity assumption (direct residual "
       << direct_residual << ", power residual " << e.residual() << ")";
    throw ChainError(os.str(), std::min(direct_residual, e.residual()));
  }
}

std::vector<Matrix> SituationMarginals(const GameSpec& spec, const JointIndexer& ix,
                                       const Vector& pi) {
  std::vector<Matrix> out;
  for (const auto& a : spec.agents) out.push_back(Matrix::Zero(a.n_memory, a.n_states));
  for (std::size_t k = 0; k < ix.n_states(); ++k) {
    const auto psi = ix.Unflatten(k);
    for (int i = 0; i < spec.n_agents(); ++i) {
      out[i](psi.z[i], psi.x[i]) += pi(static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

ConsistentModel ConsistentModelFromStationary(const GameSpec& spec,
                                              const JointIndexer& ix,
                                              const Vector& pi) {
  ConsistentModel mu;
  std::vector<Matrix> mass;
  for (const auto& a : spec.agents) {
    mu.agents.emplace_back(a.n_memory, a.n_states, a.n_signals, 0.0);
    mass.push_back(Matrix::Zero(a.n_memory, a.n_states));
  }
  for (std::size_t k = 0; k < ix.n_states(); ++k) {
    const double p = pi(static_cast<Eigen::Index>(k));
    if (p == 0.0) continue;
    const auto psi = ix.Unflatten(k);
    for (int i = 0; i < spec.n_agents(); ++i) {
      const auto& a = spec.agents[i];
      mass[i](psi.z[i], psi.x[i]) += p;
      for (int s = 0; s < a.n_signals; ++s) {
        mu.agents[i](psi.z[i], psi.x[i], s) += a.signal_kernel(psi.w, s) * p;
      }
    }
  }
  for (int i = 0; i < spec.n_agents(); ++i) {
    const auto& a = spec.agents[i];
    for (int z = 0; z < a.n_memory; ++z) {
      for (int x = 0; x < a.n_states; ++x) {
        const double d = mass[i](z, x);
        if (d < kStationaryMassFloor) {
          throw ChainError(SituationLabel(i, z, x) + " has vanishing stationary mass",
                           d);
        }
        for (double& v : mu.agents[i].slice(z, x)) v /= d;
      }
    }
  }
  return mu;
}

ConsistentModel ComputeConsistentModel(const GameSpec& spec, const Strategy& sigma) {
  const auto jt = BuildJointTransition(spec, sigma);
  const auto sd = SolveStationary(jt);
  return ConsistentModelFromStationary(spec, jt.indexer, sd.pi);
}

Matrix GroupInverse(const Matrix& t, const Vector& pi) {
  const Eigen::Index n = t.rows();
  const Matrix w = Vector::Ones(n) * pi.transpose();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) - t + w);
  if (!lu.isInvertible()) {
    throw ChainError("chain not ergodic: fundamental matrix is singular", INFINITY);
  }
  return lu.inverse() - w;
}

double MeyerConditionNumber(const Matrix& t_ref) {
  CheckSquareStochastic(t_ref);
  const auto sd = SolveStationary(t_ref);
  return GroupInverse(t_ref, sd.pi).cwiseAbs().maxCoeff();
}

ChainDiagnostics ComputeChainDiagnostics(const GameSpec& spec, const Strategy& sigma,
                                         bool allow_fallback) {
  GameSpec ref_source = spec;
  if (allow_fallback) {
    FillFallbackReferences(ref_source);
  } else if (!spec.uncoupled_env ||
             std::any_of(spec.agents.begin(), spec.agents.end(),
                         [](const AgentSpec& a) { return !a.uncoupled_local; })) {
    throw ConfigurationError("uncoupled reference kernels required for kappa");
  }
  const GameSpec reference = UncoupledReference(ref_source);

  ChainDiagnostics d;
  d.kappa = MeyerConditionNumber(BuildJointTransition(reference, UniformStrategy(reference)));

  const auto jt = BuildJointTransition(spec, sigma);
  const auto sd = SolveStationary(jt);
  const auto marginals = SituationMarginals(spec, jt.indexer, sd.pi);
  for (int i = 0; i < spec.n_agents(); ++i) {
    d.minimal_mass.push_back(marginals[i].minCoeff());
    d.signal_ceiling.push_back(spec.agents[i].signal_kernel.maxCoeff());
  }
  return d;
}

ChainDiagnostics MergeMinimalMass(const ChainDiagnostics& a, const ChainDiagnostics& b) {
  if (a.minimal_mass.size() != b.minimal_mass.size()) {
    throw StructuralError("MergeMinimalMass: agent count mismatch");
  }
  ChainDiagnostics out = a;
  for (std::size_t i = 0; i < out.minimal_mass.size(); ++i) {
    out.minimal_mass[i] = std::min(a.minimal_mass[i], b.minimal_mass[i]);
  }
  return out;
}

}  // namespace eee
