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

#include "eee/coupling_bounds.hpp"

#include <algorithm>
#include <cmath>

namespace eee {

std::string ToString(ReferenceSource source) {
  return source == ReferenceSource::kSupplied ? "supplied" : "fallback";
}

CouplingReport CouplingValue(const GameSpec& spec, bool allow_fallback) {
  GameSpec ref = spec;
  CouplingReport report;
  const bool missing =
      !spec.uncoupled_env ||
      std::any_of(spec.agents.begin(), spec.agents.end(),
                  [](const AgentSpec& a) { return !a.uncoupled_local; });
  if (missing) {
    if (!allow_fallback) {
      throw ConfigurationError(
          "coupling value needs uncoupled_env and uncoupled_local kernels "
          "(or enable the action-average fallback)");
    }
    FillFallbackReferences(ref);
    report.reference_source = ReferenceSource::kFallback;
  }
  for (const auto& k : ref.env_kernels) {
    report.eps_env = std::max(report.eps_env, RowSumNorm(k - *ref.uncoupled_env));
  }
  for (const auto& a : ref.agents) {
    double eps = 0.0;
    for (const auto& k : a.local_kernels) {
      eps = std::max(eps, RowSumNorm(k - *a.uncoupled_local));
    }
    report.eps_local.push_back(eps);
    report.eps_local_max = std::max(report.eps_local_max, eps);
  }
  report.lambda = report.eps_env + spec.n_agents() * report.eps_local_max;
  return report;
}

std::vector<double> QStabilityBound(const GameSpec& spec, const std::vector<double>& eps_mu) {
  if (eps_mu.size() != spec.agents.size()) {
    throw StructuralError("q_stability_bound: one eps_mu per agent required");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < eps_mu.size(); ++i) {
    const auto& a = spec.agents[i];
    if (eps_mu[i] < 0.0) throw DomainError("q_stability_bound: eps_mu must be >= 0");
    const double gap = 1.0 - a.discount;
    out.push_back(eps_mu[i] * a.n_signals * a.reward_bound() / (gap * gap));
  }
  return out;
}

BoundInputs CollectBoundInputs(const GameSpec& spec, const ChainDiagnostics& diagnostics,
                               const CouplingReport& coupling,
                               const std::vector<double>& temperature) {
  const int n = spec.n_agents();
  if (static_cast<int>(diagnostics.minimal_mass.size()) != n ||
      static_cast<int>(diagnostics.signal_ceiling.size()) != n) {
    throw StructuralError("diagnostics do not match the agent count");
  }
  BoundInputs in;
  in.kappa = diagnostics.kappa;
  in.minimal_mass = diagnostics.minimal_mass;
  in.signal_ceiling = diagnostics.signal_ceiling;
  in.n_env = spec.n_env;
  in.lambda = coupling.lambda;
  for (int i = 0; i < n; ++i) {
    const auto& a = spec.agents[i];
    in.reward_bound.push_back(a.reward_bound());
    in.discount.push_back(a.discount);
    in.n_signals.push_back(a.n_signals);
    in.n_actions.push_back(a.n_actions);
    in.action_total += a.n_actions;
    double others = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) others *= static_cast<double>(spec.agents[j].n_situations());
    }
    in.others_dim.push_back(others);
    if (temperature.empty()) {
      in.temperature.push_back(a.temperature);
    } else {
      in.temperature.push_back(temperature.at(i));
    }
  }
  return in;
}

namespace {

void RequireMass(const BoundInputs& in) {
  for (double m : in.minimal_mass) {
    if (!(m > 0.0)) throw DomainError("minimal mass violated (m_i = 0)");
  }
}

// (1 + p_i^max) kappa |W| |Z_-i| |X_-i| A-hat / m_i: the per-unit
// (sigma distance * lambda) model deviation.
double ModelSensitivity(const BoundInputs& in, int i) {
  return (1.0 + in.signal_ceiling[i]) * in.kappa * in.n_env * in.others_dim[i] *
         in.action_total / in.minimal_mass[i];
}

}  // namespace

std::vector<double> ModelPerturbationBound(const GameSpec& spec,
                                           const ChainDiagnostics& diagnostics,
                                           const CouplingReport& coupling,
                                           double sigma_distance) {
  if (sigma_distance < 0.0) throw DomainError("sigma distance must be >= 0");
  const auto in = CollectBoundInputs(spec, diagnostics, coupling);
  RequireMass(in);
  std::vector<double> out;
  for (int i = 0; i < spec.n_agents(); ++i) {
    out.push_back(ModelSensitivity(in, i) * sigma_distance * coupling.lambda);
  }
  return out;
}

double ContractionFactor(const GameSpec& spec, const ChainDiagnostics& diagnostics,
                         const CouplingReport& coupling,
                         const std::vector<double>& temperature) {
  const auto in = CollectBoundInputs(spec, diagnostics, coupling, temperature);
  RequireMass(in);
  double q_gain = 0.0;
  double softmax_gain = 0.0;
  double max_discount = 0.0;
  for (int i = 0; i < spec.n_agents(); ++i) {
    if (!(in.temperature[i] > 0.0)) throw DomainError("temperature must be > 0");
    q_gain = std::max(q_gain, ModelSensitivity(in, i) * in.n_signals[i] *
                                  in.reward_bound[i] / (1.0 - in.discount[i]));
    softmax_gain =
        std::max(softmax_gain, std::sqrt(static_cast<double>(in.n_actions[i])) /
                                   in.temperature[i]);
    max_discount = std::max(max_discount, in.discount[i]);
  }
  return q_gain * softmax_gain * coupling.lambda + max_discount;
}

std::vector<MarginCheck> MarginCondition(const GameSpec& spec,
                                         const ChainDiagnostics& diagnostics,
                                         const CouplingReport& coupling,
                                         const std::vector<double>& xi) {
  if (xi.size() != spec.agents.size()) {
    throw StructuralError("margin_condition: one margin per agent required");
  }
  const auto in = CollectBoundInputs(spec, diagnostics, coupling);
  RequireMass(in);
  std::vector<MarginCheck> out;
  for (int i = 0; i < spec.n_agents(); ++i) {
    MarginCheck c;
    const double gap = 1.0 - in.discount[i];
    c.lhs = ModelSensitivity(in, i) * coupling.lambda * in.n_signals[i] *
            in.reward_bound[i] / (gap * gap);
    c.rhs = xi[i] / 2.0;
    c.zero_margin = !(xi[i] > 0.0);
    c.holds = !c.zero_margin && c.lhs < c.rhs;
    out.push_back(c);
  }
  return out;
}

TheoremBounds ComputeTheoremBounds(const GameSpec& spec, const ChainDiagnostics& diagnostics,
                                   const CouplingReport& coupling,
                                   const std::vector<double>& xi,
                                   const std::vector<double>& temperature,
                                   double sigma_distance) {
  TheoremBounds b;
  b.inputs = CollectBoundInputs(spec, diagnostics, coupling, temperature);
  b.sigma_distance = sigma_distance;
  b.propA2_bound = ModelPerturbationBound(spec, diagnostics, coupling, sigma_distance);
  b.prop1_bound = QStabilityBound(spec, b.propA2_bound);
  b.rho = ContractionFactor(spec, diagnostics, coupling, b.inputs.temperature);
  b.rho_certificate = b.rho < 1.0;
  b.xi = xi;
  if (!xi.empty()) b.margin_condition = MarginCondition(spec, diagnostics, coupling, xi);
  return b;
}

}  // namespace eee
