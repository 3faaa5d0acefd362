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

#include "eee/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eee {

double AgentSpec::reward_bound() const {
  double g = 0.0;
  for (double r : reward) g = std::max(g, std::abs(r));
  return g;
}

std::size_t GameSpec::n_joint_actions() const {
  std::size_t n = 1;
  for (const auto& a : agents) n *= static_cast<std::size_t>(a.n_actions);
  return n;
}

std::size_t GameSpec::n_joint_states() const {
  std::size_t n = static_cast<std::size_t>(n_env);
  for (const auto& a : agents) {
    n *= static_cast<std::size_t>(a.n_memory) * static_cast<std::size_t>(a.n_states);
  }
  return n;
}

JointIndexer::JointIndexer(const GameSpec& spec) : n_env_(spec.n_env) {
  n_states_ = static_cast<std::size_t>(n_env_);
  n_actions_ = 1;
  for (const auto& a : spec.agents) {
    memory_dims_.push_back(a.n_memory);
    state_dims_.push_back(a.n_states);
    action_dims_.push_back(a.n_actions);
    n_states_ *= static_cast<std::size_t>(a.n_memory) * a.n_states;
    n_actions_ *= static_cast<std::size_t>(a.n_actions);
  }
}

std::size_t JointIndexer::Flatten(const JointState& psi) const {
  const int n = n_agents();
  if (static_cast<int>(psi.z.size()) != n || static_cast<int>(psi.x.size()) != n) {
    throw StructuralError("JointIndexer::Flatten: agent count mismatch");
  }
  std::size_t idx = static_cast<std::size_t>(psi.w);
  for (int i = 0; i < n; ++i) idx = idx * memory_dims_[i] + psi.z[i];
  for (int i = 0; i < n; ++i) idx = idx * state_dims_[i] + psi.x[i];
  return idx;
}

JointIndexer::JointState JointIndexer::Unflatten(std::size_t index) const {
  const int n = n_agents();
  JointState psi;
  psi.z.assign(n, 0);
  psi.x.assign(n, 0);
  for (int i = n - 1; i >= 0; --i) {
    psi.x[i] = static_cast<int>(index % state_dims_[i]);
    index /= state_dims_[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    psi.z[i] = static_cast<int>(index % memory_dims_[i]);
    index /= memory_dims_[i];
  }
  psi.w = static_cast<int>(index);
  return psi;
}

std::size_t JointIndexer::FlattenAction(const std::vector<int>& actions) const {
  if (actions.size() != action_dims_.size()) {
    throw StructuralError("JointIndexer::FlattenAction: agent count mismatch");
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    idx = idx * action_dims_[i] + actions[i];
  }
  return idx;
}

std::vector<int> JointIndexer::UnflattenAction(std::size_t index) const {
  std::vector<int> a(action_dims_.size(), 0);
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
    a[i] = static_cast<int>(index % action_dims_[i]);
    index /= action_dims_[i];
  }
  return a;
}

std::vector<int> JointIndexer::dims() const {
  std::vector<int> d{n_env_};
  d.insert(d.end(), memory_dims_.begin(), memory_dims_.end());
  d.insert(d.end(), state_dims_.begin(), state_dims_.end());
  return d;
}

std::string Violation::ToString() const {
  std::ostringstream os;
  os << kernel;
  if (row >= 0) os << " row " << row + 1;  // 1-based like the file format
  os << ": " << defect;
  return os.str();
}

void ValidateKernel(const Matrix& m, int rows, int cols, const std::string& name,
                    std::vector<Violation>& out) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "shape " << m.rows() << "x" << m.cols() << ", expected " << rows
       << "x" << cols;
    out.push_back({name, -1, os.str()});
    return;
  }
  for (int r = 0; r < rows; ++r) {
    bool negative = false;
    bool finite = true;
    for (int c = 0; c < cols; ++c) {
      if (!std::isfinite(m(r, c))) finite = false;
      if (m(r, c) < 0.0) negative = true;
    }
    if (!finite) {
      out.push_back({name, r, "non-finite probability"});
      continue;
    }
    if (negative) out.push_back({name, r, "negative probability"});
    const double sum = m.row(r).sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os.precision(15);
      os << "row sum " << sum << " != 1";
      out.push_back({name, r, os.str()});
    }
  }
}

namespace {

std::string JointActionLabel(const JointIndexer& ix, std::size_t a) {
  std::ostringstream os;
  const auto acts = ix.UnflattenAction(a);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (i) os << ",";
    os << acts[i] + 1;
  }
  return os.str();
}

}  // namespace

ValidationReport ValidateSpec(const GameSpec& spec) {
  ValidationReport report;
  auto& out = report.violations;
  if (spec.n_env < 1) out.push_back({"n_env", -1, "must be >= 1"});
  if (spec.agents.empty()) out.push_back({"agents", -1, "at least one agent"});
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    const auto& a = spec.agents[i];
    if (a.n_states < 1 || a.n_actions < 1 || a.n_signals < 1 || a.n_memory < 1) {
      out.push_back({"agents[" + std::to_string(i + 1) + "]", -1,
                     "dimensions must be >= 1"});
    }
  }
  if (!out.empty()) return report;

  const JointIndexer ix(spec);
  if (spec.env_kernels.size() != ix.n_actions()) {
    out.push_back({"env_kernels", -1,
                   "expected " + std::to_string(ix.n_actions()) +
                       " joint-action kernels, found " +
                       std::to_string(spec.env_kernels.size())});
  } else {
    for (std::size_t a = 0; a < spec.env_kernels.size(); ++a) {
      ValidateKernel(spec.env_kernels[a], spec.n_env, spec.n_env,
                     "env_kernels[" + JointActionLabel(ix, a) + "]", out);
    }
  }
  if (spec.uncoupled_env) {
    ValidateKernel(*spec.uncoupled_env, spec.n_env, spec.n_env, "uncoupled_env", out);
  }

  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    const auto& a = spec.agents[i];
    const std::string prefix = "agents[" + std::to_string(i + 1) + "]";
    ValidateKernel(a.signal_kernel, spec.n_env, a.n_signals, prefix + ".signal_kernel",
                   out);
    if (static_cast<int>(a.local_kernels.size()) != a.n_actions) {
      out.push_back({prefix + ".local_kernels", -1,
                     "expected one kernel per action"});
    } else {
      for (int k = 0; k < a.n_actions; ++k) {
        ValidateKernel(a.local_kernels[k], a.n_states * a.n_signals, a.n_states,
                       prefix + ".local_kernels[" + std::to_string(k + 1) + "]", out);
      }
    }
    if (a.uncoupled_local) {
      ValidateKernel(*a.uncoupled_local, a.n_states * a.n_signals, a.n_states,
                     prefix + ".uncoupled_local", out);
    }
    if (static_cast<int>(a.memory_rule.size()) != a.n_memory * a.n_signals) {
      out.push_back({prefix + ".memory_rule", -1, "memory rule is not total"});
    } else {
      for (int z = 0; z < a.n_memory; ++z) {
        for (int s = 0; s < a.n_signals; ++s) {
          const int next = a.next_memory(z, s);
          if (next < 0 || next >= a.n_memory) {
            out.push_back({prefix + ".memory_rule", z,
                           "signal " + std::to_string(s + 1) +
                               " maps outside the memory set"});
          }
        }
      }
    }
    const std::size_t n_reward =
        static_cast<std::size_t>(a.n_states) * a.n_actions * a.n_signals;
    if (a.reward.size() != n_reward) {
      out.push_back({prefix + ".reward", -1, "expected X*A*S entries"});
    } else if (std::any_of(a.reward.begin(), a.reward.end(),
                           [](double r) { return !std::isfinite(r); })) {
      out.push_back({prefix + ".reward", -1, "non-finite reward"});
    }
    if (!(a.discount > 0.0 && a.discount < 1.0)) {
      out.push_back({prefix + ".discount", -1, "discount must lie in (0, 1)"});
    }
    if (!(a.temperature > 0.0)) {
      out.push_back({prefix + ".temperature", -1, "temperature must be > 0"});
    }
  }
  return report;
}

namespace {

Matrix Rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

AgentSpec Example1Agent(Matrix signal, Matrix local1, Matrix local2,
                        const double (&g)[2][2]) {
  AgentSpec a;
  a.n_states = 2;
  a.n_actions = 2;
  a.n_signals = 2;
  a.n_memory = 2;
  a.signal_kernel = std::move(signal);
  a.local_kernels = {std::move(local1), std::move(local2)};
  a.uncoupled_local = Matrix::Constant(4, 2, 0.5);
  a.memory_rule = {0, 1, 0, 1};  // z+ = s
  a.reward.resize(8);
  for (int x = 0; x < 2; ++x) {
    for (int act = 0; act < 2; ++act) {
      for (int s = 0; s < 2; ++s) a.reward[(x * 2 + act) * 2 + s] = g[act][s];
    }
  }
  a.discount = 0.7;
  a.temperature = 1.0;
  return a;
}

}  // namespace

ConvexFamily BuildExample1() {
  GameSpec g;
  g.n_env = 4;
  g.uncoupled_env = Rows({{0.36, 0.42, 0.05, 0.17},
                          {0.06, 0.42, 0.33, 0.19},
                          {0.34, 0.03, 0.03, 0.60},
                          {0.39, 0.29, 0.24, 0.08}});
  g.env_kernels = {
      Rows({{0.29, 0.09, 0.15, 0.47},
            {0.11, 0.06, 0.19, 0.64},
            {0.25, 0.29, 0.21, 0.25},
            {0.11, 0.40, 0.02, 0.47}}),  // (1,1)
      Rows({{0.06, 0.51, 0.20, 0.23},
            {0.48, 0.11, 0.30, 0.11},
            {0.31, 0.39, 0.22, 0.08},
            {0.32, 0.01, 0.24, 0.43}}),  // (1,2)
      Rows({{0.39, 0.17, 0.20, 0.24},
            {0.20, 0.48, 0.05, 0.27},
            {0.09, 0.48, 0.30, 0.13},
            {0.23, 0.07, 0.22, 0.48}}),  // (2,1)
      Rows({{0.22, 0.27, 0.26, 0.25},
            {0.09, 0.35, 0.47, 0.09},
            {0.38, 0.27, 0.22, 0.13},
            {0.23, 0.04, 0.44, 0.29}}),  // (2,2)
  };
  const double g1[2][2] = {{-48, -50}, {-36, 1}};
  const double g2[2][2] = {{31, -100}, {-21, -37}};
  g.agents.push_back(Example1Agent(
      Rows({{0.98, 0.02}, {0.09, 0.91}, {0.79, 0.21}, {0.74, 0.26}}),
      Rows({{0.80, 0.20}, {0.26, 0.74}, {0.84, 0.16}, {0.93, 0.07}}),
      Rows({{0.82, 0.18}, {0.60, 0.40}, {0.24, 0.76}, {0.35, 0.65}}), g1));
  g.agents.push_back(Example1Agent(
      Rows({{0.93, 0.07}, {0.82, 0.18}, {0.64, 0.36}, {0.11, 0.89}}),
      Rows({{0.34, 0.66}, {0.62, 0.38}, {0.64, 0.36}, {0.62, 0.38}}),
      Rows({{0.17, 0.83}, {0.61, 0.39}, {0.37, 0.63}, {0.48, 0.52}}), g2));
  return ConvexFamily{std::move(g), 0.9};
}

GameSpec Interpolate(const ConvexFamily& family, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("interpolate: alpha must lie in [0, 1]");
  }
  const GameSpec& base = family.base;
  if (!base.uncoupled_env) {
    throw ConfigurationError("interpolate: family has no uncoupled_env");
  }
  GameSpec out = base;
  for (auto& k : out.env_kernels) k = alpha * k + (1.0 - alpha) * *base.uncoupled_env;
  for (auto& a : out.agents) {
    if (!a.uncoupled_local) {
      throw ConfigurationError("interpolate: agent has no uncoupled_local");
    }
    for (auto& k : a.local_kernels) k = alpha * k + (1.0 - alpha) * *a.uncoupled_local;
  }
  return out;
}

GameSpec UncoupledReference(const GameSpec& spec) {
  if (!spec.uncoupled_env) {
    throw ConfigurationError("uncoupled reference kernels required: uncoupled_env missing");
  }
  GameSpec out = spec;
  for (auto& k : out.env_kernels) k = *spec.uncoupled_env;
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    auto& a = out.agents[i];
    if (!a.uncoupled_local) {
      throw ConfigurationError(
          "uncoupled reference kernels required: agents[" + std::to_string(i) +
          "].uncoupled_local missing");
    }
    for (auto& k : a.local_kernels) k = *a.uncoupled_local;
  }
  return out;
}

Matrix AverageEnvKernel(const GameSpec& spec) {
  Matrix avg = Matrix::Zero(spec.n_env, spec.n_env);
  for (const auto& k : spec.env_kernels) avg += k;
  return avg / static_cast<double>(spec.env_kernels.size());
}

Matrix AverageLocalKernel(const AgentSpec& agent) {
  Matrix avg = Matrix::Zero(agent.n_states * agent.n_signals, agent.n_states);
  for (const auto& k : agent.local_kernels) avg += k;
  return avg / static_cast<double>(agent.local_kernels.size());
}

bool FillFallbackReferences(GameSpec& spec) {
  bool filled = false;
  if (!spec.uncoupled_env) {
    spec.uncoupled_env = AverageEnvKernel(spec);
    filled = true;
  }
  for (auto& a : spec.agents) {
    if (!a.uncoupled_local) {
      a.uncoupled_local = AverageLocalKernel(a);
      filled = true;
    }
  }
  return filled;
}

}  // namespace eee
