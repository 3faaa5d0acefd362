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

#ifndef EEE_GAME_MODEL_HPP_
#define EEE_GAME_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eee/common.hpp"

namespace eee {

// One agent of a finite weakly-coupled stochastic game.
//
// Local kernels are (|X|*|S|) x |X| matrices whose row (x, s) sits at index
// x * |S| + s. The memory rule maps (z, s) to the next memory state and the
// reward is g(x, a, s). All indices are 0-based.
struct AgentSpec {
  int n_states = 0;
  int n_actions = 0;
  int n_signals = 0;
  int n_memory = 0;
  Matrix signal_kernel;               // |W| x |S|
  std::vector<Matrix> local_kernels;  // one per action
  std::optional<Matrix> uncoupled_local;
  std::vector<int> memory_rule;  // |Z| x |S|, row-major
  std::vector<double> reward;    // |X| x |A| x |S|, row-major
  double discount = 0.5;
  double temperature = 1.0;

  int local_row(int x, int s) const { return x * n_signals + s; }
  int next_memory(int z, int s) const { return memory_rule[z * n_signals + s]; }
  double reward_at(int x, int a, int s) const {
    return reward[(static_cast<std::size_t>(x) * n_actions + a) * n_signals + s];
  }
  // Number of local situations (z, x); index z * |X| + x.
  int n_situations() const { return n_memory * n_states; }
  // G_i = max |g_i|.
  double reward_bound() const;
};

// The true dynamics N: environment kernels Phi(a) for every joint action a
// (lexicographic order, agent 0 most significant) and the agents.
struct GameSpec {
  int n_env = 0;
  std::vector<Matrix> env_kernels;
  std::optional<Matrix> uncoupled_env;
  std::vector<AgentSpec> agents;

  int n_agents() const { return static_cast<int>(agents.size()); }
  std::size_t n_joint_actions() const;
  std::size_t n_joint_states() const;
};

// A game whose kernels are alpha * coupled + (1 - alpha) * uncoupled. `base`
// carries the coupled kernels together with the uncoupled references.
struct ConvexFamily {
  GameSpec base;
  double alpha = 1.0;
};

// Flattening of joint states psi = (w, z_1..z_n, x_1..x_n) and joint actions
// (a_1..a_n); row-major with the leftmost coordinate most significant.
class JointIndexer {
 public:
  JointIndexer() = default;
  explicit JointIndexer(const GameSpec& spec);

  struct JointState {
    int w = 0;
    std::vector<int> z;
    std::vector<int> x;
    bool operator==(const JointState&) const = default;
  };

  int n_agents() const { return static_cast<int>(memory_dims_.size()); }
  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  std::size_t Flatten(const JointState& psi) const;
  JointState Unflatten(std::size_t index) const;

  std::size_t FlattenAction(const std::vector<int>& actions) const;
  std::vector<int> UnflattenAction(std::size_t index) const;

  // Dimension list (|W|, |Z_1|..|Z_n|, |X_1|..|X_n|).
  std::vector<int> dims() const;

 private:
  int n_env_ = 0;
  std::vector<int> memory_dims_;
  std::vector<int> state_dims_;
  std::vector<int> action_dims_;
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
};

struct Violation {
  std::string kernel;  // e.g. "env_kernels[1,2]" or "agents[0].signal_kernel"
  int row = -1;        // 0-based; -1 when the defect is not row-specific
  std::string defect;

  std::string ToString() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every kernel, table and scalar invariant of the game. Violations are
// collected, never thrown.
ValidationReport ValidateSpec(const GameSpec& spec);

// Checks a single kernel with `rows` x `cols` expected shape.
void ValidateKernel(const Matrix& m, int rows, int cols, const std::string& name,
                    std::vector<Violation>& out);

// The two-agent example game with |W| = 4 and binary actions, signals, local
// states and last-signal memory; alpha defaults to 0.9.
ConvexFamily BuildExample1();

// Phi(a) = alpha Phi_C(a) + (1 - alpha) Phi_U and the same for each local
// kernel. Uncoupled references are kept on the result. Throws DomainError for
// alpha outside [0, 1] and ConfigurationError if references are missing.
GameSpec Interpolate(const ConvexFamily& family, double alpha);

// The action-independent reference game: every Phi(a) replaced by Phi_U and
// every phi_i(a_i) by phi_{U,i}. Throws ConfigurationError if absent.
GameSpec UncoupledReference(const GameSpec& spec);

// Action-averaged reference kernels used when Phi_U / phi_U are not supplied.
Matrix AverageEnvKernel(const GameSpec& spec);
Matrix AverageLocalKernel(const AgentSpec& agent);

// Fills absent references with the action averages. Returns true if any
// reference was synthesized.
bool FillFallbackReferences(GameSpec& spec);

}  // namespace eee

#endif  // EEE_GAME_MODEL_HPP_
