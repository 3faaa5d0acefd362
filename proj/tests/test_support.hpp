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

#ifndef EEE_TESTS_TEST_SUPPORT_HPP_
#define EEE_TESTS_TEST_SUPPORT_HPP_

// Random game generators and brute-force oracles used only by tests. The
// oracles enumerate joint outcomes directly and share no code with the
// library's chain construction.

#include <map>
#include <random>
#include <set>
#include <vector>

#include "eee/game_model.hpp"
#include "eee/profiles.hpp"

namespace eee::testing {

inline Matrix RandomStochastic(std::mt19937_64& rng, int rows, int cols, double floor = 0.05) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
    m.row(r) /= m.row(r).sum();
  }
  return m;
}

// Every memory state reaches every other through the rule.
inline bool MemoryIrreducible(const AgentSpec& a) {
  for (int start = 0; start < a.n_memory; ++start) {
    std::set<int> seen{start};
    std::vector<int> stack{start};
    while (!stack.empty()) {
      const int z = stack.back();
      stack.pop_back();
      for (int s = 0; s < a.n_signals; ++s) {
        const int next = a.memory_rule[z * a.n_signals + s];
        if (seen.insert(next).second) stack.push_back(next);
      }
    }
    if (static_cast<int>(seen.size()) != a.n_memory) return false;
  }
  return true;
}

struct RandomGameOptions {
  int n_agents = 2;
  int max_dim = 3;
  double coupling = 0.3;  // weight of the action-dependent part
  bool supply_references = true;
};

// A game with strictly positive kernels, a memory rule that reaches every
// memory state, and kernels alpha * random + (1 - alpha) * reference.
inline GameSpec RandomGame(std::mt19937_64& rng, const RandomGameOptions& opt = {}) {
  std::uniform_int_distribution<int> dim(1, opt.max_dim);
  std::uniform_int_distribution<int> dim2(2, std::max(2, opt.max_dim));
  std::uniform_real_distribution<double> reward(-10.0, 10.0);
  std::uniform_real_distribution<double> discount(0.3, 0.9);
  GameSpec g;
  g.n_env = dim(rng);
  for (int i = 0; i < opt.n_agents; ++i) {
    AgentSpec a;
    a.n_states = dim(rng);
    a.n_actions = dim2(rng);
    a.n_signals = dim2(rng);
    a.n_memory = dim(rng);
    a.signal_kernel = RandomStochastic(rng, g.n_env, a.n_signals);
    const Matrix ref = RandomStochastic(rng, a.n_states * a.n_signals, a.n_states);
    for (int k = 0; k < a.n_actions; ++k) {
      a.local_kernels.push_back(opt.coupling *
                                    RandomStochastic(rng, a.n_states * a.n_signals, a.n_states) +
                                (1.0 - opt.coupling) * ref);
    }
    if (opt.supply_references) a.uncoupled_local = ref;
    // Memory rule: the graph z -> l(z, s) is strongly connected, so every
    // memory state keeps positive stationary mass.
    while (true) {
      std::uniform_int_distribution<int> zd(0, a.n_memory - 1);
      a.memory_rule.assign(a.n_memory * a.n_signals, 0);
      for (auto& v : a.memory_rule) v = zd(rng);
      if (MemoryIrreducible(a)) break;
    }
    for (int k = 0; k < a.n_states * a.n_actions * a.n_signals; ++k) {
      a.reward.push_back(reward(rng));
    }
    a.discount = discount(rng);
    a.temperature = 1.0;
    g.agents.push_back(std::move(a));
  }
  const Matrix env_ref = RandomStochastic(rng, g.n_env, g.n_env);
  const std::size_t n_joint = g.n_joint_actions();
  for (std::size_t k = 0; k < n_joint; ++k) {
    g.env_kernels.push_back(opt.coupling * RandomStochastic(rng, g.n_env, g.n_env) +
                            (1.0 - opt.coupling) * env_ref);
  }
  if (opt.supply_references) g.uncoupled_env = env_ref;
  return g;
}

inline Strategy RandomDeterministicStrategy(std::mt19937_64& rng, const GameSpec& g) {
  std::vector<std::vector<int>> acts;
  for (const auto& a : g.agents) {
    std::uniform_int_distribution<int> d(0, a.n_actions - 1);
    std::vector<int> row(a.n_situations());
    for (auto& v : row) v = d(rng);
    acts.push_back(std::move(row));
  }
  return DeterministicStrategy(g, acts);
}

inline Strategy RandomMixedStrategy(std::mt19937_64& rng, const GameSpec& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Strategy s = UniformStrategy(g);
  for (auto& t : s.agents) {
    for (int z = 0; z < t.dim0(); ++z) {
      for (int x = 0; x < t.dim1(); ++x) {
        auto row = t.slice(z, x);
        double total = 0.0;
        for (double& p : row) total += (p = u(rng));
        for (double& p : row) p /= total;
      }
    }
  }
  return s;
}

// Enumerates every (a, s, w+, x+) outcome from joint state psi and
// accumulates its probability on the resulting joint state.
inline std::map<JointIndexer::JointState, double, bool (*)(const JointIndexer::JointState&,
                                                            const JointIndexer::JointState&)>
BruteForceRow(const GameSpec& g, const Strategy& sigma, const JointIndexer::JointState& psi) {
  auto less = +[](const JointIndexer::JointState& a, const JointIndexer::JointState& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.z != b.z) return a.z < b.z;
    return a.x < b.x;
  };
  std::map<JointIndexer::JointState, double, bool (*)(const JointIndexer::JointState&,
                                                      const JointIndexer::JointState&)>
      out(less);
  const int n = g.n_agents();
  // Mixed-radix enumeration of (a_1..a_n, s_1..s_n, x+_1..x+_n, w+).
  std::vector<int> radix;
  for (const auto& a : g.agents) radix.push_back(a.n_actions);
  for (const auto& a : g.agents) radix.push_back(a.n_signals);
  for (const auto& a : g.agents) radix.push_back(a.n_states);
  radix.push_back(g.n_env);
  std::vector<int> digit(radix.size(), 0);
  while (true) {
    std::vector<int> act(digit.begin(), digit.begin() + n);
    std::vector<int> sig(digit.begin() + n, digit.begin() + 2 * n);
    std::vector<int> xn(digit.begin() + 2 * n, digit.begin() + 3 * n);
    const int wn = digit.back();
    // Joint action index, agent 0 most significant.
    std::size_t ja = 0;
    for (int i = 0; i < n; ++i) ja = ja * g.agents[i].n_actions + act[i];
    double p = g.env_kernels[ja](psi.w, wn);
    JointIndexer::JointState next{wn, std::vector<int>(n), xn};
    for (int i = 0; i < n; ++i) {
      const auto& a = g.agents[i];
      p *= sigma.agents[i](psi.z[i], psi.x[i], act[i]);
      p *= a.signal_kernel(psi.w, sig[i]);
      p *= a.local_kernels[act[i]](psi.x[i] * a.n_signals + sig[i], xn[i]);
      next.z[i] = a.memory_rule[psi.z[i] * a.n_signals + sig[i]];
    }
    if (p != 0.0) out[next] += p;
    std::size_t k = digit.size();
    while (k > 0) {
      --k;
      if (++digit[k] < radix[k]) break;
      digit[k] = 0;
      if (k == 0) return out;
    }
  }
}

// Stationary distribution by repeated squaring of T (independent of the
// library solvers). Converges for aperiodic irreducible chains.
inline Vector StationaryBySquaring(const Matrix& t, int squarings = 60) {
  Matrix p = t;
  for (int k = 0; k < squarings; ++k) p = p * p;
  Vector pi = p.row(0).transpose();
  return pi / pi.sum();
}

}  // namespace eee::testing

#endif  // EEE_TESTS_TEST_SUPPORT_HPP_
