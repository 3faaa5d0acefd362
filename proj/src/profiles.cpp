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

#include "eee/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eee {

Strategy UniformStrategy(const GameSpec& spec) {
  Strategy s;
  for (const auto& a : spec.agents) {
    s.agents.emplace_back(a.n_memory, a.n_states, a.n_actions, 1.0 / a.n_actions);
  }
  return s;
}

Strategy DeterministicStrategy(const GameSpec& spec,
                               const std::vector<std::vector<int>>& actions) {
  if (actions.size() != spec.agents.size()) {
    throw StructuralError("DeterministicStrategy: agent count mismatch");
  }
  Strategy s;
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    const auto& a = spec.agents[i];
    if (static_cast<int>(actions[i].size()) != a.n_situations()) {
      throw StructuralError("DeterministicStrategy: situation count mismatch");
    }
    Table3 t(a.n_memory, a.n_states, a.n_actions, 0.0);
    for (int z = 0; z < a.n_memory; ++z) {
      for (int x = 0; x < a.n_states; ++x) {
        const int act = actions[i][z * a.n_states + x];
        if (act < 0 || act >= a.n_actions) {
          throw StructuralError("DeterministicStrategy: action out of range");
        }
        t(z, x, act) = 1.0;
      }
    }
    s.agents.push_back(std::move(t));
  }
  return s;
}

Strategy ConstantStrategy(const GameSpec& spec, const std::vector<int>& action) {
  std::vector<std::vector<int>> actions;
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    actions.emplace_back(spec.agents[i].n_situations(), action.at(i));
  }
  return DeterministicStrategy(spec, actions);
}

QTable ZeroQ(const GameSpec& spec) {
  QTable q;
  for (const auto& a : spec.agents) {
    q.agents.emplace_back(a.n_memory, a.n_states, a.n_actions, 0.0);
  }
  return q;
}

namespace {

void CheckTables(const GameSpec& spec, const std::vector<Table3>& tables,
                 bool last_is_signal, const char* what) {
  if (tables.size() != spec.agents.size()) {
    throw StructuralError(std::string(what) + ": agent count mismatch");
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& a = spec.agents[i];
    const int last = last_is_signal ? a.n_signals : a.n_actions;
    if (tables[i].dim0() != a.n_memory || tables[i].dim1() != a.n_states ||
        tables[i].dim2() != last) {
      throw StructuralError(std::string(what) + ": shape mismatch for agent " +
                            std::to_string(i + 1));
    }
  }
}

}  // namespace

void CheckShape(const GameSpec& spec, const Strategy& sigma) {
  CheckTables(spec, sigma.agents, false, "strategy");
}
void CheckShape(const GameSpec& spec, const QTable& q) {
  CheckTables(spec, q.agents, false, "Q table");
}
void CheckShape(const GameSpec& spec, const ConsistentModel& mu) {
  CheckTables(spec, mu.agents, true, "model");
}

bool IsDeterministic(const Strategy& sigma) {
  for (const auto& t : sigma.agents) {
    for (int z = 0; z < t.dim0(); ++z) {
      for (int x = 0; x < t.dim1(); ++x) {
        int ones = 0;
        for (double p : t.slice(z, x)) {
          if (p == 1.0) {
            ++ones;
          } else if (p != 0.0) {
            return false;
          }
        }
        if (ones != 1) return false;
      }
    }
  }
  return true;
}

int ChosenAction(const Table3& sigma_i, int z, int x) {
  const auto row = sigma_i.slice(z, x);
  const auto it = std::max_element(row.begin(), row.end());
  return static_cast<int>(it - row.begin());
}

double MaxMetric(const std::vector<Table3>& a, const std::vector<Table3>& b) {
  if (a.size() != b.size()) throw StructuralError("max-metric: agent count mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, MaxAbsDiff(a[i], b[i]));
  return d;
}

double SupNorm(const Table3& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace eee
