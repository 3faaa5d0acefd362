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

#ifndef EEE_PROFILES_HPP_
#define EEE_PROFILES_HPP_

#include <vector>

#include "eee/common.hpp"
#include "eee/game_model.hpp"

namespace eee {

// sigma_i(z, x)[a] per agent, each table |Z_i| x |X_i| x |A_i|.
struct Strategy {
  std::vector<Table3> agents;
  bool operator==(const Strategy&) const = default;
};

// Q_i(z, x, a) per agent, each table |Z_i| x |X_i| x |A_i|.
struct QTable {
  std::vector<Table3> agents;
  bool operator==(const QTable&) const = default;
};

// mu_i(z, x)[s] per agent, each table |Z_i| x |X_i| x |S_i|.
struct ConsistentModel {
  std::vector<Table3> agents;
  bool operator==(const ConsistentModel&) const = default;
};

Strategy UniformStrategy(const GameSpec& spec);

// actions[i][z * |X_i| + x] is agent i's action at (z, x).
Strategy DeterministicStrategy(const GameSpec& spec,
                               const std::vector<std::vector<int>>& actions);

// Every agent plays `action` everywhere.
Strategy ConstantStrategy(const GameSpec& spec, const std::vector<int>& action);

QTable ZeroQ(const GameSpec& spec);

// Throws StructuralError if shapes disagree with the game.
void CheckShape(const GameSpec& spec, const Strategy& sigma);
void CheckShape(const GameSpec& spec, const QTable& q);
void CheckShape(const GameSpec& spec, const ConsistentModel& mu);

bool IsDeterministic(const Strategy& sigma);

// Action index carrying mass 1 at (z, x); requires a deterministic strategy.
int ChosenAction(const Table3& sigma_i, int z, int x);

// Max-metric over agents, situations and last-axis entries.
double MaxMetric(const std::vector<Table3>& a, const std::vector<Table3>& b);
inline double MaxMetric(const Strategy& a, const Strategy& b) {
  return MaxMetric(a.agents, b.agents);
}
inline double MaxMetric(const QTable& a, const QTable& b) {
  return MaxMetric(a.agents, b.agents);
}
inline double MaxMetric(const ConsistentModel& a, const ConsistentModel& b) {
  return MaxMetric(a.agents, b.agents);
}

// Per-agent sup-norm of a table list.
double SupNorm(const Table3& t);

}  // namespace eee

#endif  // EEE_PROFILES_HPP_
