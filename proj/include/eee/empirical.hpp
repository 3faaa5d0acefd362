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

#ifndef EEE_EMPIRICAL_HPP_
#define EEE_EMPIRICAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "eee/common.hpp"
#include "eee/game_model.hpp"
#include "eee/profiles.hpp"

namespace eee {

// Generator identifier written into trajectory headers: 64-bit Mersenne
// Twister seeded directly, uniforms from the top 53 bits, inverse-CDF
// categorical draws over stored row order.
inline constexpr const char* kRngAlgorithm = "mt19937_64/u53/inverse-cdf";

// Full per-step records are kept up to this horizon.
inline constexpr long kMaxRecordedHorizon = 100'000;

struct StepRecord {
  int w = 0;
  std::vector<int> z;
  std::vector<int> x;
  std::vector<int> a;
  std::vector<int> s;
};

struct AgentCounts {
  std::vector<long> visits;         // |Z| x |X|
  std::vector<long> signal_counts;  // |Z| x |X| x |S|
};

struct Trajectory {
  std::uint64_t seed = 0;
  long horizon = 0;
  long burn_in = 0;
  std::vector<StepRecord> steps;  // empty when horizon > kMaxRecordedHorizon
  std::vector<AgentCounts> counts;
  // Shapes copied from the game so the model can be rebuilt from counts.
  std::vector<int> n_memory, n_states, n_signals;
};

struct EmpiricalModel {
  std::vector<Table3> frequency;  // mu-hat_i(z, x)[s]
  std::vector<Table3> stderr_;    // sqrt(mu-hat (1 - mu-hat) / visits)
  std::vector<Table3> visits;     // |Z| x |X| x 1
  std::vector<std::vector<bool>> defined;  // per agent, z * |X| + x
};

// Steps t = 0 .. horizon - 1 from a uniform initial joint state; counts cover
// t >= burn_in. Per step: a_i ~ sigma_i(z_i, x_i), s_i ~ M_i(w),
// z_i+ = l_i(z_i, s_i), x_i+ ~ phi_i(x_i, s_i, a_i), w+ ~ Phi(w, a).
Trajectory Simulate(const GameSpec& spec, const Strategy& sigma, long horizon,
                    std::uint64_t seed, long burn_in = 1000);

EmpiricalModel EstimateModel(const Trajectory& trajectory);

struct CellComparison {
  int agent = 0, z = 0, x = 0, s = 0;
  double empirical = 0.0;
  double exact = 0.0;
  double stderr_ = 0.0;
  double z_score = 0.0;
};

struct ModelComparison {
  double max_abs_gap = 0.0;
  double max_abs_z = 0.0;
  std::vector<CellComparison> cells;  // defined cells only
  int undefined_situations = 0;
};

ModelComparison CompareModels(const EmpiricalModel& empirical, const ConsistentModel& exact);

}  // namespace eee

#endif  // EEE_EMPIRICAL_HPP_
