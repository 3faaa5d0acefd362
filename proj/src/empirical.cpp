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

#include "eee/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eee {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  int UniformIndex(int n) {
    return std::min(n - 1, static_cast<int>(Uniform() * n));
  }

  template <typename Row>
  int Categorical(const Row& probs, int n) {
    const double u = Uniform();
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += probs(k);
      if (u < acc) return k;
    }
    // Round-off tail: last index with positive mass.
    for (int k = n - 1; k >= 0; --k) {
      if (probs(k) > 0.0) return k;
    }
    return n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

Trajectory Simulate(const GameSpec& spec, const Strategy& sigma, long horizon,
                    std::uint64_t seed, long burn_in) {
  CheckShape(spec, sigma);
  if (burn_in < 0 || horizon < burn_in) {
    throw DomainError("simulate: require 0 <= burn_in <= horizon");
  }
  const int n = spec.n_agents();
  const JointIndexer ix(spec);
  Trajectory tr;
  tr.seed = seed;
  tr.horizon = horizon;
  tr.burn_in = burn_in;
  for (const auto& a : spec.agents) {
    tr.counts.push_back({std::vector<long>(a.n_situations(), 0),
                         std::vector<long>(static_cast<std::size_t>(a.n_situations()) *
                                               a.n_signals,
                                           0)});
    tr.n_memory.push_back(a.n_memory);
    tr.n_states.push_back(a.n_states);
    tr.n_signals.push_back(a.n_signals);
  }
  const bool record = horizon <= kMaxRecordedHorizon;

  Sampler rng(seed);
  int w = rng.UniformIndex(spec.n_env);
  std::vector<int> z(n), x(n), act(n), sig(n);
  for (int i = 0; i < n; ++i) z[i] = rng.UniformIndex(spec.agents[i].n_memory);
  for (int i = 0; i < n; ++i) x[i] = rng.UniformIndex(spec.agents[i].n_states);

  for (long t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      const auto p = sigma.agents[i].slice(z[i], x[i]);
      act[i] = rng.Categorical([&](int k) { return p[k]; }, spec.agents[i].n_actions);
    }
    for (int i = 0; i < n; ++i) {
      const auto& a = spec.agents[i];
      sig[i] = rng.Categorical(a.signal_kernel.row(w), a.n_signals);
    }
    if (record) tr.steps.push_back({w, z, x, act, sig});
    if (t >= burn_in) {
      for (int i = 0; i < n; ++i) {
        const auto& a = spec.agents[i];
        const int situation = z[i] * a.n_states + x[i];
        ++tr.counts[i].visits[situation];
        ++tr.counts[i].signal_counts[static_cast<std::size_t>(situation) * a.n_signals +
                                     sig[i]];
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& a = spec.agents[i];
      const int row = a.local_row(x[i], sig[i]);
      z[i] = a.next_memory(z[i], sig[i]);
      x[i] = rng.Categorical(a.local_kernels[act[i]].row(row), a.n_states);
    }
    w = rng.Categorical(spec.env_kernels[ix.FlattenAction(act)].row(w), spec.n_env);
  }
  return tr;
}

EmpiricalModel EstimateModel(const Trajectory& trajectory) {
  EmpiricalModel m;
  for (std::size_t i = 0; i < trajectory.counts.size(); ++i) {
    const int nz = trajectory.n_memory[i];
    const int nx = trajectory.n_states[i];
    const int ns = trajectory.n_signals[i];
    Table3 freq(nz, nx, ns, 0.0), se(nz, nx, ns, 0.0), visits(nz, nx, 1, 0.0);
    std::vector<bool> defined(static_cast<std::size_t>(nz) * nx, false);
    const auto& c = trajectory.counts[i];
    for (int z = 0; z < nz; ++z) {
      for (int x = 0; x < nx; ++x) {
        const int situation = z * nx + x;
        const long v = c.visits[situation];
        visits(z, x, 0) = static_cast<double>(v);
        if (v == 0) continue;
        defined[situation] = true;
        for (int s = 0; s < ns; ++s) {
          const double f =
              static_cast<double>(c.signal_counts[static_cast<std::size_t>(situation) * ns + s]) /
              static_cast<double>(v);
          freq(z, x, s) = f;
          se(z, x, s) = std::sqrt(f * (1.0 - f) / static_cast<double>(v));
        }
      }
    }
    m.frequency.push_back(std::move(freq));
    m.stderr_.push_back(std::move(se));
    m.visits.push_back(std::move(visits));
    m.defined.push_back(std::move(defined));
  }
  return m;
}

ModelComparison CompareModels(const EmpiricalModel& empirical, const ConsistentModel& exact) {
  if (empirical.frequency.size() != exact.agents.size()) {
    throw StructuralError("compare_models: agent count mismatch");
  }
  ModelComparison out;
  for (std::size_t i = 0; i < exact.agents.size(); ++i) {
    const auto& f = empirical.frequency[i];
    const auto& mu = exact.agents[i];
    if (!f.SameShape(mu)) throw StructuralError("compare_models: shape mismatch");
    for (int z = 0; z < mu.dim0(); ++z) {
      for (int x = 0; x < mu.dim1(); ++x) {
        if (!empirical.defined[i][static_cast<std::size_t>(z) * mu.dim1() + x]) {
          ++out.undefined_situations;
          continue;
        }
        const double visits = empirical.visits[i](z, x, 0);
        for (int s = 0; s < mu.dim2(); ++s) {
          CellComparison c{static_cast<int>(i), z, x, s, f(z, x, s), mu(z, x, s),
                           empirical.stderr_[i](z, x, s), 0.0};
          const double gap = c.empirical - c.exact;
          // A degenerate empirical frequency has zero spread; use the exact
          // model's binomial spread instead.
          double se = c.stderr_;
          if (se == 0.0) se = std::sqrt(c.exact * (1.0 - c.exact) / visits);
          if (gap != 0.0) {
            c.z_score = se > 0.0 ? gap / se : std::copysign(INFINITY, gap);
          }
          out.max_abs_gap = std::max(out.max_abs_gap, std::abs(gap));
          out.max_abs_z = std::max(out.max_abs_z, std::abs(c.z_score));
          out.cells.push_back(c);
        }
      }
    }
  }
  return out;
}

}  // namespace eee
