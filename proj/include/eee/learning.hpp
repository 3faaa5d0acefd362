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

#ifndef EEE_LEARNING_HPP_
#define EEE_LEARNING_HPP_

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eee/common.hpp"
#include "eee/game_model.hpp"
#include "eee/profiles.hpp"

namespace eee {

enum class PolicyKind { kGreedy, kSoftmax };

struct PolicyRule {
  PolicyKind kind = PolicyKind::kGreedy;
  std::vector<double> temperatures;  // softmax only, one per agent

  static PolicyRule Greedy() { return {}; }
  static PolicyRule Softmax(std::vector<double> tau) {
    return {PolicyKind::kSoftmax, std::move(tau)};
  }
};

std::string ToString(PolicyKind kind);

// Mass 1 on argmax_a Q_i(z, x, a); ties go to the lowest action index.
Strategy GreedyPolicy(const QTable& q);

// exp(Q / tau) normalized per situation, with max-subtraction.
Strategy SoftmaxPolicy(const QTable& q, const std::vector<double>& tau);

Strategy ApplyPolicy(const QTable& q, const PolicyRule& rule);

// Q'_i(z,x,a) = sum_s mu_i(z,x)[s] [g_i(x,a,s)
//               + delta_i sum_{x+} phi_i(x,s,a)[x+] V_i(l_i(z,s), x+)]
// with V_i(z, x) = max_a Q_i(z, x, a).
QTable BellmanUpdate(const QTable& q, const ConsistentModel& mu, const GameSpec& spec);

// Iterates BellmanUpdate with mu frozen until the step is below `tol`.
QTable BellmanFixedPoint(const GameSpec& spec, const ConsistentModel& mu,
                         double tol = 1e-12, long max_iter = 10'000'000);

struct IterationRecord {
  long iter = 0;
  QTable q;
  Strategy sigma;  // policy of q
  ConsistentModel mu;  // consistent model of sigma
  std::optional<double> step_dq;  // ||Q(t+1) - Q(t)||, absent on the final record
  double step_dsigma = 0.0;       // ||sigma(t) - sigma(t-1)||, 0 at t = 0
};

struct IterationTrace {
  PolicyRule rule;
  std::vector<IterationRecord> records;
};

enum class Outcome { kConverged, kCycle, kMaxIterReached };

std::string ToString(Outcome outcome);

struct CycleInfo {
  long first_seen = 0;
  long period = 0;
  std::vector<int> agents;  // 0-based agents whose policy moves in the cycle
};

struct TerminationReport {
  Outcome outcome = Outcome::kMaxIterReached;
  long at_iter = 0;  // iterations performed when the run stopped
  std::optional<CycleInfo> cycle;
  double residual = 0.0;  // last ||Q(t+1) - Q(t)||
};

struct IterationOptions {
  double tol = 1e-9;
  long max_iter = 10'000;
  double cycle_tol = 1e-9;                 // softmax Q-recurrence tolerance
  long full_retention = 10'000;            // keep every record up to here
  long thinning = 10;                      // then keep 1 in `thinning`
  std::size_t softmax_cycle_window = 4096; // Q history kept for recurrence checks
};

struct IterationResult {
  IterationTrace trace;
  TerminationReport report;
  QTable final_q;
  Strategy final_sigma;
  ConsistentModel final_mu;
};

// Thrown when the consistent-model step fails inside the loop.
class IterationError : public ChainError {
 public:
  IterationError(const ChainError& cause, long iter);
  long iter() const { return iter_; }

 private:
  long iter_;
};

// Incremental recurrence detector shared by the iteration loop and
// DetectCycle. Greedy runs compare exact policies; softmax runs compare Q.
class CycleDetector {
 public:
  CycleDetector(PolicyKind kind, double tol, std::size_t window = 4096);

  // Softmax recurrences must satisfy gap <= this * step as well as gap < tol.
  static constexpr double kRecurrenceDominance = 1e-3;

  // Feed iterate t; `step_dq` is ||Q(t) - Q(t-1)|| (ignored for t = 0).
  std::optional<CycleInfo> Observe(long t, const QTable& q, const Strategy& sigma,
                                   double step_dq);

 private:
  std::vector<int> MovingAgents(long from) const;

  PolicyKind kind_;
  double tol_;
  std::size_t window_;
  // Greedy: last iteration each policy was held.
  std::map<std::vector<double>, long> last_held_;
  std::vector<std::vector<double>> policy_fingerprints_;
  std::deque<std::pair<long, QTable>> q_history_;
  std::deque<std::pair<long, Strategy>> sigma_history_;
  std::optional<std::vector<double>> previous_;
};

// Runs the three-step dynamics: policy update, consistent model under the
// true dynamics, Q-update.
IterationResult RunQValueIteration(const GameSpec& spec, const PolicyRule& rule,
                                   const QTable& q0, const IterationOptions& options = {});

std::optional<CycleInfo> DetectCycle(const IterationTrace& trace, double tol = 1e-9);

// xi_i = min_{z,x} (Q_i(z,x,sigma_i(z,x)) - max_{a != sigma_i(z,x)} Q_i(z,x,a)).
// Throws DomainError for a stochastic strategy. Single-action agents have an
// infinite margin.
std::vector<double> Margin(const QTable& q, const Strategy& sigma);

struct EeeReport {
  bool optimality_ok = false;
  bool consistency_ok = false;
  double optimality_residual = 0.0;  // greedy regret or softmax distance
  double consistency_residual = 0.0; // ||mu - consistent_model(sigma)||
  std::vector<double> margins;       // greedy verification only
  QTable q_fixed;
  ConsistentModel consistent;
  bool ok() const { return optimality_ok && consistency_ok; }
};

EeeReport VerifyEee(const GameSpec& spec, const Strategy& sigma, const ConsistentModel& mu,
                    double tol);

EeeReport VerifyApproxEee(const GameSpec& spec, const Strategy& sigma,
                          const ConsistentModel& mu, const std::vector<double>& tau,
                          double tol);

}  // namespace eee

#endif  // EEE_LEARNING_HPP_
