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

#include "eee/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eee/chain_analysis.hpp"

namespace eee {

std::string ToString(PolicyKind kind) {
  return kind == PolicyKind::kGreedy ? "greedy" : "softmax";
}

std::string ToString(Outcome outcome) {
  switch (outcome) {
    case Outcome::kConverged:
      return "converged";
    case Outcome::kCycle:
      return "cycle";
    case Outcome::kMaxIterReached:
      return "max_iter_reached";
  }
  return "unknown";
}

Strategy GreedyPolicy(const QTable& q) {
  Strategy s;
  for (const auto& qi : q.agents) {
    Table3 t(qi.dim0(), qi.dim1(), qi.dim2(), 0.0);
    for (int z = 0; z < qi.dim0(); ++z) {
      for (int x = 0; x < qi.dim1(); ++x) {
        const auto row = qi.slice(z, x);
        // max_element returns the first maximum, i.e. the lowest index.
        const auto best = std::max_element(row.begin(), row.end());
        t(z, x, static_cast<int>(best - row.begin())) = 1.0;
      }
    }
    s.agents.push_back(std::move(t));
  }
  return s;
}

Strategy SoftmaxPolicy(const QTable& q, const std::vector<double>& tau) {
  if (tau.size() != q.agents.size()) {
    throw StructuralError("softmax: one temperature per agent required");
  }
  Strategy s;
  for (std::size_t i = 0; i < q.agents.size(); ++i) {
    if (!(tau[i] > 0.0)) throw DomainError("softmax: temperature must be > 0");
    const auto& qi = q.agents[i];
    Table3 t(qi.dim0(), qi.dim1(), qi.dim2(), 0.0);
    for (int z = 0; z < qi.dim0(); ++z) {
      for (int x = 0; x < qi.dim1(); ++x) {
        const auto row = qi.slice(z, x);
        const double top = *std::max_element(row.begin(), row.end());
        auto out = t.slice(z, x);
        double total = 0.0;
        for (std::size_t a = 0; a < row.size(); ++a) {
          out[a] = std::exp((row[a] - top) / tau[i]);
          total += out[a];
        }
        for (double& p : out) p /= total;
      }
    }
    s.agents.push_back(std::move(t));
  }
  return s;
}

Strategy ApplyPolicy(const QTable& q, const PolicyRule& rule) {
  return rule.kind == PolicyKind::kGreedy ? GreedyPolicy(q)
                                          : SoftmaxPolicy(q, rule.temperatures);
}

QTable BellmanUpdate(const QTable& q, const ConsistentModel& mu, const GameSpec& spec) {
  CheckShape(spec, q);
  CheckShape(spec, mu);
  QTable out;
  for (int i = 0; i < spec.n_agents(); ++i) {
    const auto& a = spec.agents[i];
    const auto& qi = q.agents[i];
    Matrix v(a.n_memory, a.n_states);
    for (int z = 0; z < a.n_memory; ++z) {
      for (int x = 0; x < a.n_states; ++x) {
        const auto row = qi.slice(z, x);
        v(z, x) = *std::max_element(row.begin(), row.end());
      }
    }
    Table3 next(a.n_memory, a.n_states, a.n_actions, 0.0);
    for (int z = 0; z < a.n_memory; ++z) {
      for (int x = 0; x < a.n_states; ++x) {
        for (int act = 0; act < a.n_actions; ++act) {
          const Matrix& phi = a.local_kernels[act];
          double total = 0.0;
          for (int s = 0; s < a.n_signals; ++s) {
            const double ps = mu.agents[i](z, x, s);
            if (ps == 0.0) continue;
            const int zn = a.next_memory(z, s);
            const int r = a.local_row(x, s);
            double cont = 0.0;
            for (int xn = 0; xn < a.n_states; ++xn) cont += phi(r, xn) * v(zn, xn);
            total += ps * (a.reward_at(x, act, s) + a.discount * cont);
          }
          next(z, x, act) = total;
        }
      }
    }
    out.agents.push_back(std::move(next));
  }
  return out;
}

QTable BellmanFixedPoint(const GameSpec& spec, const ConsistentModel& mu, double tol,
                         long max_iter) {
  QTable q = ZeroQ(spec);
  for (long k = 0; k < max_iter; ++k) {
    QTable next = BellmanUpdate(q, mu, spec);
    const double step = MaxMetric(next, q);
    double scale = 0.0;
    for (const auto& t : next.agents) scale = std::max(scale, SupNorm(t));
    q = std::move(next);
    // Below this floor the step is round-off.
    if (step <= std::max(tol, 16.0 * std::numeric_limits<double>::epsilon() * scale)) {
      return q;
    }
  }
  throw DomainError("Bellman fixed point did not converge within the iteration cap");
}

IterationError::IterationError(const ChainError& cause, long iter)
    : ChainError("iteration " + std::to_string(iter) + ": " + cause.what(),
                 cause.residual()),
      iter_(iter) {}

namespace {

std::vector<double> Fingerprint(const Strategy& sigma) {
  std::vector<double> fp;
  for (const auto& t : sigma.agents) fp.insert(fp.end(), t.data().begin(), t.data().end());
  return fp;
}

}  // namespace

CycleDetector::CycleDetector(PolicyKind kind, double tol, std::size_t window)
    : kind_(kind), tol_(tol), window_(std::max<std::size_t>(window, 4)) {}

std::vector<int> CycleDetector::MovingAgents(long from) const {
  std::vector<int> agents;
  const Strategy* anchor = nullptr;
  for (const auto& [t, s] : sigma_history_) {
    if (t == from) anchor = &s;
  }
  if (anchor == nullptr) return agents;
  for (std::size_t i = 0; i < anchor->agents.size(); ++i) {
    double d = 0.0;
    for (const auto& [t, s] : sigma_history_) {
      if (t >= from) d = std::max(d, MaxAbsDiff(s.agents[i], anchor->agents[i]));
    }
    if (d > 0.0) agents.push_back(static_cast<int>(i));
  }
  return agents;
}

std::optional<CycleInfo> CycleDetector::Observe(long t, const QTable& q,
                                                const Strategy& sigma, double step_dq) {
  sigma_history_.emplace_back(t, sigma);
  if (sigma_history_.size() > window_) sigma_history_.pop_front();

  if (kind_ == PolicyKind::kGreedy) {
    auto fp = Fingerprint(sigma);
    std::optional<CycleInfo> found;
    if (previous_ && fp != *previous_) {
      const auto it = last_held_.find(fp);
      if (it != last_held_.end()) {
        found = CycleInfo{it->second, t - it->second, MovingAgents(it->second)};
      }
    }
    last_held_[fp] = t;
    previous_ = std::move(fp);
    return found;
  }

  q_history_.emplace_back(t, q);
  if (q_history_.size() > window_) q_history_.pop_front();
  if (t < 4 || !(step_dq >= tol_)) return std::nullopt;
  const long n = static_cast<long>(q_history_.size());
  for (long p = 2; p <= t / 2 && p < n; ++p) {
    const auto& [tp, qp] = q_history_[static_cast<std::size_t>(n - 1 - p)];
    // A damped oscillation also returns close to Q(t-p), but its gap stays a
    // fixed fraction of the step. Only a recurrence far tighter than the
    // motion counts.
    const double gap = MaxMetric(q, qp);
    if (gap < tol_ && gap <= kRecurrenceDominance * step_dq) {
      return CycleInfo{tp, p, MovingAgents(tp)};
    }
  }
  return std::nullopt;
}

IterationResult RunQValueIteration(const GameSpec& spec, const PolicyRule& rule,
                                   const QTable& q0, const IterationOptions& options) {
  CheckShape(spec, q0);
  if (!(options.tol > 0.0)) throw DomainError("tolerance must be > 0");
  if (options.max_iter < 1) throw DomainError("max_iter must be >= 1");
  if (rule.kind == PolicyKind::kSoftmax) {
    if (rule.temperatures.size() != spec.agents.size()) {
      throw StructuralError("softmax rule needs one temperature per agent");
    }
    for (double tau : rule.temperatures) {
      if (!(tau > 0.0)) throw DomainError("softmax: temperature must be > 0");
    }
  }

  IterationResult result;
  result.trace.rule = rule;
  CycleDetector detector(rule.kind, options.cycle_tol, options.softmax_cycle_window);

  auto consistent = [&](const Strategy& sigma, long t) {
    try {
      return ComputeConsistentModel(spec, sigma);
    } catch (const ChainError& e) {
      throw IterationError(e, t);
    }
  };
  auto keep = [&](long t) {
    return t < options.full_retention ||
           (options.thinning > 0 && t % options.thinning == 0);
  };

  QTable q = q0;
  Strategy prev_sigma;
  double prev_dq = std::numeric_limits<double>::infinity();
  bool stopped = false;
  for (long t = 0; t < options.max_iter; ++t) {
    Strategy sigma = ApplyPolicy(q, rule);
    ConsistentModel mu = consistent(sigma, t);
    const double dsigma = t > 0 ? MaxMetric(sigma, prev_sigma) : 0.0;

    if (auto cycle = detector.Observe(t, q, sigma, prev_dq)) {
      result.report = {Outcome::kCycle, t, std::move(cycle), prev_dq};
      result.trace.records.push_back({t, q, sigma, mu, std::nullopt, dsigma});
      result.final_q = std::move(q);
      result.final_sigma = std::move(sigma);
      result.final_mu = std::move(mu);
      return result;
    }

    QTable next = BellmanUpdate(q, mu, spec);
    const double dq = MaxMetric(next, q);
    bool converged = dq < options.tol;
    if (converged && rule.kind == PolicyKind::kGreedy) {
      converged = t >= 1 && sigma == prev_sigma && GreedyPolicy(next) == sigma;
    }
    if (keep(t)) result.trace.records.push_back({t, q, sigma, mu, dq, dsigma});
    prev_sigma = std::move(sigma);
    q = std::move(next);
    prev_dq = dq;
    if (converged) {
      result.report = {Outcome::kConverged, t + 1, std::nullopt, dq};
      stopped = true;
      break;
    }
  }
  if (!stopped) {
    result.report = {Outcome::kMaxIterReached, options.max_iter, std::nullopt, prev_dq};
  }
  const long t_final = result.report.at_iter;
  result.final_q = q;
  result.final_sigma = ApplyPolicy(q, rule);
  result.final_mu = consistent(result.final_sigma, t_final);
  result.trace.records.push_back({t_final, result.final_q, result.final_sigma,
                                  result.final_mu, std::nullopt,
                                  MaxMetric(result.final_sigma, prev_sigma)});
  return result;
}

std::optional<CycleInfo> DetectCycle(const IterationTrace& trace, double tol) {
  if (trace.records.empty()) return std::nullopt;
  CycleDetector detector(trace.rule.kind, tol, trace.records.size() + 4);
  double prev_dq = std::numeric_limits<double>::infinity();
  const QTable* prev_q = nullptr;
  for (const auto& r : trace.records) {
    if (prev_q != nullptr) prev_dq = MaxMetric(r.q, *prev_q);
    if (auto c = detector.Observe(r.iter, r.q, r.sigma, prev_dq)) return c;
    prev_q = &r.q;
  }
  return std::nullopt;
}

std::vector<double> Margin(const QTable& q, const Strategy& sigma) {
  if (q.agents.size() != sigma.agents.size()) {
    throw StructuralError("margin: agent count mismatch");
  }
  if (!IsDeterministic(sigma)) {
    throw DomainError("margin requires a deterministic strategy");
  }
  std::vector<double> xi;
  for (std::size_t i = 0; i < q.agents.size(); ++i) {
    const auto& qi = q.agents[i];
    if (!qi.SameShape(sigma.agents[i])) throw StructuralError("margin: shape mismatch");
    double m = std::numeric_limits<double>::infinity();
    for (int z = 0; z < qi.dim0(); ++z) {
      for (int x = 0; x < qi.dim1(); ++x) {
        const int chosen = ChosenAction(sigma.agents[i], z, x);
        for (int a = 0; a < qi.dim2(); ++a) {
          if (a != chosen) m = std::min(m, qi(z, x, chosen) - qi(z, x, a));
        }
      }
    }
    xi.push_back(m);
  }
  return xi;
}

namespace {

void FillConsistency(const GameSpec& spec, const Strategy& sigma,
                     const ConsistentModel& mu, double tol, EeeReport& report) {
  report.consistent = ComputeConsistentModel(spec, sigma);
  report.consistency_residual = MaxMetric(mu, report.consistent);
  report.consistency_ok = report.consistency_residual < tol;
}

}  // namespace

EeeReport VerifyEee(const GameSpec& spec, const Strategy& sigma, const ConsistentModel& mu,
                    double tol) {
  CheckShape(spec, sigma);
  CheckShape(spec, mu);
  if (!IsDeterministic(sigma)) {
    throw DomainError("EEE verification requires a deterministic strategy");
  }
  EeeReport report;
  report.q_fixed = BellmanFixedPoint(spec, mu);
  double regret = 0.0;
  for (std::size_t i = 0; i < sigma.agents.size(); ++i) {
    const auto& qi = report.q_fixed.agents[i];
    for (int z = 0; z < qi.dim0(); ++z) {
      for (int x = 0; x < qi.dim1(); ++x) {
        const auto row = qi.slice(z, x);
        const double best = *std::max_element(row.begin(), row.end());
        regret = std::max(regret, best - qi(z, x, ChosenAction(sigma.agents[i], z, x)));
      }
    }
  }
  report.optimality_residual = regret;
  report.optimality_ok = regret <= tol;
  report.margins = Margin(report.q_fixed, sigma);
  FillConsistency(spec, sigma, mu, tol, report);
  return report;
}

EeeReport VerifyApproxEee(const GameSpec& spec, const Strategy& sigma,
                          const ConsistentModel& mu, const std::vector<double>& tau,
                          double tol) {
  CheckShape(spec, sigma);
  CheckShape(spec, mu);
  EeeReport report;
  report.q_fixed = BellmanFixedPoint(spec, mu);
  report.optimality_residual = MaxMetric(sigma, SoftmaxPolicy(report.q_fixed, tau));
  report.optimality_ok = report.optimality_residual < tol;
  FillConsistency(spec, sigma, mu, tol, report);
  return report;
}

}  // namespace eee
