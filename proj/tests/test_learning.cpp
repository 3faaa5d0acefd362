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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "eee/chain_analysis.hpp"
#include "eee/learning.hpp"
#include "test_support.hpp"

namespace eee {
namespace {

GameSpec Example(double alpha) { return Interpolate(BuildExample1(), alpha); }

// One agent, one situation, the given actions and signals.
GameSpec OneSituation(int actions, int signals, double discount) {
  GameSpec g;
  g.n_env = 1;
  AgentSpec a;
  a.n_states = 1;
  a.n_memory = 1;
  a.n_actions = actions;
  a.n_signals = signals;
  a.signal_kernel = Matrix::Constant(1, signals, 1.0 / signals);
  a.local_kernels.assign(actions, Matrix::Ones(signals, 1));
  a.memory_rule.assign(signals, 0);
  a.reward.assign(static_cast<std::size_t>(actions) * signals, 0.0);
  a.discount = discount;
  g.agents.push_back(a);
  g.env_kernels.assign(actions, Matrix::Ones(1, 1));
  return g;
}

QTable SingleRow(std::vector<double> values) {
  QTable q;
  Table3 t(1, 1, static_cast<int>(values.size()));
  t.data() = std::move(values);
  q.agents.push_back(t);
  return q;
}

QTable RandomQ(std::mt19937_64& rng, const GameSpec& g, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  QTable q = ZeroQ(g);
  for (auto& t : q.agents) {
    for (auto& v : t.data()) v = u(rng);
  }
  return q;
}

ConsistentModel RandomModel(std::mt19937_64& rng, const GameSpec& g) {
  ConsistentModel mu;
  for (const auto& a : g.agents) {
    Table3 t(a.n_memory, a.n_states, a.n_signals);
    for (int z = 0; z < a.n_memory; ++z) {
      const Matrix row = testing::RandomStochastic(rng, 1, a.n_signals, 0.0);
      for (int x = 0; x < a.n_states; ++x) {
        for (int s = 0; s < a.n_signals; ++s) t(z, x, s) = row(0, s);
      }
    }
    mu.agents.push_back(t);
  }
  return mu;
}

TEST_CASE("greedy policy examples") {
  CHECK(GreedyPolicy(SingleRow({3, 7})).agents[0].data() == std::vector<double>{0, 1});
  CHECK(GreedyPolicy(SingleRow({5, 5})).agents[0].data() == std::vector<double>{1, 0});
  const auto g = Example(0.9);
  const auto s = GreedyPolicy(ZeroQ(g));
  CHECK(s == ConstantStrategy(g, {0, 0}));
  CHECK(IsDeterministic(s));
}

TEST_CASE("softmax policy examples") {
  auto s = SoftmaxPolicy(SingleRow({4.2, 4.2}), {1.0}).agents[0];
  CHECK(s(0, 0, 0) == 0.5);
  CHECK(s(0, 0, 1) == 0.5);
  s = SoftmaxPolicy(SingleRow({std::log(2.0), 0.0}), {1.0}).agents[0];
  CHECK(std::abs(s(0, 0, 0) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(s(0, 0, 1) - 1.0 / 3.0) < 1e-15);
  s = SoftmaxPolicy(SingleRow({1000.0, 0.0}), {1.0}).agents[0];
  CHECK(std::isfinite(s(0, 0, 0)));
  CHECK(std::abs(s(0, 0, 0) - 1.0) < 1e-12);
  CHECK(s(0, 0, 1) < 1e-12);
  CHECK_THROWS_AS(SoftmaxPolicy(SingleRow({1, 2}), {0.0}), DomainError);
  CHECK_THROWS_AS(SoftmaxPolicy(SingleRow({1, 2}), {-1.0}), DomainError);
  CHECK_THROWS_AS(SoftmaxPolicy(SingleRow({1, 2}), {1.0, 1.0}), StructuralError);
}

TEST_CASE("policy invariances") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testing::RandomGame(rng);
    const auto q = RandomQ(rng, g);
    std::uniform_real_distribution<double> pos(0.1, 5.0), shift(-20.0, 20.0);
    const double c = pos(rng), d = shift(rng);
    QTable affine = q;
    for (auto& t : affine.agents) {
      for (auto& v : t.data()) v = c * v + d;
    }
    CHECK(GreedyPolicy(affine) == GreedyPolicy(q));

    // Per-situation shifts for softmax.
    QTable shifted = q;
    for (auto& t : shifted.agents) {
      for (int z = 0; z < t.dim0(); ++z) {
        for (int x = 0; x < t.dim1(); ++x) {
          const double dz = shift(rng);
          for (auto& v : t.slice(z, x)) v += dz;
        }
      }
    }
    const std::vector<double> tau(g.agents.size(), pos(rng));
    CHECK(MaxMetric(SoftmaxPolicy(shifted, tau), SoftmaxPolicy(q, tau)) < 1e-12);
  }
}

TEST_CASE("Bellman update trivial cases") {
  std::mt19937_64 rng(53);
  auto g = testing::RandomGame(rng);
  const auto mu = RandomModel(rng, g);
  auto zero = g;
  for (auto& a : zero.agents) std::fill(a.reward.begin(), a.reward.end(), 0.0);
  CHECK(SupNorm(BellmanUpdate(ZeroQ(zero), mu, zero).agents[0]) == 0.0);

  // No continuation term: the myopic expected reward, whatever Q holds.
  for (auto& a : g.agents) a.discount = 0.0;
  const auto q = BellmanUpdate(RandomQ(rng, g), mu, g);
  for (std::size_t i = 0; i < g.agents.size(); ++i) {
    const auto& a = g.agents[i];
    for (int z = 0; z < a.n_memory; ++z) {
      for (int x = 0; x < a.n_states; ++x) {
        for (int u = 0; u < a.n_actions; ++u) {
          double expected = 0.0;
          for (int s = 0; s < a.n_signals; ++s) {
            expected += mu.agents[i](z, x, s) * a.reward[(x * a.n_actions + u) * a.n_signals + s];
          }
          CHECK(std::abs(q.agents[i](z, x, u) - expected) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("Bellman fixed point matches the scalar closed form") {
  // Q(a) = r_a + delta V with V = max_a r_a / (1 - delta).
  auto g = OneSituation(3, 2, 0.8);
  g.agents[0].signal_kernel << 0.3, 0.7;
  g.agents[0].reward = {1.0, 2.0, 4.0, -1.0, 0.5, 0.5};
  ConsistentModel mu;
  mu.agents.push_back(Table3(1, 1, 2));
  mu.agents[0](0, 0, 0) = 0.3;
  mu.agents[0](0, 0, 1) = 0.7;
  const double r[3] = {0.3 * 1 + 0.7 * 2, 0.3 * 4 - 0.7 * 1, 0.5};
  const double v = std::max({r[0], r[1], r[2]}) / (1.0 - 0.8);
  const auto q = BellmanFixedPoint(g, mu);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(q.agents[0](0, 0, a) - (r[a] + 0.8 * v)) < 1e-10);
}

TEST_CASE("Bellman contraction and value nonexpansiveness") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testing::RandomGame(rng);
    const auto mu = RandomModel(rng, g);
    const auto q1 = RandomQ(rng, g);
    const auto q2 = RandomQ(rng, g);
    double delta = 0.0;
    for (const auto& a : g.agents) delta = std::max(delta, a.discount);
    CHECK(MaxMetric(BellmanUpdate(q1, mu, g), BellmanUpdate(q2, mu, g)) <=
          delta * MaxMetric(q1, q2) + 1e-12);
    for (std::size_t i = 0; i < q1.agents.size(); ++i) {
      const auto& a = q1.agents[i];
      const auto& b = q2.agents[i];
      for (int z = 0; z < a.dim0(); ++z) {
        for (int x = 0; x < a.dim1(); ++x) {
          const auto sa = a.slice(z, x), sb = b.slice(z, x);
          double gap = 0.0;
          for (std::size_t k = 0; k < sa.size(); ++k) gap = std::max(gap, std::abs(sa[k] - sb[k]));
          const double va = *std::max_element(sa.begin(), sa.end());
          const double vb = *std::max_element(sb.begin(), sb.end());
          CHECK(std::abs(va - vb) <= gap + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("example converges to sigma* under greedy updates") {
  const auto g = Example(0.9);
  const auto result = RunQValueIteration(g, PolicyRule::Greedy(), ZeroQ(g));
  CHECK(result.report.outcome == Outcome::kConverged);
  CHECK(result.final_sigma == ConstantStrategy(g, {1, 0}));
  CHECK(result.report.residual < 1e-9);

  // Iterates stay inside G / (1 - delta).
  for (const auto& rec : result.trace.records) {
    for (std::size_t i = 0; i < g.agents.size(); ++i) {
      const double bound = g.agents[i].reward_bound() / (1.0 - g.agents[i].discount);
      CHECK(SupNorm(rec.q.agents[i]) <= bound + 1e-12);
    }
    if (rec.step_dq) CHECK(*rec.step_dq >= 0.0);
    CHECK(rec.step_dsigma >= 0.0);
  }
  CHECK(result.trace.records.size() <= 10'001);

  const auto xi = Margin(result.final_q, result.final_sigma);
  CHECK(xi[0] > 0.0);
  CHECK(xi[1] > 0.0);

  const auto report = VerifyEee(g, result.final_sigma, result.final_mu, 1e-8);
  CHECK(report.ok());
}

TEST_CASE("fully coupled example cycles for agent 2") {
  const auto g = Example(1.0);
  IterationOptions opt;
  opt.max_iter = 200;
  const auto result = RunQValueIteration(g, PolicyRule::Greedy(), ZeroQ(g), opt);
  REQUIRE(result.report.outcome == Outcome::kCycle);
  REQUIRE(result.report.cycle.has_value());
  CHECK(result.report.at_iter <= 200);
  CHECK(result.report.cycle->period >= 2);
  CHECK(result.report.cycle->agents == std::vector<int>{1});

  // The recorded policies oscillate with the reported period.
  const auto& recs = result.trace.records;
  const long p = result.report.cycle->period;
  const auto& last = recs.back().sigma;
  CHECK(recs[recs.size() - 1 - static_cast<std::size_t>(p)].sigma == last);
  CHECK_FALSE(recs[recs.size() - 2].sigma == last);

  const auto again = DetectCycle(result.trace);
  REQUIRE(again.has_value());
  CHECK(again->period == p);
}

TEST_CASE("uncoupled runs contract toward the fixed point") {
  const auto g = Example(0.0);
  const auto result = RunQValueIteration(g, PolicyRule::Greedy(), ZeroQ(g));
  CHECK(result.report.outcome == Outcome::kConverged);
  const auto& recs = result.trace.records;
  const auto qstar = BellmanFixedPoint(g, recs.front().mu);
  for (std::size_t t = 0; t + 1 < recs.size(); ++t) {
    CHECK(MaxMetric(recs[t].mu, recs.front().mu) < 1e-12);
    for (std::size_t i = 0; i < g.agents.size(); ++i) {
      const double now = MaxMetric(std::vector<Table3>{recs[t].q.agents[i]},
                                   std::vector<Table3>{qstar.agents[i]});
      const double next = MaxMetric(std::vector<Table3>{recs[t + 1].q.agents[i]},
                                    std::vector<Table3>{qstar.agents[i]});
      CHECK(next <= g.agents[i].discount * now + 1e-11);
    }
  }
}

TEST_CASE("softmax iteration converges to an approximate EEE") {
  const auto g = Example(0.9);
  const auto result = RunQValueIteration(g, PolicyRule::Softmax({1.0, 1.0}), ZeroQ(g));
  REQUIRE(result.report.outcome == Outcome::kConverged);
  CHECK(VerifyApproxEee(g, result.final_sigma, result.final_mu, {1.0, 1.0}, 1e-6).ok());
  CHECK(VerifyApproxEee(g, result.final_sigma, result.final_mu, {1.0, 1.0}, 1e-8).ok());

  // Hot temperatures flatten the fixed point toward uniform play.
  const auto hot = RunQValueIteration(g, PolicyRule::Softmax({1e4, 1e4}), ZeroQ(g));
  REQUIRE(hot.report.outcome == Outcome::kConverged);
  CHECK(MaxMetric(hot.final_sigma, UniformStrategy(g)) < 1e-2);

  const auto flat = Example(0.0);
  const auto decoupled = RunQValueIteration(flat, PolicyRule::Softmax({1.0, 1.0}), ZeroQ(flat));
  REQUIRE(decoupled.report.outcome == Outcome::kConverged);
  CHECK(VerifyApproxEee(flat, decoupled.final_sigma, decoupled.final_mu, {1.0, 1.0}, 1e-8).ok());
}

TEST_CASE("termination trichotomy and iteration cap") {
  const auto g = Example(0.9);
  IterationOptions opt;
  opt.max_iter = 5;
  const auto result = RunQValueIteration(g, PolicyRule::Greedy(), ZeroQ(g), opt);
  CHECK(result.report.outcome == Outcome::kMaxIterReached);
  CHECK(result.trace.records.size() <= 6);
  CHECK_FALSE(result.report.cycle.has_value());
  opt.tol = 0.0;
  CHECK_THROWS_AS(RunQValueIteration(g, PolicyRule::Greedy(), ZeroQ(g), opt), DomainError);
}

TEST_CASE("vanishing mass inside the loop carries the iteration") {
  auto g = Example(0.9);
  for (auto& k : g.agents[1].local_kernels) {
    k.col(0).setZero();
    k.col(1).setOnes();
  }
  try {
    RunQValueIteration(g, PolicyRule::Greedy(), ZeroQ(g));
    FAIL("expected IterationError");
  } catch (const IterationError& e) {
    CHECK(e.iter() == 0);
    CHECK(std::string(e.what()).find("vanishing") != std::string::npos);
  }
}

IterationTrace Alternating(const GameSpec& g, const std::vector<Strategy>& sequence) {
  IterationTrace trace;
  long t = 0;
  for (const auto& s : sequence) {
    IterationRecord r;
    r.iter = t++;
    r.q = ZeroQ(g);
    r.sigma = s;
    r.step_dq = 1.0;
    trace.records.push_back(r);
  }
  return trace;
}

TEST_CASE("cycle detection on constructed sequences") {
  const auto g = Example(0.9);
  const auto a = ConstantStrategy(g, {0, 0});
  const auto b = ConstantStrategy(g, {0, 1});
  const auto cyc = DetectCycle(Alternating(g, {a, b, a, b, a}));
  REQUIRE(cyc.has_value());
  CHECK(cyc->period == 2);
  CHECK(cyc->agents == std::vector<int>{1});
  CHECK_FALSE(DetectCycle(Alternating(g, {a, a, a, a})).has_value());
  CHECK_FALSE(DetectCycle(Alternating(g, {a, b, b, b})).has_value());

  // Softmax: Q returns to an earlier value two steps back.
  IterationTrace soft;
  soft.rule = PolicyRule::Softmax({1.0, 1.0});
  for (int t = 0; t < 6; ++t) {
    IterationRecord r;
    r.iter = t;
    r.q = ZeroQ(g);
    r.q.agents[0](0, 0, 0) = (t % 2 == 0) ? 1.0 : 3.0;
    r.sigma = SoftmaxPolicy(r.q, {1.0, 1.0});
    r.step_dq = 2.0;
    soft.records.push_back(r);
  }
  const auto sc = DetectCycle(soft);
  REQUIRE(sc.has_value());
  CHECK(sc->period == 2);
}

TEST_CASE("margin") {
  const auto q = SingleRow({3, 7});
  QTable dummy;
  Strategy s;
  s.agents.push_back(Table3(1, 1, 2));
  s.agents[0](0, 0, 1) = 1.0;
  CHECK(Margin(q, s)[0] == 4.0);
  CHECK(Margin(SingleRow({5, 5}), s)[0] == 0.0);
  s.agents[0](0, 0, 0) = 0.5;
  s.agents[0](0, 0, 1) = 0.5;
  CHECK_THROWS_AS(Margin(q, s), DomainError);
  Strategy single;
  single.agents.push_back(Table3(1, 1, 1, 1.0));
  CHECK(std::isinf(Margin(SingleRow({2}), single)[0]));
}

TEST_CASE("EEE verification of the stated pair") {
  const auto g = Example(0.9);
  const auto sigma = ConstantStrategy(g, {1, 0});
  // Stated consistent model, two decimals.
  ConsistentModel stated;
  const double rows[2][2] = {{0.67, 0.54}, {0.64, 0.55}};
  for (int i = 0; i < 2; ++i) {
    Table3 t(2, 2, 2);
    for (int z = 0; z < 2; ++z) {
      for (int x = 0; x < 2; ++x) {
        t(z, x, 0) = rows[i][z];
        t(z, x, 1) = 1.0 - rows[i][z];
      }
    }
    stated.agents.push_back(t);
  }
  const auto ok = VerifyEee(g, sigma, stated, 0.01);
  CHECK(ok.optimality_ok);
  CHECK(ok.consistency_ok);

  ConsistentModel uniform = stated;
  for (auto& t : uniform.agents) std::fill(t.data().begin(), t.data().end(), 0.5);
  const auto bad = VerifyEee(g, sigma, uniform, 0.01);
  CHECK_FALSE(bad.consistency_ok);
  CHECK(bad.consistency_residual > 0.01);

  const auto trivial = OneSituation(1, 1, 0.5);
  Strategy only;
  only.agents.push_back(Table3(1, 1, 1, 1.0));
  const auto tr = VerifyEee(trivial, only, ComputeConsistentModel(trivial, only), 1e-12);
  CHECK(tr.ok());
}

TEST_CASE("max metrics") {
  std::mt19937_64 rng(61);
  const auto g = testing::RandomGame(rng);
  const auto s1 = testing::RandomMixedStrategy(rng, g);
  const auto s2 = testing::RandomMixedStrategy(rng, g);
  CHECK(MaxMetric(s1, s1) == 0.0);
  CHECK(MaxMetric(s1, s2) == MaxMetric(s2, s1));
  auto d1 = testing::RandomDeterministicStrategy(rng, g);
  auto d2 = d1;
  auto& t = d2.agents[0];
  const int chosen = ChosenAction(t, 0, 0);
  t(0, 0, chosen) = 0.0;
  t(0, 0, (chosen + 1) % t.dim2()) = 1.0;
  CHECK(MaxMetric(d1, d2) == 1.0);
  auto shorter = s1;
  shorter.agents.pop_back();
  CHECK_THROWS_AS(MaxMetric(s1, shorter), StructuralError);
  const auto q1 = RandomQ(rng, g);
  CHECK(MaxMetric(q1, q1) == 0.0);
}

}  // namespace
}  // namespace eee
