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

// Python bindings: games load from JSON files or the built-in example, and
// profile tables cross the boundary as lists of (|Z|, |X|, k) numpy arrays.

#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "eee/chain_analysis.hpp"
#include "eee/coupling_bounds.hpp"
#include "eee/empirical.hpp"
#include "eee/game_model.hpp"
#include "eee/io.hpp"
#include "eee/learning.hpp"

namespace py = pybind11;

namespace {

using eee::Table3;

py::array_t<double> ToArray(const Table3& t) {
  py::array_t<double> a({t.dim0(), t.dim1(), t.dim2()});
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

py::list ToList(const std::vector<Table3>& tables) {
  py::list out;
  for (const auto& t : tables) out.append(ToArray(t));
  return out;
}

std::vector<Table3> FromList(const std::vector<py::array_t<double, py::array::c_style |
                                                                   py::array::forcecast>>& arrays) {
  std::vector<Table3> out;
  for (const auto& a : arrays) {
    if (a.ndim() != 3) throw eee::StructuralError("expected 3-d arrays (|Z|, |X|, k)");
    Table3 t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
             static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), t.data().begin());
    out.push_back(std::move(t));
  }
  return out;
}

using ArrayList = std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>;

eee::Strategy StrategyFrom(const eee::GameSpec& g, const ArrayList& arrays) {
  eee::Strategy s{FromList(arrays)};
  eee::CheckShape(g, s);
  return s;
}

eee::ConsistentModel ModelFrom(const eee::GameSpec& g, const ArrayList& arrays) {
  eee::ConsistentModel m{FromList(arrays)};
  eee::CheckShape(g, m);
  return m;
}

// nlohmann JSON to Python objects through the json module.
py::object FromJson(const eee::io::Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<double> Temperatures(const eee::GameSpec& g, const std::optional<std::vector<double>>& tau) {
  if (tau) return *tau;
  std::vector<double> out;
  for (const auto& a : g.agents) out.push_back(a.temperature);
  return out;
}

eee::GameSpec LoadGame(const std::string& path, std::optional<double> alpha) {
  return eee::io::ResolveGame(eee::io::LoadGameFile(path), alpha);
}

eee::GameSpec Example1(double alpha) { return eee::Interpolate(eee::BuildExample1(), alpha); }

py::dict RunIteration(const eee::GameSpec& g, const std::string& policy,
                      const std::optional<std::vector<double>>& tau, double tol, long max_iter,
                      bool keep_trace) {
  eee::PolicyRule rule;
  if (policy == "greedy") {
    rule = eee::PolicyRule::Greedy();
  } else if (policy == "softmax") {
    rule = eee::PolicyRule::Softmax(Temperatures(g, tau));
  } else {
    throw eee::DomainError("policy must be 'greedy' or 'softmax'");
  }
  eee::IterationOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  eee::IterationResult r;
  {
    py::gil_scoped_release release;
    r = eee::RunQValueIteration(g, rule, eee::ZeroQ(g), opt);
  }
  py::dict out;
  out["outcome"] = eee::ToString(r.report.outcome);
  out["at_iter"] = r.report.at_iter;
  out["residual"] = r.report.residual;
  if (r.report.cycle) {
    out["period"] = r.report.cycle->period;
    std::vector<int> agents;
    for (int a : r.report.cycle->agents) agents.push_back(a + 1);
    out["cycle_agents"] = agents;
  } else {
    out["period"] = py::none();
    out["cycle_agents"] = py::list();
  }
  out["sigma"] = ToList(r.final_sigma.agents);
  out["mu"] = ToList(r.final_mu.agents);
  out["q"] = ToList(r.final_q.agents);
  if (keep_trace) {
    py::list trace;
    for (const auto& rec : r.trace.records) {
      py::dict d;
      d["iter"] = rec.iter;
      d["sigma"] = ToList(rec.sigma.agents);
      d["q"] = ToList(rec.q.agents);
      d["step_dq"] = rec.step_dq ? py::cast(*rec.step_dq) : py::none();
      trace.append(d);
    }
    out["trace"] = trace;
  }
  return out;
}

py::dict Verify(const eee::GameSpec& g, const ArrayList& sigma, const ArrayList& mu, double tol,
                bool approx, const std::optional<std::vector<double>>& tau) {
  const auto s = StrategyFrom(g, sigma);
  const auto m = ModelFrom(g, mu);
  const auto r = approx ? eee::VerifyApproxEee(g, s, m, Temperatures(g, tau), tol)
                        : eee::VerifyEee(g, s, m, tol);
  py::dict out;
  out["ok"] = r.ok();
  out["optimality_ok"] = r.optimality_ok;
  out["consistency_ok"] = r.consistency_ok;
  out["optimality_residual"] = r.optimality_residual;
  out["consistency_residual"] = r.consistency_residual;
  out["margins"] = r.margins;
  out["q_fixed"] = ToList(r.q_fixed.agents);
  out["consistent_model"] = ToList(r.consistent.agents);
  return out;
}

py::object Bounds(const eee::GameSpec& g, const std::optional<ArrayList>& sigma,
                  const std::optional<std::vector<double>>& tau, bool fallback) {
  eee::Strategy s;
  if (sigma) {
    s = StrategyFrom(g, *sigma);
  } else {
    s = eee::RunQValueIteration(g, eee::PolicyRule::Greedy(), eee::ZeroQ(g)).final_sigma;
  }
  const auto coupling = eee::CouplingValue(g, fallback);
  const auto diag = eee::ComputeChainDiagnostics(g, s, fallback);
  std::vector<double> xi;
  if (eee::IsDeterministic(s)) {
    xi = eee::Margin(eee::BellmanFixedPoint(g, eee::ComputeConsistentModel(g, s)), s);
  }
  const auto b = eee::ComputeTheoremBounds(g, diag, coupling, xi, Temperatures(g, tau));
  return FromJson(eee::io::BoundsToJson(coupling, diag, b));
}

py::dict Simulate(const eee::GameSpec& g, const ArrayList& sigma, long horizon,
                  std::uint64_t seed, long burn_in) {
  const auto s = StrategyFrom(g, sigma);
  eee::Trajectory traj;
  {
    py::gil_scoped_release release;
    traj = eee::Simulate(g, s, horizon, seed, burn_in);
  }
  const auto est = eee::EstimateModel(traj);
  const auto cmp = eee::CompareModels(est, eee::ComputeConsistentModel(g, s));
  py::dict out;
  out["frequency"] = ToList(est.frequency);
  out["stderr"] = ToList(est.stderr_);
  out["visits"] = ToList(est.visits);
  out["max_abs_gap"] = cmp.max_abs_gap;
  out["max_abs_z"] = cmp.max_abs_z;
  out["undefined_situations"] = cmp.undefined_situations;
  out["rng"] = eee::kRngAlgorithm;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learning dynamics for weakly coupled stochastic games";

  auto base = py::register_exception<eee::Error>(m, "EeeError", PyExc_RuntimeError);
  py::register_exception<eee::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<eee::StructuralError>(m, "StructuralError", base.ptr());
  py::register_exception<eee::ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<eee::ChainError>(m, "ChainError", base.ptr());
  py::register_exception<eee::IoError>(m, "IoError", base.ptr());

  py::class_<eee::GameSpec>(m, "Game")
      .def_property_readonly("n_env", [](const eee::GameSpec& g) { return g.n_env; })
      .def_property_readonly("n_agents", [](const eee::GameSpec& g) { return g.agents.size(); })
      .def_property_readonly("n_joint_states", &eee::GameSpec::n_joint_states)
      .def("validate",
           [](const eee::GameSpec& g) {
             std::vector<std::string> out;
             for (const auto& v : eee::ValidateSpec(g).violations) out.push_back(v.ToString());
             return out;
           },
           "Violations, one string each; empty when the game is valid.")
      .def("to_json", [](const eee::GameSpec& g) { return FromJson(eee::io::GameToJson(g)); })
      .def("__repr__", [](const eee::GameSpec& g) {
        return "<Game agents=" + std::to_string(g.agents.size()) +
               " joint_states=" + std::to_string(g.n_joint_states()) + ">";
      });

  m.def("load_game", &LoadGame, py::arg("path"), py::arg("alpha") = py::none(),
        "Load a game JSON file, interpolated at alpha (or the file's alpha).");
  m.def("example1", &Example1, py::arg("alpha") = 0.9,
        "The two-agent example game at coupling weight alpha.");

  m.def("run", &RunIteration, py::arg("game"), py::arg("policy") = "greedy",
        py::arg("tau") = py::none(), py::arg("tol") = 1e-9, py::arg("max_iter") = 10'000,
        py::arg("keep_trace") = false, "Q-value iteration from Q0 = 0.");

  m.def("consistent_model",
        [](const eee::GameSpec& g, const ArrayList& sigma) {
          return ToList(eee::ComputeConsistentModel(g, StrategyFrom(g, sigma)).agents);
        },
        py::arg("game"), py::arg("sigma"));

  m.def("constant_strategy",
        [](const eee::GameSpec& g, const std::vector<int>& actions) {
          std::vector<int> zero_based;
          for (int a : actions) zero_based.push_back(a - 1);
          return ToList(eee::ConstantStrategy(g, zero_based).agents);
        },
        py::arg("game"), py::arg("actions"),
        "Every agent plays its given 1-based action in every situation.");

  m.def("verify", &Verify, py::arg("game"), py::arg("sigma"), py::arg("mu"),
        py::arg("tol") = 1e-8, py::arg("approx") = false, py::arg("tau") = py::none());

  m.def("coupling",
        [](const eee::GameSpec& g, bool fallback) {
          return FromJson(eee::io::CouplingToJson(eee::CouplingValue(g, fallback)));
        },
        py::arg("game"), py::arg("fallback") = false);

  m.def("bounds", &Bounds, py::arg("game"), py::arg("sigma") = py::none(),
        py::arg("tau") = py::none(), py::arg("fallback") = false);

  m.def("simulate", &Simulate, py::arg("game"), py::arg("sigma"), py::arg("horizon"),
        py::arg("seed") = 0, py::arg("burn_in") = 1000);

  m.def("stationary",
        [](const Eigen::MatrixXd& t) { return eee::SolveStationary(t).pi; }, py::arg("T"));
  m.def("meyer_kappa", [](const Eigen::MatrixXd& t) { return eee::MeyerConditionNumber(t); },
        py::arg("T"));
}
