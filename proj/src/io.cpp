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

#include "eee/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace eee::io {

namespace {

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw IoError(where + ": " + what);
}

const Json& Field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) Fail(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

int IntField(const Json& obj, const char* key, const std::string& where) {
  const Json& v = Field(obj, key, where);
  if (!v.is_number_integer()) Fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

double NumberField(const Json& obj, const char* key, const std::string& where) {
  const Json& v = Field(obj, key, where);
  if (!v.is_number()) Fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

Matrix ParseMatrix(const Json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) Fail(where, "matrix must be a non-empty array of rows");
  const std::size_t n_cols = rows.front().is_array() ? rows.front().size() : 0;
  if (n_cols == 0) Fail(where, "matrix rows must be non-empty arrays");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Json& row = rows[r];
    if (!row.is_array() || row.size() != n_cols) Fail(where, "ragged matrix at row " + std::to_string(r + 1));
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!row[c].is_number()) Fail(where, "non-numeric entry at row " + std::to_string(r + 1));
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

// Divides rows that are within tolerance of stochastic by their sum; other
// rows are left for validation to report.
void Renormalize(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double sum = m.row(r).sum();
    if (sum > 0.0 && std::abs(sum - 1.0) <= kRowSumTolerance && m.row(r).minCoeff() >= 0.0) {
      m.row(r) /= sum;
    }
  }
}

Json MatrixToJson(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json TableRowsToJson(const Table3& t) {
  Json rows = Json::array();
  for (int z = 0; z < t.dim0(); ++z) {
    for (int x = 0; x < t.dim1(); ++x) {
      Json row = Json::array();
      for (double v : t.slice(z, x)) row.push_back(v);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Table3 TableFromRows(const Json& rows, int nz, int nx, int nlast, const std::string& where) {
  const Matrix m = ParseMatrix(rows, where);
  if (m.rows() != nz * nx || m.cols() != nlast) {
    Fail(where, "expected " + std::to_string(nz * nx) + "x" + std::to_string(nlast) + " rows");
  }
  Table3 t(nz, nx, nlast);
  for (int z = 0; z < nz; ++z) {
    for (int x = 0; x < nx; ++x) {
      for (int k = 0; k < nlast; ++k) t(z, x, k) = m(z * nx + x, k);
    }
  }
  return t;
}

std::vector<int> ParseActionKey(const std::string& key, const std::string& where) {
  std::vector<int> out;
  std::stringstream ss(key);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto* b = item.data();
    const auto* e = item.data() + item.size();
    while (b < e && *b == ' ') ++b;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || v < 1) Fail(where, "bad joint-action key '" + key + "'");
    out.push_back(v - 1);
  }
  return out;
}

AgentSpec ParseAgent(const Json& j, int n_env, const std::string& where) {
  AgentSpec a;
  a.n_states = IntField(j, "n_states", where);
  a.n_actions = IntField(j, "n_actions", where);
  a.n_signals = IntField(j, "n_signals", where);
  a.n_memory = IntField(j, "n_memory", where);
  if (a.n_states < 1 || a.n_actions < 1 || a.n_signals < 1 || a.n_memory < 1) {
    Fail(where, "dimensions must be >= 1");
  }
  a.signal_kernel = ParseMatrix(Field(j, "signal_kernel", where), where + ".signal_kernel");
  Renormalize(a.signal_kernel);
  (void)n_env;

  const Json& locals = Field(j, "local_kernels", where);
  a.local_kernels.assign(a.n_actions, Matrix());
  std::vector<bool> seen(a.n_actions, false);
  auto add_local = [&](int action, const Json& m) {
    if (action < 0 || action >= a.n_actions) Fail(where, "local kernel action out of range");
    a.local_kernels[action] =
        ParseMatrix(m, where + ".local_kernels[" + std::to_string(action + 1) + "]");
    Renormalize(a.local_kernels[action]);
    seen[action] = true;
  };
  if (locals.is_object()) {
    for (const auto& [key, value] : locals.items()) {
      const auto idx = ParseActionKey(key, where + ".local_kernels");
      if (idx.size() != 1) Fail(where, "local kernel keys are single actions");
      add_local(idx[0], value);
    }
  } else if (locals.is_array()) {
    for (std::size_t k = 0; k < locals.size(); ++k) add_local(static_cast<int>(k), locals[k]);
  } else {
    Fail(where, "'local_kernels' must be an object keyed by action");
  }
  for (int k = 0; k < a.n_actions; ++k) {
    if (!seen[k]) Fail(where, "missing local kernel for action " + std::to_string(k + 1));
  }
  if (j.contains("uncoupled_local") && !j.at("uncoupled_local").is_null()) {
    a.uncoupled_local = ParseMatrix(j.at("uncoupled_local"), where + ".uncoupled_local");
    Renormalize(*a.uncoupled_local);
  }

  const Json& rule = Field(j, "memory_rule", where);
  if (!rule.is_array() || static_cast<int>(rule.size()) != a.n_memory) {
    Fail(where, "memory_rule must have |Z| rows");
  }
  for (const auto& row : rule) {
    if (!row.is_array() || static_cast<int>(row.size()) != a.n_signals) {
      Fail(where, "memory_rule rows must have |S| entries");
    }
    for (const auto& v : row) {
      if (!v.is_number_integer()) Fail(where, "memory_rule entries must be integers");
      a.memory_rule.push_back(v.get<int>() - 1);
    }
  }

  const Json& reward = Field(j, "reward", where);
  if (!reward.is_array() || static_cast<int>(reward.size()) != a.n_states) {
    Fail(where, "reward must be an X x A x S nested array");
  }
  for (const auto& per_x : reward) {
    if (!per_x.is_array() || static_cast<int>(per_x.size()) != a.n_actions) {
      Fail(where, "reward must be an X x A x S nested array");
    }
    for (const auto& per_a : per_x) {
      if (!per_a.is_array() || static_cast<int>(per_a.size()) != a.n_signals) {
        Fail(where, "reward must be an X x A x S nested array");
      }
      for (const auto& v : per_a) {
        if (!v.is_number()) Fail(where, "reward entries must be numbers");
        a.reward.push_back(v.get<double>());
      }
    }
  }
  a.discount = NumberField(j, "discount", where);
  a.temperature = j.contains("temperature") ? NumberField(j, "temperature", where) : 1.0;
  return a;
}

}  // namespace

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

GameFile ParseGame(const Json& doc) {
  try {
    const std::string where = "game";
    GameFile file;
    GameSpec& spec = file.spec;
    spec.n_env = IntField(doc, "n_env", where);
    if (spec.n_env < 1) Fail(where, "n_env must be >= 1");
    const Json& agents = Field(doc, "agents", where);
    if (!agents.is_array() || agents.empty()) Fail(where, "'agents' must be a non-empty array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      spec.agents.push_back(ParseAgent(agents[i], spec.n_env, "agents[" + std::to_string(i + 1) + "]"));
    }
    const JointIndexer ix(spec);
    const Json& env = Field(doc, "env_kernels", where);
    if (!env.is_object()) Fail(where, "'env_kernels' must be an object keyed by joint action");
    spec.env_kernels.assign(ix.n_actions(), Matrix());
    std::vector<bool> seen(ix.n_actions(), false);
    for (const auto& [key, value] : env.items()) {
      const auto acts = ParseActionKey(key, "env_kernels");
      if (acts.size() != spec.agents.size()) Fail("env_kernels", "key '" + key + "' has wrong arity");
      for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts[i] >= spec.agents[i].n_actions) Fail("env_kernels", "key '" + key + "' out of range");
      }
      const std::size_t k = ix.FlattenAction(acts);
      spec.env_kernels[k] = ParseMatrix(value, "env_kernels[" + key + "]");
      Renormalize(spec.env_kernels[k]);
      seen[k] = true;
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (!seen[k]) {
        std::string label;
        const auto acts = ix.UnflattenAction(k);
        for (std::size_t i = 0; i < acts.size(); ++i) label += (i ? "," : "") + std::to_string(acts[i] + 1);
        Fail("env_kernels", "missing kernel for joint action " + label);
      }
    }
    if (doc.contains("uncoupled_env") && !doc.at("uncoupled_env").is_null()) {
      spec.uncoupled_env = ParseMatrix(doc.at("uncoupled_env"), "uncoupled_env");
      Renormalize(*spec.uncoupled_env);
    }
    if (doc.contains("alpha") && !doc.at("alpha").is_null()) {
      file.alpha = NumberField(doc, "alpha", where);
    }
    return file;
  } catch (const Json::exception& e) {
    throw IoError(std::string("game: ") + e.what());
  }
}

Json LoadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

GameFile LoadGameFile(const std::filesystem::path& path) {
  return ParseGame(LoadJsonFile(path));
}

Json GameToJson(const GameSpec& spec, std::optional<double> alpha) {
  Json doc;
  doc["n_env"] = spec.n_env;
  if (alpha) doc["alpha"] = *alpha;
  const JointIndexer ix(spec);
  Json env = Json::object();
  for (std::size_t k = 0; k < spec.env_kernels.size(); ++k) {
    std::string key;
    const auto acts = ix.UnflattenAction(k);
    for (std::size_t i = 0; i < acts.size(); ++i) key += (i ? "," : "") + std::to_string(acts[i] + 1);
    env[key] = MatrixToJson(spec.env_kernels[k]);
  }
  doc["env_kernels"] = std::move(env);
  if (spec.uncoupled_env) doc["uncoupled_env"] = MatrixToJson(*spec.uncoupled_env);
  Json agents = Json::array();
  for (const auto& a : spec.agents) {
    Json j;
    j["n_states"] = a.n_states;
    j["n_actions"] = a.n_actions;
    j["n_signals"] = a.n_signals;
    j["n_memory"] = a.n_memory;
    j["signal_kernel"] = MatrixToJson(a.signal_kernel);
    Json locals = Json::object();
    for (int k = 0; k < a.n_actions; ++k) locals[std::to_string(k + 1)] = MatrixToJson(a.local_kernels[k]);
    j["local_kernels"] = std::move(locals);
    if (a.uncoupled_local) j["uncoupled_local"] = MatrixToJson(*a.uncoupled_local);
    Json rule = Json::array();
    for (int z = 0; z < a.n_memory; ++z) {
      Json row = Json::array();
      for (int s = 0; s < a.n_signals; ++s) row.push_back(a.next_memory(z, s) + 1);
      rule.push_back(std::move(row));
    }
    j["memory_rule"] = std::move(rule);
    Json reward = Json::array();
    for (int x = 0; x < a.n_states; ++x) {
      Json per_x = Json::array();
      for (int act = 0; act < a.n_actions; ++act) {
        Json per_a = Json::array();
        for (int s = 0; s < a.n_signals; ++s) per_a.push_back(a.reward_at(x, act, s));
        per_x.push_back(std::move(per_a));
      }
      reward.push_back(std::move(per_x));
    }
    j["reward"] = std::move(reward);
    j["discount"] = a.discount;
    j["temperature"] = a.temperature;
    agents.push_back(std::move(j));
  }
  doc["agents"] = std::move(agents);
  return doc;
}

GameSpec ResolveGame(const GameFile& file, std::optional<double> alpha) {
  const auto weight = alpha ? alpha : file.alpha;
  if (!weight) return file.spec;
  return Interpolate(ConvexFamily{file.spec, *weight}, *weight);
}

Json StrategyToJson(const Strategy& sigma) {
  Json agents = Json::array();
  for (const auto& t : sigma.agents) agents.push_back(TableRowsToJson(t));
  return Json{{"strategy", std::move(agents)}};
}

Json ModelToJson(const ConsistentModel& mu) {
  Json agents = Json::array();
  for (const auto& t : mu.agents) agents.push_back(TableRowsToJson(t));
  return Json{{"model", std::move(agents)}};
}

Json QTableToJson(const QTable& q) {
  Json agents = Json::array();
  for (const auto& t : q.agents) agents.push_back(TableRowsToJson(t));
  return Json{{"q", std::move(agents)}};
}

namespace {

std::vector<Table3> ParseAgentTables(const Json& doc, const char* key, const GameSpec& spec,
                                     bool signals) {
  try {
    const Json& agents = Field(doc, key, key);
    if (!agents.is_array() || agents.size() != spec.agents.size()) {
      Fail(key, "expected one matrix per agent");
    }
    std::vector<Table3> out;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto& a = spec.agents[i];
      out.push_back(TableFromRows(agents[i], a.n_memory, a.n_states,
                                  signals ? a.n_signals : a.n_actions,
                                  std::string(key) + "[" + std::to_string(i + 1) + "]"));
    }
    return out;
  } catch (const Json::exception& e) {
    throw IoError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

Strategy ParseStrategy(const Json& doc, const GameSpec& spec) {
  return Strategy{ParseAgentTables(doc, "strategy", spec, false)};
}

ConsistentModel ParseModel(const Json& doc, const GameSpec& spec) {
  return ConsistentModel{ParseAgentTables(doc, "model", spec, true)};
}

Json CouplingToJson(const CouplingReport& c) {
  return Json{{"eps_env", c.eps_env},
              {"eps_local", c.eps_local},
              {"eps_local_max", c.eps_local_max},
              {"lambda", c.lambda},
              {"reference_source", ToString(c.reference_source)}};
}

Json DiagnosticsToJson(const ChainDiagnostics& d) {
  return Json{{"kappa", d.kappa},
              {"kappa_definition", "max_ij |A#_ij| of the uncoupled reference chain"},
              {"minimal_mass", d.minimal_mass},
              {"signal_ceiling", d.signal_ceiling}};
}

namespace {

// JSON has no infinity; unbounded margins are written as null.
Json FiniteOrNull(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json BoundsToJson(const CouplingReport& c, const ChainDiagnostics& d, const TheoremBounds& b) {
  Json margin = Json::array();
  for (std::size_t i = 0; i < b.margin_condition.size(); ++i) {
    const auto& m = b.margin_condition[i];
    margin.push_back(Json{{"agent", i + 1},
                          {"holds", m.holds},
                          {"zero_margin", m.zero_margin},
                          {"lhs", m.lhs},
                          {"rhs", FiniteOrNull(m.rhs)}});
  }
  Json xi = Json::array();
  for (double v : b.xi) xi.push_back(FiniteOrNull(v));
  const auto& in = b.inputs;
  return Json{{"coupling", CouplingToJson(c)},
              {"diagnostics", DiagnosticsToJson(d)},
              {"prop1", b.prop1_bound},
              {"propA2", b.propA2_bound},
              {"rho", b.rho},
              {"rho_certificate", b.rho_certificate},
              {"margin_condition", margin.empty() ? Json(nullptr) : margin},
              {"inputs",
               Json{{"kappa", in.kappa},
                    {"minimal_mass", in.minimal_mass},
                    {"signal_ceiling", in.signal_ceiling},
                    {"reward_bound", in.reward_bound},
                    {"action_total", in.action_total},
                    {"n_env", in.n_env},
                    {"others_dim", in.others_dim},
                    {"n_signals", in.n_signals},
                    {"n_actions", in.n_actions},
                    {"temperature", in.temperature},
                    {"discount", in.discount},
                    {"xi", xi},
                    {"lambda", in.lambda},
                    {"sigma_distance", b.sigma_distance}}}};
}

Json TerminationToJson(const TerminationReport& r) {
  Json j{{"outcome", ToString(r.outcome)}, {"at_iter", r.at_iter}};
  if (r.cycle) {
    j["period"] = r.cycle->period;
    j["first_seen"] = r.cycle->first_seen;
    Json agents = Json::array();
    for (int a : r.cycle->agents) agents.push_back(a + 1);
    j["cycle_agents"] = std::move(agents);
  } else {
    j["period"] = nullptr;
  }
  j["residual"] = FiniteOrNull(r.residual);
  return j;
}

std::string TraceCsv(const IterationTrace& trace) {
  int max_signals = 0;
  for (const auto& r : trace.records) {
    for (const auto& m : r.mu.agents) max_signals = std::max(max_signals, m.dim2());
  }
  std::ostringstream os;
  os << "iter,agent,z,x,a,sigma_prob,q_value";
  for (int s = 0; s < max_signals; ++s) os << ",mu_s" << s + 1;
  os << ",step_dq,step_dsigma\n";
  for (const auto& r : trace.records) {
    for (std::size_t i = 0; i < r.q.agents.size(); ++i) {
      const auto& q = r.q.agents[i];
      const auto& mu = r.mu.agents[i];
      for (int z = 0; z < q.dim0(); ++z) {
        for (int x = 0; x < q.dim1(); ++x) {
          for (int a = 0; a < q.dim2(); ++a) {
            os << r.iter << ',' << i + 1 << ',' << z + 1 << ',' << x + 1 << ',' << a + 1 << ','
               << FormatDouble(r.sigma.agents[i](z, x, a)) << ',' << FormatDouble(q(z, x, a));
            for (int s = 0; s < max_signals; ++s) {
              os << ',';
              if (s < mu.dim2()) os << FormatDouble(mu(z, x, s));
            }
            os << ',';
            if (r.step_dq) os << FormatDouble(*r.step_dq);
            os << ',' << FormatDouble(r.step_dsigma) << '\n';
          }
        }
      }
    }
  }
  return os.str();
}

std::string CountsCsv(const Trajectory& tr, const EmpiricalModel& model) {
  std::ostringstream os;
  os << "# seed=" << tr.seed << ",horizon=" << tr.horizon << ",burn_in=" << tr.burn_in
     << ",rng=" << kRngAlgorithm << '\n';
  os << "agent,z,x,s,count,visits,frequency,stderr\n";
  for (std::size_t i = 0; i < tr.counts.size(); ++i) {
    const int nx = tr.n_states[i];
    const int ns = tr.n_signals[i];
    for (int z = 0; z < tr.n_memory[i]; ++z) {
      for (int x = 0; x < nx; ++x) {
        const int situation = z * nx + x;
        const long visits = tr.counts[i].visits[situation];
        for (int s = 0; s < ns; ++s) {
          os << i + 1 << ',' << z + 1 << ',' << x + 1 << ',' << s + 1 << ','
             << tr.counts[i].signal_counts[static_cast<std::size_t>(situation) * ns + s] << ','
             << visits << ',';
          if (visits > 0) {
            os << FormatDouble(model.frequency[i](z, x, s)) << ','
               << FormatDouble(model.stderr_[i](z, x, s));
          } else {
            os << ',';
          }
          os << '\n';
        }
      }
    }
  }
  return os.str();
}

std::string ComparisonCsv(const ModelComparison& comparison) {
  std::ostringstream os;
  os << "agent,z,x,s,empirical,exact,stderr,z_score\n";
  for (const auto& c : comparison.cells) {
    os << c.agent + 1 << ',' << c.z + 1 << ',' << c.x + 1 << ',' << c.s + 1 << ','
       << FormatDouble(c.empirical) << ',' << FormatDouble(c.exact) << ','
       << FormatDouble(c.stderr_) << ',' << FormatDouble(c.z_score) << '\n';
  }
  return os.str();
}

namespace {

void StateHeader(std::ostringstream& os, const JointIndexer& ix) {
  os << "w";
  for (int i = 0; i < ix.n_agents(); ++i) os << ",z" << i + 1;
  for (int i = 0; i < ix.n_agents(); ++i) os << ",x" << i + 1;
}

void StateTuple(std::ostringstream& os, const JointIndexer& ix, std::size_t k) {
  const auto psi = ix.Unflatten(k);
  os << psi.w + 1;
  for (int z : psi.z) os << ',' << z + 1;
  for (int x : psi.x) os << ',' << x + 1;
}

}  // namespace

std::string StationaryCsv(const JointIndexer& ix, const Vector& pi) {
  std::ostringstream os;
  StateHeader(os, ix);
  os << ",pi\n";
  for (std::size_t k = 0; k < ix.n_states(); ++k) {
    StateTuple(os, ix, k);
    os << ',' << FormatDouble(pi(static_cast<Eigen::Index>(k))) << '\n';
  }
  return os.str();
}

std::string TransitionCsv(const JointIndexer& ix, const Matrix& t) {
  std::ostringstream os;
  StateHeader(os, ix);
  for (std::size_t k = 0; k < ix.n_states(); ++k) {
    const auto psi = ix.Unflatten(k);
    os << ",to_" << psi.w + 1;
    for (int z : psi.z) os << '_' << z + 1;
    for (int x : psi.x) os << '_' << x + 1;
  }
  os << '\n';
  for (std::size_t r = 0; r < ix.n_states(); ++r) {
    StateTuple(os, ix, r);
    for (std::size_t c = 0; c < ix.n_states(); ++c) {
      os << ',' << FormatDouble(t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    os << '\n';
  }
  return os.str();
}

void AtomicWrite(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

}  // namespace eee::io
