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

// eee: command-line driver for the learning dynamics library.
//
// Exit codes: 0 ok or converged, 1 domain violation or invalid game,
// 2 I/O or parse error, 3 cycle, 4 iteration cap reached.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eee/chain_analysis.hpp"
#include "eee/coupling_bounds.hpp"
#include "eee/empirical.hpp"
#include "eee/game_model.hpp"
#include "eee/io.hpp"
#include "eee/learning.hpp"

namespace fs = std::filesystem;
using eee::io::Json;

namespace {

enum ExitCode { kOk = 0, kDomain = 1, kIo = 2, kCycle = 3, kMaxIter = 4 };

enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel CurrentLevel() {
  static const LogLevel level = [] {
    const char* env = std::getenv("EEE_LOG");
    const std::string v = env ? env : "info";
    if (v == "quiet") return LogLevel::kQuiet;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void Info(const std::string& msg) {
  if (CurrentLevel() >= LogLevel::kInfo) std::cerr << "[eee] " << msg << "\n";
}
void Debug(const std::string& msg) {
  if (CurrentLevel() >= LogLevel::kDebug) std::cerr << "[eee:debug] " << msg << "\n";
}
void Warn(const std::string& msg) { std::cerr << "[eee] warning: " << msg << "\n"; }

// Everything a command was asked to do, echoed into every summary.
struct RunConfig {
  std::string command;
  std::string spec_path;
  std::optional<double> alpha;
  std::string policy = "greedy";
  std::vector<double> tau;
  double tol = 1e-9;
  long max_iter = 10'000;
  std::uint64_t seed = 0;
  std::string output_dir;
  // Command-specific extras.
  std::vector<double> alphas;
  std::string sigma_path, mu_path;
  bool approx = false;
  bool fallback = false;
  bool dump_chain = false;
  long horizon = 1'000'000;
  long burn_in = 1000;

  Json ToJson() const {
    Json j{{"command", command}, {"spec_path", spec_path}};
    j["alpha"] = alpha ? Json(*alpha) : Json(nullptr);
    j["policy"] = policy;
    j["tau"] = tau;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    if (command == "sweep") j["alphas"] = alphas;
    if (!sigma_path.empty()) j["sigma_path"] = sigma_path;
    if (!mu_path.empty()) j["mu_path"] = mu_path;
    if (command == "verify") j["approx"] = approx;
    j["fallback"] = fallback;
    if (command == "run") j["dump_chain"] = dump_chain;
    if (command == "simulate") {
      j["horizon"] = horizon;
      j["burn_in"] = burn_in;
      j["rng"] = eee::kRngAlgorithm;
    }
    return j;
  }
};

std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  localtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return os.str();
}

// Creates the output directory, never reusing an existing default one.
fs::path PrepareOutput(RunConfig& cfg) {
  fs::path dir;
  if (!cfg.output_dir.empty()) {
    dir = cfg.output_dir;
  } else {
    const fs::path base = fs::path("out") / (cfg.command + "-" + Timestamp());
    dir = base;
    for (int k = 2; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw eee::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  cfg.output_dir = dir.string();
  return dir;
}

void WriteJson(const fs::path& path, const Json& j) {
  eee::io::AtomicWrite(path, j.dump(2) + "\n");
  Debug("wrote " + path.string());
}

std::vector<double> Temperatures(const eee::GameSpec& spec, const std::vector<double>& tau) {
  if (tau.empty()) {
    std::vector<double> out;
    for (const auto& a : spec.agents) out.push_back(a.temperature);
    return out;
  }
  if (tau.size() == 1) return std::vector<double>(spec.agents.size(), tau[0]);
  if (tau.size() != spec.agents.size()) {
    throw eee::DomainError("--tau needs one value or one per agent");
  }
  return tau;
}

eee::PolicyRule MakeRule(const RunConfig& cfg, const eee::GameSpec& spec) {
  if (cfg.policy == "greedy") return eee::PolicyRule::Greedy();
  if (cfg.policy == "softmax") return eee::PolicyRule::Softmax(Temperatures(spec, cfg.tau));
  throw eee::DomainError("unknown policy '" + cfg.policy + "'");
}

// Loads and resolves the game, printing violations. Returns nullopt if invalid.
std::optional<eee::GameSpec> LoadValidGame(const RunConfig& cfg) {
  const auto file = eee::io::LoadGameFile(cfg.spec_path);
  if (cfg.alpha && (*cfg.alpha < 0.0 || *cfg.alpha > 1.0)) {
    throw eee::DomainError("alpha must lie in [0, 1]");
  }
  auto spec = eee::io::ResolveGame(file, cfg.alpha);
  const auto report = eee::ValidateSpec(spec);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cout << v.ToString() << "\n";
    return std::nullopt;
  }
  if (cfg.fallback && (!spec.uncoupled_env ||
                       std::any_of(spec.agents.begin(), spec.agents.end(),
                                   [](const auto& a) { return !a.uncoupled_local; }))) {
    Info("uncoupled references missing; using action averages");
  }
  return spec;
}

int ExitFor(eee::Outcome outcome) {
  switch (outcome) {
    case eee::Outcome::kConverged: return kOk;
    case eee::Outcome::kCycle: return kCycle;
    case eee::Outcome::kMaxIterReached: return kMaxIter;
  }
  return kDomain;
}

int CmdValidate(RunConfig& cfg) {
  const auto file = eee::io::LoadGameFile(cfg.spec_path);
  int violations = 0;
  const auto print = [&](const eee::GameSpec& g, const std::string& label) {
    for (const auto& v : eee::ValidateSpec(g).violations) {
      std::cout << label << v.ToString() << "\n";
      ++violations;
    }
  };
  print(file.spec, "");
  if (violations == 0 && (cfg.alpha || file.alpha)) {
    print(eee::io::ResolveGame(file, cfg.alpha), "interpolated: ");
  }
  if (violations == 0) {
    std::cout << "ok\n";
    return kOk;
  }
  std::cout << violations << " violation(s)\n";
  return kDomain;
}

int CmdRun(RunConfig& cfg) {
  const auto spec = LoadValidGame(cfg);
  if (!spec) return kDomain;
  const auto rule = MakeRule(cfg, *spec);
  eee::IterationOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  const auto dir = PrepareOutput(cfg);
  Info("run: policy=" + cfg.policy + " output=" + dir.string());
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = eee::RunQValueIteration(*spec, rule, eee::ZeroQ(*spec), opt);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  eee::io::AtomicWrite(dir / "trace.csv", eee::io::TraceCsv(result.trace));
  Json summary{{"config", cfg.ToJson()},
               {"termination", eee::io::TerminationToJson(result.report)},
               {"iterations", result.report.at_iter},
               {"seconds", secs}};
  summary["final_sigma"] = eee::io::StrategyToJson(result.final_sigma)["strategy"];
  summary["final_mu"] = eee::io::ModelToJson(result.final_mu)["model"];
  summary["final_q"] = eee::io::QTableToJson(result.final_q)["q"];
  if (eee::IsDeterministic(result.final_sigma)) {
    Json xi = Json::array();
    for (double v : eee::Margin(result.final_q, result.final_sigma)) {
      xi.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
    }
    summary["margins"] = xi;
  }
  if (cfg.dump_chain) {
    const auto jt = eee::BuildJointTransition(*spec, result.final_sigma);
    const auto sd = eee::SolveStationary(jt);
    eee::io::AtomicWrite(dir / "stationary.csv", eee::io::StationaryCsv(jt.indexer, sd.pi));
    eee::io::AtomicWrite(dir / "transition.csv", eee::io::TransitionCsv(jt.indexer, jt.matrix));
  }
  WriteJson(dir / "summary.json", summary);

  std::cout << "outcome: " << eee::ToString(result.report.outcome)
            << " after " << result.report.at_iter << " iterations";
  if (result.report.cycle) {
    std::cout << " (period " << result.report.cycle->period << ", agents";
    for (int a : result.report.cycle->agents) std::cout << " " << a + 1;
    std::cout << ")";
  }
  std::cout << "\nresidual: " << eee::io::FormatDouble(result.report.residual) << "\n";
  return ExitFor(result.report.outcome);
}

struct SweepRow {
  double alpha = 0.0;
  std::string outcome;
  long iterations = 0;
  long period = 0;
  double q_norm = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  std::string error;
};

SweepRow SweepPoint(const eee::io::GameFile& file, const RunConfig& cfg, double alpha) {
  SweepRow row;
  row.alpha = alpha;
  try {
    auto spec = eee::io::ResolveGame(file, alpha);
    if (!eee::ValidateSpec(spec).ok()) throw eee::DomainError("invalid game at this alpha");
    eee::IterationOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    const auto result = eee::RunQValueIteration(spec, MakeRule(cfg, spec), eee::ZeroQ(spec), opt);
    row.outcome = eee::ToString(result.report.outcome);
    row.iterations = result.report.at_iter;
    if (result.report.cycle) row.period = result.report.cycle->period;
    for (const auto& t : result.final_q.agents) row.q_norm = std::max(row.q_norm, eee::SupNorm(t));
    const auto coupling = eee::CouplingValue(spec, cfg.fallback);
    row.lambda = coupling.lambda;
    const auto diag = eee::ComputeChainDiagnostics(spec, result.final_sigma, cfg.fallback);
    row.rho = eee::ContractionFactor(spec, diag, coupling, Temperatures(spec, cfg.tau));
  } catch (const std::exception& e) {
    row.outcome = row.outcome.empty() ? "error" : row.outcome;
    row.error = e.what();
  }
  return row;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

int CmdSweep(RunConfig& cfg) {
  const auto file = eee::io::LoadGameFile(cfg.spec_path);
  if (cfg.alphas.empty()) throw eee::DomainError("--alphas needs at least one value");
  for (double a : cfg.alphas) {
    if (a < 0.0 || a > 1.0) throw eee::DomainError("alpha must lie in [0, 1]");
  }
  std::sort(cfg.alphas.begin(), cfg.alphas.end());
  const auto dir = PrepareOutput(cfg);
  std::vector<std::future<SweepRow>> jobs;
  for (double a : cfg.alphas) {
    jobs.push_back(std::async(std::launch::async, SweepPoint, std::cref(file), std::cref(cfg), a));
  }
  std::string csv = "alpha,outcome,iterations,period,q_norm,lambda,rho,error\n";
  using eee::io::FormatDouble;
  for (auto& job : jobs) {
    const auto r = job.get();
    csv += FormatDouble(r.alpha) + "," + r.outcome + "," + std::to_string(r.iterations) + "," +
           std::to_string(r.period) + "," + FormatDouble(r.q_norm) + "," +
           FormatDouble(r.lambda) + "," + FormatDouble(r.rho) + "," + CsvField(r.error) + "\n";
    std::cout << "alpha=" << FormatDouble(r.alpha) << " " << r.outcome;
    if (!r.error.empty()) std::cout << " (" << r.error << ")";
    std::cout << "\n";
  }
  eee::io::AtomicWrite(dir / "sweep.csv", csv);
  WriteJson(dir / "summary.json", Json{{"config", cfg.ToJson()}});
  return kOk;
}

int CmdVerify(RunConfig& cfg) {
  const auto spec = LoadValidGame(cfg);
  if (!spec) return kDomain;
  const auto sigma = eee::io::ParseStrategy(eee::io::LoadJsonFile(cfg.sigma_path), *spec);
  const auto mu = eee::io::ParseModel(eee::io::LoadJsonFile(cfg.mu_path), *spec);
  const auto report = cfg.approx
                          ? eee::VerifyApproxEee(*spec, sigma, mu, Temperatures(*spec, cfg.tau), cfg.tol)
                          : eee::VerifyEee(*spec, sigma, mu, cfg.tol);
  using eee::io::FormatDouble;
  std::cout << (cfg.approx ? "softmax" : "optimality") << ": "
            << (report.optimality_ok ? "ok" : "VIOLATED") << " (residual "
            << FormatDouble(report.optimality_residual) << ")\n";
  std::cout << "consistency: " << (report.consistency_ok ? "ok" : "VIOLATED") << " (residual "
            << FormatDouble(report.consistency_residual) << ")\n";
  Json margins = Json::array();
  for (std::size_t i = 0; i < report.margins.size(); ++i) {
    const double v = report.margins[i];
    std::cout << "margin agent " << i + 1 << ": " << FormatDouble(v) << "\n";
    margins.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
  }
  if (!cfg.output_dir.empty()) {
    const auto dir = PrepareOutput(cfg);
    WriteJson(dir / "verify.json",
              Json{{"config", cfg.ToJson()},
                   {"optimality_ok", report.optimality_ok},
                   {"consistency_ok", report.consistency_ok},
                   {"optimality_residual", report.optimality_residual},
                   {"consistency_residual", report.consistency_residual},
                   {"margins", margins},
                   {"q_fixed", eee::io::QTableToJson(report.q_fixed)["q"]},
                   {"consistent_model", eee::io::ModelToJson(report.consistent)["model"]}});
  }
  return report.ok() ? kOk : kDomain;
}

int CmdBounds(RunConfig& cfg) {
  const auto spec = LoadValidGame(cfg);
  if (!spec) return kDomain;
  eee::Strategy sigma;
  if (!cfg.sigma_path.empty()) {
    sigma = eee::io::ParseStrategy(eee::io::LoadJsonFile(cfg.sigma_path), *spec);
  } else {
    eee::IterationOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    const auto run = eee::RunQValueIteration(*spec, eee::PolicyRule::Greedy(), eee::ZeroQ(*spec), opt);
    if (run.report.outcome != eee::Outcome::kConverged) {
      Warn("greedy iteration did not converge; bounds use its last strategy");
    }
    sigma = run.final_sigma;
  }
  const auto coupling = eee::CouplingValue(*spec, cfg.fallback);
  const auto diag = eee::ComputeChainDiagnostics(*spec, sigma, cfg.fallback);
  std::vector<double> xi;
  if (eee::IsDeterministic(sigma)) {
    const auto mu = eee::ComputeConsistentModel(*spec, sigma);
    xi = eee::Margin(eee::BellmanFixedPoint(*spec, mu), sigma);
  }
  const auto bounds =
      eee::ComputeTheoremBounds(*spec, diag, coupling, xi, Temperatures(*spec, cfg.tau));
  Json out = eee::io::BoundsToJson(coupling, diag, bounds);
  out["config"] = cfg.ToJson();
  const auto dir = PrepareOutput(cfg);
  out["config"]["output_dir"] = cfg.output_dir;
  WriteJson(dir / "bounds.json", out);
  using eee::io::FormatDouble;
  std::cout << "lambda: " << FormatDouble(coupling.lambda)
            << "\nkappa: " << FormatDouble(diag.kappa)
            << "\nrho: " << FormatDouble(bounds.rho)
            << (bounds.rho_certificate ? " (contraction certified)" : " (no certificate)") << "\n";
  for (std::size_t i = 0; i < bounds.margin_condition.size(); ++i) {
    const auto& m = bounds.margin_condition[i];
    std::cout << "margin condition agent " << i + 1 << ": " << (m.holds ? "holds" : "fails")
              << " (" << FormatDouble(m.lhs) << " vs " << FormatDouble(m.rhs) << ")\n";
  }
  return kOk;
}

int CmdSimulate(RunConfig& cfg) {
  const auto spec = LoadValidGame(cfg);
  if (!spec) return kDomain;
  const auto sigma = eee::io::ParseStrategy(eee::io::LoadJsonFile(cfg.sigma_path), *spec);
  const auto traj = eee::Simulate(*spec, sigma, cfg.horizon, cfg.seed, cfg.burn_in);
  const auto est = eee::EstimateModel(traj);
  const auto exact = eee::ComputeConsistentModel(*spec, sigma);
  const auto cmp = eee::CompareModels(est, exact);
  if (cmp.cells.empty()) Warn("no situation visited after burn-in; every frequency is undefined");
  const auto dir = PrepareOutput(cfg);
  eee::io::AtomicWrite(dir / "counts.csv", eee::io::CountsCsv(traj, est));
  eee::io::AtomicWrite(dir / "comparison.csv", eee::io::ComparisonCsv(cmp));
  WriteJson(dir / "summary.json", Json{{"config", cfg.ToJson()},
                                       {"max_abs_gap", cmp.max_abs_gap},
                                       {"max_abs_z", cmp.max_abs_z},
                                       {"defined_cells", cmp.cells.size()},
                                       {"undefined_situations", cmp.undefined_situations}});
  std::cout << "max |gap|: " << eee::io::FormatDouble(cmp.max_abs_gap)
            << "\nmax |z|: " << eee::io::FormatDouble(cmp.max_abs_z)
            << "\nundefined situations: " << cmp.undefined_situations << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning dynamics for weakly coupled stochastic games"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto add_spec = [&](CLI::App* sub) {
    sub->add_option("spec", cfg.spec_path, "Game JSON file")->required();
  };
  const auto add_alpha = [&](CLI::App* sub) {
    sub->add_option("--alpha", cfg.alpha, "Coupling weight for convex-family games");
  };
  const auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.output_dir, "Output directory (default ./out/<cmd>-<time>)");
  };
  const auto add_iteration = [&](CLI::App* sub) {
    sub->add_option("--policy", cfg.policy, "greedy or softmax")
        ->check(CLI::IsMember({"greedy", "softmax"}));
    sub->add_option("--tau", cfg.tau, "Softmax temperatures, one or one per agent");
    sub->add_option("--tol", cfg.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cfg.max_iter, "Iteration cap")->check(CLI::Range(1L, 1'000'000'000L));
  };
  const auto add_fallback = [&](CLI::App* sub) {
    sub->add_flag("--fallback", cfg.fallback,
                  "Use action-averaged kernels when uncoupled references are absent");
  };

  auto* validate = app.add_subcommand("validate", "Check kernels and dimensions");
  add_spec(validate);
  add_alpha(validate);

  auto* run = app.add_subcommand("run", "Run Q-value iteration");
  add_spec(run);
  add_alpha(run);
  add_iteration(run);
  add_out(run);
  add_fallback(run);
  run->add_flag("--dump-chain", cfg.dump_chain, "Also write the final joint chain and pi");

  auto* sweep = app.add_subcommand("sweep", "Run the iteration across coupling weights");
  add_spec(sweep);
  sweep->add_option("--alphas", cfg.alphas, "Coupling weights")->required();
  add_iteration(sweep);
  add_out(sweep);
  add_fallback(sweep);

  auto* verify = app.add_subcommand("verify", "Check a strategy/model pair for equilibrium");
  add_spec(verify);
  add_alpha(verify);
  verify->add_option("--sigma", cfg.sigma_path, "Strategy JSON")->required();
  verify->add_option("--mu", cfg.mu_path, "Model JSON")->required();
  verify->add_flag("--approx", cfg.approx, "Softmax optimality instead of greedy");
  verify->add_option("--tau", cfg.tau, "Softmax temperatures");
  verify->add_option("--tol", cfg.tol, "Tolerance")->check(CLI::PositiveNumber);
  verify->add_option("--out", cfg.output_dir, "Write verify.json here");

  auto* bounds = app.add_subcommand("bounds", "Coupling constants and certificates");
  add_spec(bounds);
  add_alpha(bounds);
  bounds->add_option("--sigma", cfg.sigma_path, "Strategy JSON (default: converged greedy)");
  bounds->add_option("--tau", cfg.tau, "Temperatures for the contraction factor");
  bounds->add_option("--tol", cfg.tol, "Tolerance for the greedy run")->check(CLI::PositiveNumber);
  bounds->add_option("--max-iter", cfg.max_iter, "Iteration cap for the greedy run");
  add_out(bounds);
  add_fallback(bounds);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo signal frequencies");
  add_spec(simulate);
  add_alpha(simulate);
  simulate->add_option("--sigma", cfg.sigma_path, "Strategy JSON")->required();
  simulate->add_option("--horizon", cfg.horizon, "Steps to simulate")->check(CLI::NonNegativeNumber);
  simulate->add_option("--burn-in", cfg.burn_in, "Steps before counting")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", cfg.seed, "RNG seed");
  add_out(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kIo;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();
  try {
    if (chosen == validate) return CmdValidate(cfg);
    if (chosen == run) return CmdRun(cfg);
    if (chosen == sweep) return CmdSweep(cfg);
    if (chosen == verify) return CmdVerify(cfg);
    if (chosen == bounds) return CmdBounds(cfg);
    if (chosen == simulate) return CmdSimulate(cfg);
  } catch (const eee::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const eee::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  }
  return kDomain;
}
