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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eee/io.hpp"
#include "test_support.hpp"

namespace eee {
namespace {

namespace fs = std::filesystem;
using io::Json;

const std::string kData = EEE_DATA_DIR;

struct Result {
  int code = -1;
  std::string output;
};

fs::path Scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("eee_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result Eee(const std::string& args, const fs::path& cwd = Scratch()) {
  const fs::path log = Scratch() / "last_output.txt";
  const std::string cmd = "cd '" + cwd.string() + "' && EEE_LOG=quiet '" EEE_CLI_PATH "' " + args +
                          " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = Slurp(log);
  return r;
}

std::string Example() { return "'" + kData + "/example1.json'"; }
std::string Out(const std::string& name) { return "--out '" + (Scratch() / name).string() + "'"; }

Json ReadJson(const fs::path& p) { return Json::parse(Slurp(p)); }

void WriteJson(const fs::path& p, const Json& j) { std::ofstream(p) << j.dump(); }

TEST_CASE("validate") {
  CHECK(Eee("validate " + Example()).code == 0);
  auto doc = io::LoadJsonFile(kData + "/example1.json");
  doc["env_kernels"]["1,1"][1] = Json::array({0.11, 0.06, 0.19, 0.54});
  WriteJson(Scratch() / "short_row.json", doc);
  const auto bad = Eee("validate short_row.json");
  CHECK(bad.code == 1);
  CHECK(bad.output.find("env_kernels[1,1] row 2: row sum 0.9") != std::string::npos);
  CHECK(Eee("validate missing.json").code == 2);
  std::ofstream(Scratch() / "garbage.json") << "[1, 2";
  CHECK(Eee("validate garbage.json").code == 2);
  CHECK(Eee("frobnicate").code == 2);
}

TEST_CASE("run") {
  auto r = Eee("run " + Example() + " --alpha 0.9 --policy greedy " + Out("g09"));
  CHECK(r.code == 0);
  const auto summary = ReadJson(Scratch() / "g09" / "summary.json");
  CHECK(summary["termination"]["outcome"] == "converged");
  for (const auto& row : summary["final_sigma"][0]) CHECK(row == Json::array({0.0, 1.0}));
  for (const auto& row : summary["final_sigma"][1]) CHECK(row == Json::array({1.0, 0.0}));
  CHECK(summary["config"]["alpha"] == 0.9);
  CHECK(summary["config"]["tol"] == 1e-9);
  CHECK(summary["config"]["max_iter"] == 10000);
  CHECK(fs::exists(Scratch() / "g09" / "trace.csv"));

  r = Eee("run " + Example() + " --alpha 1 --policy greedy --max-iter 200 " + Out("g1"));
  CHECK(r.code == 3);
  const auto cyc = ReadJson(Scratch() / "g1" / "summary.json")["termination"];
  CHECK(cyc["period"].get<int>() >= 2);
  CHECK(cyc["cycle_agents"] == Json::array({2}));

  CHECK(Eee("run " + Example() + " --alpha 0.9 --policy softmax --tau 1 1 " + Out("s09")).code == 0);
  CHECK(Eee("run " + Example() + " --alpha 0.9 --max-iter 3 " + Out("cap")).code == 4);
  CHECK(Eee("run " + Example() + " --alpha 1.5 " + Out("bad_alpha")).code == 1);
  CHECK(Eee("run " + Example() + " --alpha 0.9 --policy softmax --tau 1 1 1 " + Out("tau")).code == 1);

  r = Eee("run " + Example() + " --alpha 0.9 --dump-chain " + Out("dump"));
  CHECK(r.code == 0);
  CHECK(fs::exists(Scratch() / "dump" / "stationary.csv"));
  CHECK(fs::exists(Scratch() / "dump" / "transition.csv"));
}

TEST_CASE("default output directory") {
  const fs::path cwd = Scratch() / "cwd";
  fs::create_directories(cwd);
  CHECK(Eee("run " + Example() + " --max-iter 2", cwd).code == 4);
  CHECK(Eee("run " + Example() + " --max-iter 2", cwd).code == 4);
  std::vector<std::string> made;
  for (const auto& e : fs::directory_iterator(cwd / "out")) made.push_back(e.path().filename());
  REQUIRE(made.size() == 2);
  for (const auto& name : made) CHECK(name.rfind("run-", 0) == 0);
}

std::vector<std::vector<std::string>> ReadCsv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(Slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

TEST_CASE("sweep") {
  CHECK(Eee("sweep " + Example() + " --alphas 1 0 0.5 0.9 " + Out("sweep")).code == 0);
  const auto rows = ReadCsv(Scratch() / "sweep" / "sweep.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0][0] == "alpha");
  CHECK(rows[1][0] == "0");
  CHECK(rows[1][1] == "converged");
  CHECK(rows[1][5] == "0");
  CHECK(rows[3][0] == "0.9");
  CHECK(rows[3][1] == "converged");
  CHECK(rows[4][1] == "cycle");
  for (std::size_t r = 2; r < rows.size(); ++r) {
    CHECK(std::stod(rows[r][5]) > std::stod(rows[r - 1][5]));
  }
}

TEST_CASE("verify") {
  const std::string pair = " --sigma '" + kData + "/sigma_star.json' --mu '" + kData + "/mu_star.json'";
  CHECK(Eee("verify " + Example() + pair + " --tol 0.01").code == 0);
  auto r = Eee("verify " + Example() + pair + " --tol 1e-6");
  CHECK(r.code == 1);
  CHECK(r.output.find("consistency: VIOLATED") != std::string::npos);

  auto swapped = io::LoadJsonFile(kData + "/sigma_star.json");
  for (auto& row : swapped["strategy"][0]) row = Json::array({1.0, 0.0});
  WriteJson(Scratch() / "swapped.json", swapped);
  r = Eee("verify " + Example() + " --sigma swapped.json --mu '" + kData + "/mu_star.json' --tol 0.01");
  CHECK(r.code == 1);
  CHECK(r.output.find("optimality: VIOLATED") != std::string::npos);

  std::ofstream(Scratch() / "broken_sigma.json") << "{\"strategy\": [";
  CHECK(Eee("verify " + Example() + " --sigma broken_sigma.json --mu '" + kData +
            "/mu_star.json'").code == 2);
}

TEST_CASE("bounds") {
  CHECK(Eee("bounds " + Example() + " --alpha 0 " + Out("b0")).code == 0);
  const auto b0 = ReadJson(Scratch() / "b0" / "bounds.json");
  CHECK(b0["coupling"]["lambda"] == 0.0);
  CHECK(b0["rho"] == 0.7);
  CHECK(b0["config"]["command"] == "bounds");

  CHECK(Eee("bounds " + Example() + " --alpha 0.9 " + Out("b09")).code == 0);
  CHECK(Eee("bounds " + Example() + " --alpha 1 " + Out("b1")).code == 0);
  const double l09 = ReadJson(Scratch() / "b09" / "bounds.json")["coupling"]["lambda"];
  const double l1 = ReadJson(Scratch() / "b1" / "bounds.json")["coupling"]["lambda"];
  CHECK(std::abs(l09 - 0.9 * l1) < 1e-12);

  auto bare = io::LoadJsonFile(kData + "/example1.json");
  bare.erase("uncoupled_env");
  bare.erase("alpha");
  for (auto& a : bare["agents"]) a.erase("uncoupled_local");
  WriteJson(Scratch() / "bare.json", bare);
  CHECK(Eee("bounds bare.json " + Out("bare")).code == 1);
  CHECK(Eee("bounds bare.json --fallback " + Out("bare_fb")).code == 0);
  CHECK(ReadJson(Scratch() / "bare_fb" / "bounds.json")["coupling"]["reference_source"] ==
        "fallback");

  // One agent: rho = delta + L / tau, so tau = 2 L / (1 - delta) certifies.
  std::mt19937_64 rng(107);
  GameSpec g;
  do {
    g = testing::RandomGame(rng, {.n_agents = 1, .max_dim = 2, .coupling = 0.05});
  } while (g.n_env < 2 || g.agents[0].n_states < 2);
  WriteJson(Scratch() / "one.json", io::GameToJson(g));
  REQUIRE(Eee("bounds one.json --tau 1 " + Out("one_t1")).code == 0);
  const double rho1 = ReadJson(Scratch() / "one_t1" / "bounds.json")["rho"];
  const double delta = g.agents[0].discount;
  const double tau = 2.0 * (rho1 - delta) / (1.0 - delta);
  REQUIRE(Eee("bounds one.json --tau " + io::FormatDouble(tau) + " " + Out("one_big")).code == 0);
  const auto cert = ReadJson(Scratch() / "one_big" / "bounds.json");
  CHECK(cert["rho_certificate"] == true);
  CHECK(cert["rho"].get<double>() < 1.0);
}

TEST_CASE("simulate") {
  const std::string sigma = " --sigma '" + kData + "/sigma_star.json'";
  CHECK(Eee("simulate " + Example() + sigma + " --horizon 20000 --seed 3 " + Out("sa")).code == 0);
  CHECK(Eee("simulate " + Example() + sigma + " --horizon 20000 --seed 3 " + Out("sb")).code == 0);
  CHECK(Slurp(Scratch() / "sa" / "counts.csv") == Slurp(Scratch() / "sb" / "counts.csv"));
  CHECK(Slurp(Scratch() / "sa" / "counts.csv").rfind("# seed=3,horizon=20000,burn_in=1000", 0) == 0);

  auto r = Eee("simulate " + Example() + sigma + " --horizon 500 --burn-in 500 " + Out("empty"));
  CHECK(r.code == 0);
  CHECK(ReadJson(Scratch() / "empty" / "summary.json")["undefined_situations"] == 8);

  CHECK(Eee("simulate " + Example() + sigma + " --horizon 1000000 --seed 11 " + Out("long")).code == 0);
  CHECK(ReadJson(Scratch() / "long" / "summary.json")["max_abs_z"].get<double>() <= 4.0);
  CHECK(Eee("simulate " + Example() + sigma + " --horizon 10 --burn-in 20 " + Out("bad")).code == 1);
}

}  // namespace
}  // namespace eee
