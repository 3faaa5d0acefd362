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

#ifndef EEE_IO_HPP_
#define EEE_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "eee/chain_analysis.hpp"
#include "eee/coupling_bounds.hpp"
#include "eee/empirical.hpp"
#include "eee/game_model.hpp"
#include "eee/learning.hpp"
#include "eee/profiles.hpp"

namespace eee::io {

using Json = nlohmann::ordered_json;

// A parsed game file. `alpha` is the optional top-level interpolation weight
// of a convex-family file.
struct GameFile {
  GameSpec spec;
  std::optional<double> alpha;
};

// Parses the JSON game format (1-based action and memory labels). Rows whose
// sums are within kRowSumTolerance of 1 are renormalized. Throws IoError on
// malformed input.
GameFile ParseGame(const Json& doc);
GameFile LoadGameFile(const std::filesystem::path& path);

Json GameToJson(const GameSpec& spec, std::optional<double> alpha = std::nullopt);

// Resolves the game to analyze: interpolated at `alpha` (or the file's own
// alpha) when one is given, otherwise the kernels as stored.
GameSpec ResolveGame(const GameFile& file, std::optional<double> alpha);

// Strategy / model files: {"strategy": [agent matrices]} and
// {"model": [agent matrices]}, rows (z, x) in z-major order.
Json StrategyToJson(const Strategy& sigma);
Json ModelToJson(const ConsistentModel& mu);
Json QTableToJson(const QTable& q);
Strategy ParseStrategy(const Json& doc, const GameSpec& spec);
ConsistentModel ParseModel(const Json& doc, const GameSpec& spec);
Json LoadJsonFile(const std::filesystem::path& path);

Json CouplingToJson(const CouplingReport& c);
Json DiagnosticsToJson(const ChainDiagnostics& d);
Json BoundsToJson(const CouplingReport& c, const ChainDiagnostics& d,
                  const TheoremBounds& b);
Json TerminationToJson(const TerminationReport& r);

std::string TraceCsv(const IterationTrace& trace);
std::string CountsCsv(const Trajectory& trajectory, const EmpiricalModel& model);
std::string ComparisonCsv(const ModelComparison& comparison);
std::string StationaryCsv(const JointIndexer& ix, const Vector& pi);
std::string TransitionCsv(const JointIndexer& ix, const Matrix& t);

// Writes through a temporary file in the same directory and renames it into
// place, so readers never observe a partial file.
void AtomicWrite(const std::filesystem::path& path, const std::string& content);

// Shortest round-trip decimal text for a double.
std::string FormatDouble(double v);

}  // namespace eee::io

#endif  // EEE_IO_HPP_
