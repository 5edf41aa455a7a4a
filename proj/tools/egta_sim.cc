// Copyright 2026 The egta-sim Authors
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

// egta-sim: run, sweep, solve-game, calibrate-check.
//
// Exit status: 0 success, 1 a run or check failed, 2 bad arguments or config.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "egta/config.hpp"
#include "egta/errors.hpp"
#include "egta/game_json.hpp"
#include "egta/harness.hpp"
#include "egta/outputs.hpp"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

int Run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        std::optional<double> tau) {
  egta::RunConfig config = egta::LoadConfig(config_path);
  if (seed) config.seed = *seed;
  if (tau) config.policy.tau = *tau;
  const egta::RunArtifacts a = egta::RunSimulation(config);
  egta::EmitOutputs(a, out_dir);
  std::cout << egta::SummaryCsv(a);
  return 0;
}

int Sweep(const std::string& config_path, const std::vector<double>& taus, const std::vector<std::string>& profiles,
          const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& pipelines, const std::string& out_dir) {
  const egta::RunConfig base = egta::LoadConfig(config_path);
  egta::SweepGrid grid;
  grid.taus = taus;
  grid.seeds = seeds;
  for (const std::string& p : profiles) grid.behaviours.push_back(egta::ParseBehaviour(p));
  for (const std::string& p : pipelines) grid.pipelines.push_back(egta::ParsePipeline(p));
  const std::vector<egta::SweepRow> rows = egta::Sweep(base, grid, out_dir);
  const std::string csv = egta::SweepCsv(rows);
  if (!out_dir.empty()) egta::WriteFileAtomic(std::filesystem::path(out_dir) / "sweep.csv", csv);
  std::cout << csv;
  for (const egta::SweepRow& r : rows)
    if (!r.ok) return kExitFailed;
  return 0;
}

int SolveGame(const std::string& game_path) {
  const egta::BimatrixGame game = egta::LoadGameJson(game_path);
  std::cout << egta::SolveGameReport(game).dump(2) << "\n";
  return 0;
}

int Calibrate(const std::string& config_path, const std::vector<double>& taus) {
  const egta::RunConfig config = egta::LoadConfig(config_path);
  const egta::CalibrationReport report =
      taus.empty() ? egta::CalibrateCheck(config) : egta::CalibrateCheck(config, taus);
  std::cout << egta::FormatReport(report);
  return report.passed() ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Governance pipelines on a river reach with farming and fishing households"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  CLI::App* run = app.add_subcommand("run", "Simulate one configuration and write its outputs");
  run->add_option("--config", config_path, "YAML config file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--tau", tau, "Override the config tax coefficient");

  std::vector<double> taus;
  std::vector<std::string> profiles;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> pipelines;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a grid of taus, behaviour profiles and seeds");
  sweep->add_option("--config", config_path, "Base YAML config file")->required();
  sweep->add_option("--taus", taus, "Tax coefficients")->delimiter(',');
  sweep->add_option("--profiles", profiles, "Behaviour profiles")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  sweep->add_option("--pipelines", pipelines, "Pipelines")->delimiter(',');
  sweep->add_option("--out", sweep_out, "Write sweep.csv and per-cell outputs here");

  std::string game_path;
  CLI::App* solve = app.add_subcommand("solve-game", "Print the equilibria of a bimatrix game");
  solve->add_option("--game", game_path, "Game JSON file")->required();

  std::vector<double> cal_taus;
  CLI::App* calibrate = app.add_subcommand("calibrate-check", "Check the tax/no-tax outcome pattern of a config");
  calibrate->add_option("--config", config_path, "YAML config file")->required();
  calibrate->add_option("--taus", cal_taus, "Taus to check (default 0,0.25,1)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return Run(config_path, out_dir, seed, tau);
    if (*sweep) return Sweep(config_path, taus, profiles, seeds, pipelines, sweep_out);
    if (*solve) return SolveGame(game_path);
    if (*calibrate) return Calibrate(config_path, cal_taus);
  } catch (const egta::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const egta::InvalidGameError& e) {
    std::cerr << "invalid game: " << e.what() << "\n";
    return kExitUsage;
  } catch (const egta::RunError& e) {
    std::cerr << fmt::format("run failed in year {} (household {}): {}\n", e.year(), e.household(), e.what());
    return kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
