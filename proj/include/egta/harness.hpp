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

#ifndef EGTA_HARNESS_HPP_
#define EGTA_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "egta/config.hpp"
#include "egta/ecology.hpp"
#include "egta/inflow.hpp"
#include "egta/llm_gateway.hpp"
#include "egta/policies.hpp"

namespace egta {

struct SummaryRow {
  double min_budget_final = 0.0;
  double max_budget_final = 0.0;
  double pct_both = 0.0;
  double pct_irrig_only = 0.0;
  double pct_fish_only = 0.0;
  double pct_none = 0.0;
};

struct RunArtifacts {
  PipelineKind pipeline = PipelineKind::kProcedural;
  double tau = 0.0;
  BehaviourKind behaviour = BehaviourKind::kRational;
  std::uint64_t seed = 0;
  int horizon = 0;
  int n_households = 0;

  std::vector<YearRecord> records;  // year-major, households in order
  std::vector<double> fish_adults;  // adult stock after each year
  std::vector<PolicyEvent> events;
  std::vector<RequestLogEntry> requests;
  bool llm_backed = false;
  long network_requests = 0;
  SummaryRow summary;

  int fallback_events() const;
};

// Min/max budget in the last year present; activity shares over every
// (household, year) cell, in percent.
SummaryRow Summarize(const std::vector<YearRecord>& records);

std::vector<MonthlyInflow> InflowSeries(const RunConfig& config);

// `gateway` may be null for pipelines that do not use one.
std::unique_ptr<Pipeline> MakePipeline(const RunConfig& config, LlmGateway* gateway);

using YearObserver = std::function<void(const YearOutcome&)>;

// Throws RunError with year/household context when a year cannot complete.
RunArtifacts RunSimulation(const RunConfig& config, const YearObserver& observer = {});

struct SweepGrid {
  std::vector<PipelineKind> pipelines;   // empty: the base pipeline
  std::vector<double> taus;              // empty: the base tau
  std::vector<BehaviourKind> behaviours; // empty: the base behaviour
  std::vector<std::uint64_t> seeds;      // empty: the base seed
};

struct SweepRow {
  PipelineKind pipeline = PipelineKind::kProcedural;
  double tau = 0.0;
  BehaviourKind behaviour = BehaviourKind::kRational;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  SummaryRow summary;
  int fallback_events = 0;
};

// Cells in pipeline, tau, behaviour, seed order (seed varies fastest).
std::vector<RunConfig> ExpandGrid(const RunConfig& base, const SweepGrid& grid);

// One row per cell; a failing cell is flagged and the others still run.
// With `out_dir`, each cell's files go to out_dir/cell_NNN. Cells run in
// parallel with OpenMP.
std::vector<SweepRow> Sweep(const RunConfig& base, const SweepGrid& grid, const std::filesystem::path& out_dir = {});
// Single-threaded reference for Sweep.
std::vector<SweepRow> SweepSerial(const RunConfig& base, const SweepGrid& grid,
                                  const std::filesystem::path& out_dir = {});

std::string SweepCsv(const std::vector<SweepRow>& rows);

struct CalibrationCheck {
  std::string name;
  bool skipped = false;
  bool passed = false;
  std::string detail;
};

struct CalibrationReport {
  std::vector<CalibrationCheck> checks;
  std::vector<SweepRow> rows;
  bool passed() const;
};

inline constexpr int kMinCalibrationHorizon = 10;

// Runs expert-egta at each tau: tau = 0 must end with a household in debt
// and fewer than half the household-years doing both activities; tau > 0
// must end with every budget >= 0 and every household-year doing both.
// Throws ConfigError unless the pipeline is expert-egta.
CalibrationReport CalibrateCheck(const RunConfig& config, const std::vector<double>& taus = {0.0, 0.25, 1.0});
std::string FormatReport(const CalibrationReport& report);

}  // namespace egta

#endif  // EGTA_HARNESS_HPP_
