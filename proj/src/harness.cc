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

#include "egta/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "egta/errors.hpp"
#include "egta/outputs.hpp"

namespace egta {
namespace {

// Decisions draw from their own stream so the climate does not shift when a
// pipeline consumes more or fewer random numbers.
constexpr std::uint64_t kDecisionStreamSalt = 0x9E3779B97F4A7C15ULL;

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

SweepRow RunCell(const RunConfig& cell, const std::filesystem::path& out_dir, std::size_t index) {
  SweepRow row;
  row.pipeline = cell.pipeline;
  row.tau = cell.policy.tau;
  row.behaviour = cell.behaviour;
  row.seed = cell.seed;
  try {
    const RunArtifacts a = RunSimulation(cell);
    row.summary = a.summary;
    row.fallback_events = a.fallback_events();
    row.ok = true;
    if (!out_dir.empty()) EmitOutputs(a, out_dir / fmt::format("cell_{:03d}", index));
  } catch (const RunError& e) {
    row.ok = false;
    row.error = fmt::format("year {} household {}: {}", e.year(), e.household(), e.what());
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

int RunArtifacts::fallback_events() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [](const PolicyEvent& e) { return e.kind == "fallback"; }));
}

SummaryRow Summarize(const std::vector<YearRecord>& records) {
  SummaryRow s;
  if (records.empty()) return s;
  int last_year = 0;
  for (const YearRecord& r : records) last_year = std::max(last_year, r.year);
  s.min_budget_final = std::numeric_limits<double>::infinity();
  s.max_budget_final = -std::numeric_limits<double>::infinity();
  std::array<long, 4> counts{};
  for (const YearRecord& r : records) {
    ++counts[static_cast<std::size_t>(r.activity)];
    if (r.year == last_year) {
      s.min_budget_final = std::min(s.min_budget_final, r.budget);
      s.max_budget_final = std::max(s.max_budget_final, r.budget);
    }
  }
  const double total = static_cast<double>(records.size());
  s.pct_both = 100.0 * counts[static_cast<std::size_t>(ActivityClass::kBoth)] / total;
  s.pct_irrig_only = 100.0 * counts[static_cast<std::size_t>(ActivityClass::kFarmingOnly)] / total;
  s.pct_fish_only = 100.0 * counts[static_cast<std::size_t>(ActivityClass::kFishingOnly)] / total;
  s.pct_none = 100.0 * counts[static_cast<std::size_t>(ActivityClass::kNone)] / total;
  return s;
}

std::vector<MonthlyInflow> InflowSeries(const RunConfig& config) {
  if (!config.inflow_csv.empty()) return LoadInflowCsv(config.inflow_csv);
  return GenerateSyntheticInflow(config.synthetic_inflow, config.horizon, config.seed);
}

std::unique_ptr<Pipeline> MakePipeline(const RunConfig& config, LlmGateway* gateway) {
  switch (config.pipeline) {
    case PipelineKind::kProcedural:
      return std::make_unique<ProceduralPipeline>(config.ecology, config.policy);
    case PipelineKind::kCentralized: {
      AuthorityState authority;
      authority.budget = config.authority_budget.value_or(config.n_households * config.initial_budget);
      authority.window = config.authority_window;
      return std::make_unique<CentralizedPipeline>(config.ecology, config.policy, std::move(authority));
    }
    case PipelineKind::kExpertEgta:
      return std::make_unique<ExpertEgtaPipeline>(config.ecology, config.policy);
    case PipelineKind::kGenerative:
    case PipelineKind::kNaiveEgta: {
      if (!gateway) throw ConfigError(fmt::format("{} needs a gateway", PipelineName(config.pipeline)));
      PromptSet prompts = LoadPromptSet(config.prompts_dir, config.behaviour);
      if (config.pipeline == PipelineKind::kGenerative) {
        return std::make_unique<GenerativePipeline>(config.ecology, config.policy, std::move(prompts), *gateway);
      }
      return std::make_unique<NaiveEgtaPipeline>(config.ecology, config.policy, std::move(prompts), *gateway);
    }
  }
  throw ConfigError("unknown pipeline");
}

RunArtifacts RunSimulation(const RunConfig& config, const YearObserver& observer) {
  config.Validate();
  const std::vector<MonthlyInflow> series = InflowSeries(config);
  if (series.empty()) throw ConfigError("inflow series is empty");

  std::unique_ptr<LlmGateway> gateway;
  if (UsesGateway(config.pipeline)) gateway = std::make_unique<LlmGateway>(EffectiveGateway(config));
  std::unique_ptr<Pipeline> pipeline = MakePipeline(config, gateway.get());
  std::mt19937_64 rng(config.seed ^ kDecisionStreamSalt);

  RunArtifacts a;
  a.pipeline = config.pipeline;
  a.tau = config.policy.tau;
  a.behaviour = config.behaviour;
  a.seed = config.seed;
  a.horizon = config.horizon;
  a.n_households = config.n_households;
  a.llm_backed = gateway != nullptr;
  a.records.reserve(static_cast<std::size_t>(config.horizon) * config.n_households);

  WorldState world = MakeInitialWorld(config.n_households, config.initial_budget, config.initial_fish_per_class,
                                      config.initial_last_yield);
  for (int y = 0; y < config.horizon; ++y) {
    const RiverYear river = RiverYearAt(series, y, config.river_layout);
    const YearContext ctx{y + 1, river.AnnualTotal(), &rng};
    std::vector<Decision> decisions;
    try {
      decisions = pipeline->Decide(world, ctx);
    } catch (const RunError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(fmt::format("year {}: {} pipeline failed: {}", y + 1, pipeline->name(), e.what()), y + 1, 0);
    }
    YearOutcome outcome = AdvanceYear(world, river, decisions, config.ecology);
    if (observer) observer(outcome);
    pipeline->Observe(outcome);
    a.records.insert(a.records.end(), outcome.records.begin(), outcome.records.end());
    a.fish_adults.push_back(outcome.state.fish.AdultTotal());
    world = std::move(outcome.state);
  }
  a.events = pipeline->events();
  if (gateway) {
    a.requests = gateway->log();
    a.network_requests = gateway->http_requests();
  }
  a.summary = Summarize(a.records);
  return a;
}

std::vector<RunConfig> ExpandGrid(const RunConfig& base, const SweepGrid& grid) {
  const auto pipelines = grid.pipelines.empty() ? std::vector<PipelineKind>{base.pipeline} : grid.pipelines;
  const auto taus = grid.taus.empty() ? std::vector<double>{base.policy.tau} : grid.taus;
  const auto behaviours = grid.behaviours.empty() ? std::vector<BehaviourKind>{base.behaviour} : grid.behaviours;
  const auto seeds = grid.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : grid.seeds;
  std::vector<RunConfig> cells;
  for (PipelineKind p : pipelines)
    for (double t : taus)
      for (BehaviourKind b : behaviours)
        for (std::uint64_t s : seeds) {
          RunConfig c = base;
          c.pipeline = p;
          c.policy.tau = t;
          c.behaviour = b;
          c.seed = s;
          cells.push_back(std::move(c));
        }
  return cells;
}

std::vector<SweepRow> SweepSerial(const RunConfig& base, const SweepGrid& grid, const std::filesystem::path& out_dir) {
  const std::vector<RunConfig> cells = ExpandGrid(base, grid);
  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) rows.push_back(RunCell(cells[i], out_dir, i));
  return rows;
}

std::vector<SweepRow> Sweep(const RunConfig& base, const SweepGrid& grid, const std::filesystem::path& out_dir) {
  const std::vector<RunConfig> cells = ExpandGrid(base, grid);
  std::vector<SweepRow> rows(cells.size());
  const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) rows[i] = RunCell(cells[i], out_dir, static_cast<std::size_t>(i));
  return rows;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "pipeline,tau,behaviour,seed,status,min_budget_y_final,max_budget_y_final,pct_both,pct_irrig_only,"
      "pct_fish_only,pct_none,fallback_events,error\n";
  for (const SweepRow& r : rows) {
    if (r.ok) {
      out += fmt::format("{},{},{},{},ok,{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{},\n", PipelineName(r.pipeline), r.tau,
                         BehaviourName(r.behaviour), r.seed, r.summary.min_budget_final, r.summary.max_budget_final,
                         r.summary.pct_both, r.summary.pct_irrig_only, r.summary.pct_fish_only, r.summary.pct_none,
                         r.fallback_events);
    } else {
      out += fmt::format("{},{},{},{},failed,,,,,,,,{}\n", PipelineName(r.pipeline), r.tau, BehaviourName(r.behaviour),
                         r.seed, CsvField(r.error));
    }
  }
  return out;
}

bool CalibrationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CalibrationCheck& c) { return c.skipped || c.passed; });
}

CalibrationReport CalibrateCheck(const RunConfig& config, const std::vector<double>& taus) {
  if (config.pipeline != PipelineKind::kExpertEgta) {
    throw ConfigError(fmt::format("calibrate-check needs pipeline expert-egta (got {})", PipelineName(config.pipeline)));
  }
  CalibrationReport report;
  const bool horizon_ok = config.horizon >= kMinCalibrationHorizon;
  report.checks.push_back({"horizon", false, horizon_ok,
                           fmt::format("horizon {} (need >= {})", config.horizon, kMinCalibrationHorizon)});
  const bool any_zero = std::any_of(taus.begin(), taus.end(), [](double t) { return t == 0.0; });
  const bool any_positive = std::any_of(taus.begin(), taus.end(), [](double t) { return t > 0.0; });
  if (!horizon_ok) {
    for (const char* name : {"tragedy at tau = 0", "sustainability at tau > 0"}) {
      report.checks.push_back({name, true, false, "insufficient horizon"});
    }
    return report;
  }

  SweepGrid grid;
  grid.taus = taus;
  report.rows = Sweep(config, grid);
  for (const SweepRow& r : report.rows) {
    if (!r.ok) {
      report.checks.push_back({fmt::format("tau={} run", r.tau), false, false, r.error});
      continue;
    }
    const SummaryRow& s = r.summary;
    if (r.tau == 0.0) {
      report.checks.push_back({fmt::format("tau={}: some final budget < 0", r.tau), false, s.min_budget_final < 0.0,
                               fmt::format("min final budget {:.2f}", s.min_budget_final)});
      report.checks.push_back({fmt::format("tau={}: pct_both < 50", r.tau), false, s.pct_both < 50.0,
                               fmt::format("pct_both {:.2f}", s.pct_both)});
    } else {
      report.checks.push_back({fmt::format("tau={}: all final budgets >= 0", r.tau), false, s.min_budget_final >= 0.0,
                               fmt::format("min final budget {:.2f}", s.min_budget_final)});
      report.checks.push_back({fmt::format("tau={}: pct_both = 100", r.tau), false, s.pct_both >= 100.0 - 1e-9,
                               fmt::format("pct_both {:.2f}", s.pct_both)});
    }
  }
  if (!any_zero) report.checks.push_back({"tragedy at tau = 0", true, false, "tau 0 not requested"});
  if (!any_positive) report.checks.push_back({"sustainability at tau > 0", true, false, "no positive tau requested"});
  return report;
}

std::string FormatReport(const CalibrationReport& report) {
  std::string out;
  for (const CalibrationCheck& c : report.checks) {
    out += fmt::format("{:<5} {} ({})\n", c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL"), c.name, c.detail);
  }
  out += fmt::format("calibration {}\n", report.passed() ? "passed" : "FAILED");
  return out;
}

}  // namespace egta
