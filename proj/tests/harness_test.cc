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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "egta/config.hpp"
#include "egta/errors.hpp"
#include "egta/harness.hpp"
#include "egta/outputs.hpp"
#include "test_support.hpp"

namespace egta {
namespace {

namespace fs = std::filesystem;

RunConfig Shipped() { return LoadConfig(test::SourceDir() / "config" / "default.yaml"); }

RunConfig Short(PipelineKind kind, int horizon = 12) {
  RunConfig c = Shipped();
  c.pipeline = kind;
  c.horizon = horizon;
  c.gateway.backoff_ms = 0;
  return c;
}

std::string FirstLine(const std::string& s) { return s.substr(0, s.find('\n')); }

TEST_CASE("config: the shipped file loads with its documented values") {
  const RunConfig c = Shipped();
  CHECK(c.pipeline == PipelineKind::kExpertEgta);
  CHECK(c.horizon == 100);
  CHECK(c.n_households == 9);
  CHECK(c.policy.tau == 0.25);
  CHECK(c.ecology.stressed_yield == 23);
  CHECK(c.river_layout.irrigation_months == std::vector<int>{5, 6, 7, 8, 9});
  CHECK(fs::equivalent(c.prompts_dir, test::SourceDir() / "prompts"));
  CHECK(c.initial_last_yield == c.policy.subsistence_income);
}

TEST_CASE("config: unknown keys, bad values and bad types are rejected") {
  CHECK_THROWS_AS(ParseConfig("horizonn: 5", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("policy:\n  max_feilds: 3", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("pipeline: anarchy", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("horizon: many", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("horizon: 0", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("tau: -1", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("ecology:\n  stressed_yield: 60", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[1, 2]", "."), ConfigError);
  CHECK_THROWS_AS(ParseConfig("a: [unclosed", "."), ConfigError);
  CHECK_THROWS_AS(LoadConfig("/nonexistent/egta.yaml"), IoError);
}

TEST_CASE("config: relative paths resolve against the config file") {
  const auto dir = test::TempDir("cfg_paths");
  const RunConfig c = ParseConfig("inflow:\n  csv: q.csv\nprompts:\n  dir: p\n", dir);
  CHECK(c.inflow_csv == dir / "q.csv");
  CHECK(c.prompts_dir == dir / "p");
  const RunConfig d = ParseConfig("", dir);
  CHECK(d.pipeline == PipelineKind::kProcedural);
}

TEST_CASE("config: the stub fixture defaults by pipeline") {
  RunConfig c = DefaultRunConfig();
  c.pipeline = PipelineKind::kNaiveEgta;
  CHECK(EffectiveGateway(c).fixture.filename() == "naive.json");
  c.pipeline = PipelineKind::kGenerative;
  CHECK(EffectiveGateway(c).fixture.filename() == "generative.json");
  CHECK(UsesGateway(PipelineKind::kGenerative));
  CHECK_FALSE(UsesGateway(PipelineKind::kCentralized));
  CHECK(ParsePipeline("naive-egta") == PipelineKind::kNaiveEgta);
}

TEST_CASE("summarize: final-year budgets and activity shares") {
  std::vector<YearRecord> rs(4);
  rs[0] = {1, 1, 0, 0, 0, 0, 0, 0, 0, 10, 0, ActivityClass::kBoth};
  rs[1] = {1, 2, 0, 0, 0, 0, 0, 0, 0, -5, 0, ActivityClass::kNone};
  rs[2] = {2, 1, 0, 0, 0, 0, 0, 0, 0, 30, 0, ActivityClass::kBoth};
  rs[3] = {2, 2, 0, 0, 0, 0, 0, 0, 0, 20, 0, ActivityClass::kFishingOnly};
  const SummaryRow s = Summarize(rs);
  CHECK(s.min_budget_final == 20);
  CHECK(s.max_budget_final == 30);
  CHECK(s.pct_both == 50);
  CHECK(s.pct_fish_only == 25);
  CHECK(s.pct_none == 25);
  CHECK(s.pct_irrig_only == 0);
}

TEST_CASE("run: one idle year costs exactly the consumption cost") {
  RunConfig c = Short(PipelineKind::kProcedural, 1);
  c.policy.max_fields = 0;
  c.policy.low_action = 0;
  c.policy.base_fish_target = 0;
  const RunArtifacts a = RunSimulation(c);
  REQUIRE(a.records.size() == 9);
  for (const YearRecord& r : a.records) {
    CHECK(r.budget == c.initial_budget - c.ecology.consumption_cost);
    CHECK(r.activity == ActivityClass::kNone);
  }
}

TEST_CASE("run: record counts, share totals and determinism for every pipeline") {
  for (PipelineKind k : {PipelineKind::kProcedural, PipelineKind::kCentralized, PipelineKind::kExpertEgta,
                         PipelineKind::kGenerative, PipelineKind::kNaiveEgta}) {
    CAPTURE(PipelineName(k));
    const RunConfig c = Short(k);
    const RunArtifacts a = RunSimulation(c);
    const RunArtifacts b = RunSimulation(c);
    CHECK(a.records.size() == static_cast<std::size_t>(c.horizon * c.n_households));
    CHECK(a.fish_adults.size() == static_cast<std::size_t>(c.horizon));
    const SummaryRow& s = a.summary;
    CHECK(s.pct_both + s.pct_irrig_only + s.pct_fish_only + s.pct_none == doctest::Approx(100));
    CHECK(RecordsCsv(a) == RecordsCsv(b));
    CHECK(a.network_requests == 0);
    CHECK(a.llm_backed == UsesGateway(k));
  }
}

TEST_CASE("run: different seeds give different untaxed expert runs") {
  RunConfig c = Short(PipelineKind::kExpertEgta, 30);
  c.policy.tau = 0;
  const std::string a = RecordsCsv(RunSimulation(c));
  c.seed = 7;
  CHECK(RecordsCsv(RunSimulation(c)) != a);
}

TEST_CASE("run: the observer sees water and fish balances hold every year") {
  RunConfig c = Short(PipelineKind::kExpertEgta, 40);
  c.policy.tau = 0;
  int years = 0;
  RunSimulation(c, [&](const YearOutcome& o) {
    ++years;
    for (int m = 0; m < kMonths; ++m) {
      double taken = 0;
      for (double w : o.routing.withdrawals[m]) taken += w;
      CHECK(std::abs(o.river.monthly_inflow[m] - taken - o.routing.lake_inflow_by_month[m]) <= 1e-9);
    }
    double caught = 0;
    for (double x : o.fish.catches) caught += x;
    CHECK(caught <= o.fish.pre_harvest_adults + 1e-9);
    for (double f : o.state.fish.classes) CHECK(f >= 0);
  });
  CHECK(years == 40);
}

TEST_CASE("run: without a tax the shipped defaults end with a household in debt") {
  RunConfig c = Shipped();
  c.policy.tau = 0;
  const RunArtifacts a = RunSimulation(c);
  CHECK(a.summary.min_budget_final < 0);
  CHECK(a.summary.pct_both < 50);
}

TEST_CASE("run: a missing fixture is an io error") {
  RunConfig c = Short(PipelineKind::kGenerative);
  c.gateway.fixture = "/nonexistent/fixture.json";
  CHECK_THROWS_AS(RunSimulation(c), IoError);
}

TEST_CASE("run: the inflow csv replaces the synthetic series") {
  const auto dir = test::TempDir("run_csv");
  std::string text = "year,month,inflow\n";
  for (int m = 1; m <= 12; ++m) text += fmt::format("2000,{},60\n", m);
  test::WriteText(dir / "q.csv", text);
  RunConfig c = Short(PipelineKind::kProcedural, 3);
  c.inflow_csv = dir / "q.csv";
  int years = 0;
  RunSimulation(c, [&](const YearOutcome& o) {
    ++years;
    CHECK(o.river.AnnualTotal() == doctest::Approx(720));
  });
  CHECK(years == 3);
}

TEST_CASE("sweep: one row per cell and failures become rows") {
  RunConfig base = Short(PipelineKind::kExpertEgta, 10);
  SweepGrid grid;
  grid.taus = {0, 1};
  grid.seeds = {1, 2};
  const auto rows = Sweep(base, grid);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].seed == 2);
  CHECK(rows[2].tau == 1);
  for (const auto& r : rows) CHECK(r.ok);
  CHECK(SweepCsv(rows) == SweepCsv(SweepSerial(base, grid)));

  RunConfig broken = Short(PipelineKind::kGenerative, 2);
  broken.gateway.fixture = "/nonexistent/fixture.json";
  const auto bad = Sweep(broken, SweepGrid{});
  REQUIRE(bad.size() == 1);
  CHECK_FALSE(bad[0].ok);
  const std::string csv = SweepCsv(bad);
  CHECK(FirstLine(csv) ==
        "pipeline,tau,behaviour,seed,status,min_budget_y_final,max_budget_y_final,pct_both,pct_irrig_only,"
        "pct_fish_only,pct_none,fallback_events,error");
  CHECK(csv.find(",failed,") != std::string::npos);
}

TEST_CASE("sweep: behaviours and pipelines expand in grid order") {
  RunConfig base = Short(PipelineKind::kProcedural, 2);
  SweepGrid grid;
  grid.pipelines = {PipelineKind::kProcedural, PipelineKind::kGenerative};
  grid.behaviours = {BehaviourKind::kAltruistic, BehaviourKind::kRational};
  const auto cells = ExpandGrid(base, grid);
  REQUIRE(cells.size() == 4);
  CHECK(cells[1].behaviour == BehaviourKind::kRational);
  CHECK(cells[2].pipeline == PipelineKind::kGenerative);
}

TEST_CASE("outputs: files, headers and byte-identical reruns") {
  const RunConfig c = Short(PipelineKind::kGenerative, 5);
  const auto dir = test::TempDir("emit");
  EmitOutputs(RunSimulation(c), dir / "a");
  EmitOutputs(RunSimulation(c), dir / "b");
  for (const char* f : {"records.csv", "summary.csv", "events.csv", "budgets.svg", "activity.svg", "requests.jsonl"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(test::ReadText(dir / "a" / f) == test::ReadText(dir / "b" / f));
  }
  CHECK(FirstLine(test::ReadText(dir / "a" / "records.csv")) ==
        "year,household,planted,irrigated,delivered,crop_income,catch,fish_income,irrigation_cost,budget,stress,"
        "activity");
  CHECK(test::ReadText(dir / "a" / "budgets.svg").find("<svg") != std::string::npos);

  EmitOutputs(RunSimulation(Short(PipelineKind::kProcedural, 2)), dir / "c");
  CHECK_FALSE(fs::exists(dir / "c" / "requests.jsonl"));
}

TEST_CASE("outputs: an unwritable directory is an io error") {
  const auto dir = test::TempDir("emit_bad");
  test::WriteText(dir / "file", "x");
  CHECK_THROWS_AS(EmitOutputs(RunSimulation(Short(PipelineKind::kProcedural, 1)), dir / "file" / "sub"), IoError);
}

TEST_CASE("calibrate: guards on pipeline, horizon and requested taus") {
  RunConfig c = Shipped();
  c.pipeline = PipelineKind::kProcedural;
  CHECK_THROWS_AS(CalibrateCheck(c), ConfigError);

  c = Shipped();
  c.horizon = 5;
  CalibrationReport r = CalibrateCheck(c);
  CHECK_FALSE(r.passed());
  CHECK(FormatReport(r).find("FAIL  horizon") != std::string::npos);

  c = Shipped();
  r = CalibrateCheck(c, {0.25});
  CHECK(r.passed());
  CHECK(FormatReport(r).find("SKIP  tragedy at tau = 0") != std::string::npos);
}

TEST_CASE("calibrate: the shipped defaults pass") {
  const CalibrationReport r = CalibrateCheck(Shipped());
  CHECK(r.passed());
  CHECK(r.rows.size() == 3);
  CHECK(FormatReport(r).find("calibration passed") != std::string::npos);
}

}  // namespace
}  // namespace egta
