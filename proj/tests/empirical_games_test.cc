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
#include <vector>

#include <json.hpp>

#include "egta/empirical_games.hpp"
#include "egta/equilibrium.hpp"
#include "egta/errors.hpp"
#include "test_support.hpp"

namespace egta {
namespace {

using test::G1;
using test::Gen;
using test::PairPayoffOracle;

std::pair<double, double> Oracle(const IrrigationGameSpec& s, int su, int sd) {
  return PairPayoffOracle(su, sd, s.upstream_budget, s.downstream_budget, s.irrigation_cost, s.total_water,
                          s.water_per_field, s.base_yield, s.stressed_yield, s.stress_threshold, s.consumption_cost,
                          s.tax, s.upstream_fish_income, s.downstream_fish_income);
}

PureProfile Selected(const IrrigationGameSpec& spec) {
  const SelectedEquilibrium s = SolveGame(BuildIrrigationGame(spec));
  REQUIRE(s.pure.has_value());
  return *s.pure;
}

TEST_CASE("irrigated_fields examples") {
  IrrigationGameSpec s = G1();
  CHECK(IrrigatedFields(8, 5, s) == std::pair(6, 0));
  s.total_water = 200;
  CHECK(IrrigatedFields(4, 5, s) == std::pair(4, 5));
  s.upstream_budget = 20;
  CHECK(IrrigatedFields(10, 0, s).first == 2);
}

TEST_CASE("pair_payoffs on the reference instance") {
  const IrrigationGameSpec s = G1();
  const auto p = PairPayoffs(6, 0, s);
  CHECK(p == Oracle(s, 6, 0));
  CHECK(p.first == doctest::Approx(190));
  CHECK(p.second == doctest::Approx(-50));

  IrrigationGameSpec taxed = s;
  taxed.tax = 1;
  CHECK(PairPayoffs(6, 0, taxed).first == doctest::Approx(154));
  CHECK(PairPayoffs(0, 0, s) == std::pair(-50.0, -50.0));
}

TEST_CASE("a yield below the field cost makes planting dominated") {
  IrrigationGameSpec s = G1();
  s.base_yield = 5;
  s.stressed_yield = 2;
  const BimatrixGame g = BuildIrrigationGame(s);
  for (int a = 1; a <= s.max_fields; ++a)
    for (int b = 0; b <= s.max_fields; ++b) {
      CHECK(g.row_payoffs(a, b) < g.row_payoffs(0, b));
      CHECK(g.col_payoffs(b, a) <= g.col_payoffs(b, 0));
    }
  CHECK(Selected(s) == PureProfile{0, 0});
  CHECK(PairPayoffs(0, 0, s) == std::pair(-50.0, -50.0));
}

TEST_CASE("reference instance equilibria match exhaustive enumeration") {
  const IrrigationGameSpec s = G1();
  const BimatrixGame g = BuildIrrigationGame(s);
  CHECK(g.rows() == 11);
  CHECK(g.row_actions.front() == "0");
  CHECK(g.row_actions.back() == "10");
  const auto oracle = test::PureNeOracle(g);
  for (int su = 6; su <= 10; ++su) CHECK(oracle.count({su, 0}) == 1);
  CHECK(Selected(s) == PureProfile{6, 0});
}

TEST_CASE("a heavy tax pulls the equilibrium to an even split") {
  IrrigationGameSpec s = G1();
  s.tax = 4;
  const PureProfile p = Selected(s);
  CHECK(p == PureProfile{3, 3});
  CHECK(test::PureNeOracle(BuildIrrigationGame(s)).count({3, 3}) == 1);
}

TEST_CASE("selected total extraction does not grow with the tax") {
  int last = 1 << 30;
  for (double tau : {0.0, 1.0, 2.0, 4.0}) {
    IrrigationGameSpec s = G1();
    s.tax = tau;
    const PureProfile p = Selected(s);
    CHECK(p.row + p.col <= last);
    last = p.row + p.col;
  }
}

TEST_CASE("zero strategy bound gives a 1x1 game") {
  IrrigationGameSpec s = G1();
  s.max_fields = 0;
  const BimatrixGame g = BuildIrrigationGame(s);
  CHECK(g.rows() == 1);
  CHECK(g.cols() == 1);
  CHECK(Selected(s) == PureProfile{0, 0});
}

TEST_CASE("spec validation") {
  IrrigationGameSpec s = G1();
  s.irrigation_cost = 0;
  CHECK_THROWS_AS(BuildIrrigationGame(s), ConfigError);
  s = G1();
  s.stressed_yield = s.base_yield;
  CHECK_THROWS_AS(BuildIrrigationGame(s), ConfigError);
  s = G1();
  s.tax = -1;
  CHECK_THROWS_AS(BuildIrrigationGame(s), ConfigError);
}

IrrigationGameSpec RandomSpec(Gen& g) {
  IrrigationGameSpec s;
  s.upstream_budget = g.Real(-50, 400);
  s.downstream_budget = g.Real(-50, 400);
  s.irrigation_cost = g.Real(1, 20);
  s.total_water = g.Real(0, 200);
  s.water_per_field = g.Real(1, 20);
  s.base_yield = g.Real(5, 80);
  s.stressed_yield = g.Real(0, s.base_yield - 1);
  s.stress_threshold = g.Int(0, 12);
  s.consumption_cost = g.Real(0, 80);
  s.tax = g.Real(0, 3);
  s.upstream_fish_income = g.Real(0, 50);
  s.downstream_fish_income = g.Real(0, 50);
  s.max_fields = g.Int(0, 10);
  return s;
}

TEST_CASE("property: payoffs match the direct formula and respect the field bounds") {
  Gen g(3001);
  for (int trial = 0; trial < 300; ++trial) {
    const IrrigationGameSpec s = RandomSpec(g);
    const int su = g.Int(0, s.max_fields);
    const int sd = g.Int(0, s.max_fields);
    const auto [fu, fd] = IrrigatedFields(su, sd, s);
    CHECK(fu >= 0);
    CHECK(fd >= 0);
    CHECK(fu + fd <= s.total_water / s.water_per_field + 1);
    CHECK(fu <= std::min<double>(su, std::max(s.upstream_budget / s.irrigation_cost, 0.0)) + 1e-9);
    CHECK(fd <= std::min<double>(sd, std::max(s.downstream_budget / s.irrigation_cost, 0.0)) + 1e-9);
    const auto p = PairPayoffs(su, sd, s);
    const auto o = Oracle(s, su, sd);
    CHECK(p.first == doctest::Approx(o.first));
    CHECK(p.second == doctest::Approx(o.second));
  }
}

TEST_CASE("property: with no tax and no fishing income the idle cell costs consumption only") {
  Gen g(3002);
  for (int trial = 0; trial < 100; ++trial) {
    IrrigationGameSpec s = RandomSpec(g);
    s.tax = 0;
    s.upstream_fish_income = 0;
    s.downstream_fish_income = 0;
    CHECK(PairPayoffs(0, 0, s) == std::pair(-s.consumption_cost, -s.consumption_cost));
  }
}

TEST_CASE("property: payoffs are non-increasing in the tax") {
  Gen g(3003);
  for (int trial = 0; trial < 300; ++trial) {
    IrrigationGameSpec s = RandomSpec(g);
    const int su = g.Int(0, s.max_fields);
    const int sd = g.Int(0, s.max_fields);
    if (su + sd == 0) continue;
    IrrigationGameSpec more = s;
    more.tax = s.tax + g.Real(0, 2);
    CHECK(PairPayoffs(su, sd, more).first <= PairPayoffs(su, sd, s).first + 1e-12);
    CHECK(PairPayoffs(su, sd, more).second <= PairPayoffs(su, sd, s).second + 1e-12);
  }
}

TEST_CASE("property: parallel game fill matches the serial reference") {
  Gen g(3004);
  for (int trial = 0; trial < 20; ++trial) {
    IrrigationGameSpec s = RandomSpec(g);
    s.max_fields = g.Int(0, 200);
    const BimatrixGame a = BuildIrrigationGame(s);
    const BimatrixGame b = BuildIrrigationGameSerial(s);
    CHECK(a.row_payoffs == b.row_payoffs);
    CHECK(a.col_payoffs == b.col_payoffs);
  }
}

TEST_CASE("cpr fishing game examples") {
  const CprFishingGame rich = BuildCprFishingGame(1000, 5, 0, 9, 10);
  CHECK(SolveSymmetricCpr(rich.payoff, rich.n_players, rich.e_max).extraction == 10);
  const CprFishingGame empty = BuildCprFishingGame(0, 5, 1, 9, 10);
  CHECK(SolveSymmetricCpr(empty.payoff, empty.n_players, empty.e_max).extraction == 0);
  const CprFishingGame small = BuildCprFishingGame(10, 1, 0.4, 2, 10);
  CHECK(small.payoff(3, 2) == doctest::Approx(3 * 1.0 * 1.0 - 1.2));
  CHECK(small.payoff(6, 6) == doctest::Approx(6 * 10.0 / 12 - 2.4));
  CHECK(small.payoff(0, 0) == 0);
}

std::string FixtureExtractionText() {
  const nlohmann::json fixture =
      nlohmann::json::parse(test::ReadText(test::SourceDir() / "prompts" / "stub" / "naive.json"));
  for (const auto& e : fixture)
    if (e.contains("fingerprint")) return e["response"].get<std::string>();
  return {};
}

TEST_CASE("parse_llm_game reads the shipped fixture into two situations") {
  const auto models = ParseLlmGame(FixtureExtractionText());
  REQUIRE(models.size() == 2);
  CHECK(models[0].kind == ActionSituationKind::kPairwiseCooperation);
  CHECK(models[0].actions == std::vector<std::string>{"high", "low"});
  CHECK(models[0].participants.size() == 2);
  CHECK(models[1].kind == ActionSituationKind::kCommonPoolResource);
  CHECK(models[1].participants.size() == 9);
  CHECK(models[1].actions.size() == 11);
  CHECK(models[1].actions.front() == "0");
  CHECK_FALSE(models[1].AsBimatrix().has_value());
}

TEST_CASE("parse_llm_game fills the payoff table row-major") {
  const auto models = ParseLlmGame(FixtureExtractionText());
  const auto& cells = models[0].payoff_cells;
  REQUIRE(cells.size() == 4);
  CHECK(cells[1] == std::array<double, 2>{5, 7});
  CHECK(cells[2] == std::array<double, 2>{9, 3});
  const auto g = models[0].AsBimatrix();
  REQUIRE(g.has_value());
  CHECK((*g).row_payoffs(1, 0) == 9);
  CHECK((*g).col_payoffs(0, 1) == 7);

  const auto nested = ParseLlmGame(
      R"({"name":"x","kind":"prisoner's dilemma","participants":["a","b"],"actions":["c","d"],"payoffs":[[[1,1],[0,2]],[[2,0],[0.5,0.5]]]})");
  REQUIRE(nested.size() == 1);
  CHECK(nested[0].payoff_cells[2] == std::array<double, 2>{2, 0});
}

TEST_CASE("parse_llm_game rejects unusable replies with the offending text") {
  CHECK_THROWS_AS(ParseLlmGame(""), SchemaError);
  CHECK_THROWS_AS(ParseLlmGame("no structure here at all"), SchemaError);
  CHECK_THROWS_AS(ParseLlmGame(R"({"name":"x","participants":["a"],"actions":["c"]})"), SchemaError);
  CHECK_THROWS_AS(ParseLlmGame(R"({"name":"x","participants":["a","b"],"actions":[]})"), SchemaError);
  CHECK_THROWS_AS(ParseLlmGame(R"({"name":"x","participants":["a","b"],"actions":["c","d"],"payoffs":[[1,2]]})"),
                  SchemaError);
  try {
    ParseLlmGame("garbage");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.offending_text() == "garbage");
  }
}

}  // namespace
}  // namespace egta
