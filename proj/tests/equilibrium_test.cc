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

#include <algorithm>
#include <numeric>
#include <vector>

#include "egta/empirical_games.hpp"
#include "egta/equilibrium.hpp"
#include "egta/errors.hpp"
#include "egta/game_json.hpp"
#include "test_support.hpp"

namespace egta {
namespace {

using test::AsSet;
using test::GameOf;
using test::Gen;
using test::PureNeOracle;

BimatrixGame PrisonersDilemma() {
  return GameOf({{3, 0}, {5, 1}}, {{3, 5}, {0, 1}}, {"C", "D"}, {"C", "D"});
}

BimatrixGame MatchingPennies() { return GameOf({{1, -1}, {-1, 1}}, {{-1, 1}, {1, -1}}); }

BimatrixGame AntiCoordination() {
  return GameOf({{6, 5}, {9, 5}}, {{6, 7}, {3, 2}}, {"high", "low"}, {"high", "low"});
}

TEST_CASE("lemke-howson: prisoner's dilemma ends at mutual defection") {
  const MixedProfile p = LemkeHowson(PrisonersDilemma());
  CHECK(p.row_dist[1] == doctest::Approx(1));
  CHECK(p.col_dist[1] == doctest::Approx(1));
}

TEST_CASE("lemke-howson: matching pennies is uniform") {
  for (int label = 0; label < 4; ++label) {
    const MixedProfile p = LemkeHowson(MatchingPennies(), label);
    CHECK(p.row_dist[0] == doctest::Approx(0.5));
    CHECK(p.col_dist[0] == doctest::Approx(0.5));
  }
}

TEST_CASE("lemke-howson: anti-coordination lands on an off-diagonal pure cell") {
  const std::set<std::pair<int, int>> allowed{{0, 1}, {1, 0}};
  for (int label = 0; label < 4; ++label) {
    const MixedProfile p = LemkeHowson(AntiCoordination(), label);
    CHECK(IsEpsilonNe(AntiCoordination(), p, 1e-9));
    const SelectedEquilibrium s = SelectEquilibrium({}, p, SelectionRule::kLemkeHowson);
    if (s.pure) CHECK(allowed.count({s.pure->row, s.pure->col}) == 1);
  }
}

TEST_CASE("lemke-howson: bad input is rejected") {
  BimatrixGame g = MatchingPennies();
  CHECK_THROWS_AS(LemkeHowson(g, 4), InvalidGameError);
  g.col_payoffs = PayoffMatrix(3, 2);
  CHECK_THROWS_AS(LemkeHowson(g), InvalidGameError);
  g = MatchingPennies();
  g.row_actions.pop_back();
  CHECK_THROWS_AS(LemkeHowson(g), InvalidGameError);
  CHECK_THROWS_AS(PayoffMatrix(2, 2, {1, 2, 3}), InvalidGameError);
}

TEST_CASE("enumerate: anti-coordination counts the tied row payoff as a best response") {
  const std::set<std::pair<int, int>> expect{{0, 1}, {1, 0}};
  CHECK(AsSet(EnumeratePureNe(AntiCoordination())) == expect);
}

TEST_CASE("enumerate: matching pennies has none and a constant game has every cell") {
  CHECK(EnumeratePureNe(MatchingPennies()).empty());
  const BimatrixGame zero = MakeGame(PayoffMatrix(3, 4), PayoffMatrix(3, 4));
  CHECK(EnumeratePureNe(zero).size() == 12);
}

TEST_CASE("is_epsilon_ne on the prisoner's dilemma and matching pennies") {
  CHECK(IsEpsilonNe(PrisonersDilemma(), ToMixed({1, 1}, 2, 2), 1e-9));
  CHECK_FALSE(IsEpsilonNe(PrisonersDilemma(), ToMixed({0, 0}, 2, 2), 1e-9));
  CHECK(IsEpsilonNe(MatchingPennies(), {{0.5, 0.5}, {0.5, 0.5}}, 1e-9));
  CHECK_FALSE(IsEpsilonNe(MatchingPennies(), {{0.6, 0.6}, {0.5, 0.5}}, 1e-9));
  CHECK_THROWS_AS(IsEpsilonNe(MatchingPennies(), {{1.0}, {0.5, 0.5}}, 1e-9), InvalidGameError);
}

TEST_CASE("select_equilibrium: minimum total action, then smaller row action") {
  const MixedProfile shape{std::vector<double>(11), std::vector<double>(11)};
  SelectedEquilibrium s = SelectEquilibrium({{6, 0}, {7, 0}}, shape);
  CHECK(*s.pure == PureProfile{6, 0});
  s = SelectEquilibrium({{5, 1}, {4, 2}, {3, 3}}, shape);
  CHECK(*s.pure == PureProfile{3, 3});
  const MixedProfile fallback{{0.25, 0.75}, {0.5, 0.5}};
  s = SelectEquilibrium({}, fallback);
  CHECK_FALSE(s.pure.has_value());
  CHECK(s.profile.row_dist == fallback.row_dist);
}

TEST_CASE("solve_symmetric_cpr examples") {
  const CprSolution quad = SolveSymmetricCpr([](int e, int o) { return e * (10.0 - (e + o)); }, 2, 10);
  CHECK(quad.extraction == 3);
  CHECK(quad.is_equilibrium);
  CHECK(SolveSymmetricCpr([](int e, int) { return -1.0 * e; }, 5, 10).extraction == 0);
  CHECK(SolveSymmetricCpr([](int, int) { return 7.0; }, 5, 10).extraction == 0);
  CHECK_THROWS_AS(SolveSymmetricCpr([](int, int) { return 0.0; }, 0, 10), InvalidGameError);
}

TEST_CASE("solve_symmetric_cpr agrees with an exhaustive deviation scan") {
  const CprFishingGame g = BuildCprFishingGame(10, 1.0, 0.4, 2, 10);
  int oracle = -1;
  for (int e = 0; e <= 10 && oracle < 0; ++e) {
    bool stable = true;
    for (int d = 0; d <= 10; ++d) stable = stable && g.payoff(e, e) >= g.payoff(d, e) - 1e-9;
    if (stable) oracle = e;
  }
  REQUIRE(oracle >= 0);
  CHECK(SolveSymmetricCpr(g.payoff, g.n_players, g.e_max).extraction == oracle);
}

TEST_CASE("property: lemke-howson and selected equilibria are 1e-9 Nash on random 4x4 games") {
  Gen g(2001);
  for (int trial = 0; trial < 200; ++trial) {
    const BimatrixGame game = test::RandomGame(g, 4, 4, -10, 10);
    const int label = g.Int(0, 7);
    CHECK(IsEpsilonNe(game, LemkeHowson(game, label), 1e-9));
    CHECK(IsEpsilonNe(game, SolveGame(game).profile, 1e-9));
  }
}

TEST_CASE("property: lemke-howson terminates on degenerate integer games") {
  Gen g(2002);
  for (int trial = 0; trial < 300; ++trial) {
    const BimatrixGame game = test::RandomIntGame(g, g.Int(1, 5), g.Int(1, 5), 0, 2);
    for (int label = 0; label < game.rows() + game.cols(); ++label) {
      CHECK(IsEpsilonNe(game, LemkeHowson(game, label), 1e-9));
    }
  }
}

TEST_CASE("property: enumeration matches the brute-force oracle and selection is a member") {
  Gen g(2003);
  for (int trial = 0; trial < 300; ++trial) {
    const BimatrixGame game = test::RandomIntGame(g, g.Int(1, 6), g.Int(1, 6), -3, 3);
    const auto set = AsSet(EnumeratePureNe(game));
    CHECK(set == PureNeOracle(game));
    CHECK(AsSet(EnumeratePureNeSerial(game)) == set);
    if (!set.empty()) {
      const SelectedEquilibrium s = SolveGame(game);
      REQUIRE(s.pure.has_value());
      CHECK(set.count({s.pure->row, s.pure->col}) == 1);
    }
  }
}

TEST_CASE("property: pure-NE set is invariant to relabelling actions") {
  Gen g(2004);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = g.Int(2, 5);
    const int n = g.Int(2, 5);
    const BimatrixGame game = test::RandomIntGame(g, m, n, -2, 2);
    std::vector<int> pr(m);
    std::vector<int> pc(n);
    std::iota(pr.begin(), pr.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    std::shuffle(pr.begin(), pr.end(), g.engine());
    std::shuffle(pc.begin(), pc.end(), g.engine());
    PayoffMatrix a(m, n);
    PayoffMatrix b(m, n);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) {
        a(r, c) = game.row_payoffs(pr[r], pc[c]);
        b(r, c) = game.col_payoffs(pr[r], pc[c]);
      }
    std::set<std::pair<int, int>> back;
    for (const PureProfile& p : EnumeratePureNe(MakeGame(a, b))) back.insert({pr[p.row], pc[p.col]});
    CHECK(back == AsSet(EnumeratePureNe(game)));
  }
}

TEST_CASE("property: pure-NE set is invariant to positive affine payoff maps") {
  Gen g(2005);
  for (int trial = 0; trial < 200; ++trial) {
    const BimatrixGame game = test::RandomIntGame(g, g.Int(1, 5), g.Int(1, 5), -4, 4);
    BimatrixGame scaled = game;
    const double a = static_cast<double>(g.Int(1, 8)) / 2.0;
    const double b = g.Int(-20, 20);
    for (int r = 0; r < game.rows(); ++r)
      for (int c = 0; c < game.cols(); ++c) {
        if (trial % 2 == 0) {
          scaled.row_payoffs(r, c) = a * game.row_payoffs(r, c) + b;
        } else {
          scaled.col_payoffs(r, c) = a * game.col_payoffs(r, c) + b;
        }
      }
    CHECK(AsSet(EnumeratePureNe(scaled)) == AsSet(EnumeratePureNe(game)));
  }
}

TEST_CASE("property: 2x2 games without pure equilibria match the indifference formula") {
  Gen g(2006);
  int checked = 0;
  for (int trial = 0; trial < 2000 && checked < 100; ++trial) {
    const BimatrixGame game = test::RandomGame(g, 2, 2, -10, 10);
    if (!PureNeOracle(game, 0).empty()) continue;
    const auto& A = game.row_payoffs;
    const auto& B = game.col_payoffs;
    const double p = (B(1, 1) - B(1, 0)) / (B(0, 0) - B(1, 0) - B(0, 1) + B(1, 1));
    const double q = (A(1, 1) - A(0, 1)) / (A(0, 0) - A(0, 1) - A(1, 0) + A(1, 1));
    const MixedProfile lh = LemkeHowson(game);
    CHECK(lh.row_dist[0] == doctest::Approx(p).epsilon(1e-9));
    CHECK(lh.col_dist[0] == doctest::Approx(q).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("parallel enumeration matches the serial reference on a wide game") {
  Gen g(2007);
  const BimatrixGame game = test::RandomIntGame(g, 200, 200, 0, 3);
  CHECK(EnumeratePureNe(game) == EnumeratePureNeSerial(game));
}

TEST_CASE("game json round trip and report") {
  const BimatrixGame game = AntiCoordination();
  const BimatrixGame back = GameFromJson(GameToJson(game));
  CHECK(back.row_payoffs == game.row_payoffs);
  CHECK(back.col_actions == game.col_actions);
  const nlohmann::json report = SolveGameReport(game);
  CHECK(report["pure_equilibria"].size() == 2);
  CHECK(report["selected"]["is_nash"] == true);
  CHECK(report["selected"]["row"] == "high");
  CHECK(report["selected"]["col"] == "low");
  CHECK_THROWS_AS(GameFromJson(nlohmann::json{{"row_payoffs", {{1, 2}}}, {"col_payoffs", {{1}}}}), InvalidGameError);
  CHECK_THROWS_AS(GameFromJson(nlohmann::json{{"row_payoffs", {{1, 2}, {3}}}, {"col_payoffs", {{1, 2}, {3}}}}),
                  InvalidGameError);
}

}  // namespace
}  // namespace egta
