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

#ifndef EGTA_EMPIRICAL_GAMES_HPP_
#define EGTA_EMPIRICAL_GAMES_HPP_

// Empirical games of the two action situations on the river: the pairwise
// irrigation game between neighbouring farmers and the N-player fishing
// commons. Also the parser for game models proposed by a language model.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "egta/equilibrium.hpp"

namespace egta {

// One upstream/downstream pair. The upstream farmer withdraws first.
struct IrrigationGameSpec {
  double upstream_budget = 0.0;
  double downstream_budget = 0.0;
  double irrigation_cost = 10.0;  // per irrigated field
  double total_water = 0.0;       // volume reaching the upstream node
  double water_per_field = 10.0;
  double base_yield = 50.0;
  double stressed_yield = 25.0;
  int stress_threshold = 6;  // fields irrigated by the pair
  double consumption_cost = 50.0;
  double tax = 0.0;  // Pigouvian coefficient on (s_u + s_d) * s_own
  double upstream_fish_income = 0.0;
  double downstream_fish_income = 0.0;
  int max_fields = 10;

  void Validate() const;
};

// Irrigated fields (f_u, f_d) for strategies (s_u, s_d): capped by the
// strategy, by what the budget pays for, and by water, upstream first.
std::pair<int, int> IrrigatedFields(int s_upstream, int s_downstream, const IrrigationGameSpec& spec);

// (pi_u, pi_d): yield on irrigated fields plus fishing income, minus the
// irrigation and consumption costs and the tax.
std::pair<double, double> PairPayoffs(int s_upstream, int s_downstream, const IrrigationGameSpec& spec);

// (max_fields+1)^2 game, rows = upstream strategy, cols = downstream.
BimatrixGame BuildIrrigationGame(const IrrigationGameSpec& spec);
BimatrixGame BuildIrrigationGameSerial(const IrrigationGameSpec& spec);

struct CprFishingGame {
  CprPayoff payoff;
  int n_players = 0;
  int e_max = 0;
};

// u(e, O) = price * e * min(1, stock / (e + O)) - effort_cost * e,
// with the ratio taken as 1 when e + O = 0.
CprFishingGame BuildCprFishingGame(double adult_stock_estimate, double fish_price, double effort_cost,
                                   int n_players, int e_max);

enum class ActionSituationKind { kPairwiseCooperation, kCommonPoolResource, kOther };
std::string_view KindName(ActionSituationKind kind);

struct ActionSituationModel {
  std::string name;
  ActionSituationKind kind = ActionSituationKind::kOther;
  std::vector<std::string> participants;
  std::vector<std::string> actions;
  // Row-major over actions x actions, (row payoff, column payoff); empty when
  // the model gives no table.
  std::vector<std::array<double, 2>> payoff_cells;

  // The table as a symmetric-action bimatrix game, if one was given.
  std::optional<BimatrixGame> AsBimatrix() const;
};

// Parses game models from model output. Accepts a JSON array of situations,
// an object with an "action_situations" array, or a single situation object;
// fenced or bare. Throws SchemaError carrying the text when nothing usable is
// found or a situation violates the schema.
std::vector<ActionSituationModel> ParseLlmGame(std::string_view text);

}  // namespace egta

#endif  // EGTA_EMPIRICAL_GAMES_HPP_
