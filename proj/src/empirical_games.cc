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

#include "egta/empirical_games.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "egta/errors.hpp"
#include "egta/llm_gateway.hpp"

namespace egta {
namespace {

using nlohmann::json;

constexpr double kFloorSlack = 1e-9;
constexpr long kParallelCells = 1 << 14;

int FloorNonNegative(double v) { return v <= 0 ? 0 : static_cast<int>(std::floor(v + kFloorSlack)); }

std::vector<std::string> DefaultLabels(int n) {
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

std::string Squash(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

ActionSituationKind ClassifyKind(std::string_view text) {
  const std::string s = Squash(text);
  for (const char* key : {"commonpool", "cpr", "commons"})
    if (s.find(key) != std::string::npos) return ActionSituationKind::kCommonPoolResource;
  for (const char* key : {"cooperation", "pairwise", "coordination", "prisoner", "chicken", "2player", "twoplayer"})
    if (s.find(key) != std::string::npos) return ActionSituationKind::kPairwiseCooperation;
  return ActionSituationKind::kOther;
}

std::string LabelOf(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

[[noreturn]] void Fail(const std::string& why, std::string_view text) {
  throw SchemaError(fmt::format("llm game model: {}", why), std::string(text));
}

std::array<double, 2> CellOf(const json& c, std::string_view text) {
  if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
    Fail("payoff cells must be [row, col] number pairs", text);
  }
  return {c[0].get<double>(), c[1].get<double>()};
}

ActionSituationModel ParseSituation(const json& j, std::string_view text) {
  if (!j.is_object()) Fail("situation must be an object", text);
  ActionSituationModel as;
  if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty()) {
    Fail("situation needs a non-empty 'name'", text);
  }
  as.name = j["name"].get<std::string>();

  std::string kind_text;
  for (const char* key : {"kind", "game", "type", "game_type"})
    if (j.contains(key) && j[key].is_string()) kind_text += j[key].get<std::string>() + " ";
  as.kind = ClassifyKind(kind_text.empty() ? as.name : kind_text);

  if (!j.contains("participants")) Fail(fmt::format("'{}' lists no participants", as.name), text);
  const json& parts = j["participants"];
  if (parts.is_array()) {
    for (const json& p : parts) as.participants.push_back(LabelOf(p));
  } else if (parts.is_number_integer()) {
    for (long long i = 1; i <= parts.get<long long>(); ++i) as.participants.push_back(fmt::format("player {}", i));
  }
  if (as.participants.size() < 2) Fail(fmt::format("'{}' needs at least 2 participants", as.name), text);

  if (!j.contains("actions")) Fail(fmt::format("'{}' lists no actions", as.name), text);
  const json& acts = j["actions"];
  if (acts.is_array()) {
    for (const json& a : acts) as.actions.push_back(LabelOf(a));
  } else if (acts.is_object() && acts.contains("min") && acts.contains("max") && acts["min"].is_number_integer() &&
             acts["max"].is_number_integer()) {
    for (long long v = acts["min"].get<long long>(); v <= acts["max"].get<long long>(); ++v)
      as.actions.push_back(std::to_string(v));
  }
  if (as.actions.empty()) Fail(fmt::format("'{}' needs at least one action", as.name), text);

  if (j.contains("payoffs") && !j["payoffs"].is_null()) {
    const json& p = j["payoffs"];
    if (!p.is_array()) Fail("'payoffs' must be an array", text);
    for (const json& entry : p) {
      // Either a flat list of cells or a list of rows of cells.
      if (entry.is_array() && !entry.empty() && entry[0].is_array()) {
        for (const json& c : entry) as.payoff_cells.push_back(CellOf(c, text));
      } else {
        as.payoff_cells.push_back(CellOf(entry, text));
      }
    }
    const std::size_t k = as.actions.size();
    if (as.payoff_cells.size() != k * k) {
      Fail(fmt::format("'{}' has {} payoff cells for {} actions", as.name, as.payoff_cells.size(), k), text);
    }
  }
  return as;
}

}  // namespace

void IrrigationGameSpec::Validate() const {
  if (!(irrigation_cost > 0)) throw ConfigError("irrigation game: cost per field must be > 0");
  if (!(water_per_field > 0)) throw ConfigError("irrigation game: water per field must be > 0");
  if (!(stressed_yield < base_yield)) throw ConfigError("irrigation game: stressed yield must be below base yield");
  if (max_fields < 0) throw ConfigError("irrigation game: max_fields must be >= 0");
  if (!(tax >= 0)) throw ConfigError("irrigation game: tax must be >= 0");
}

std::pair<int, int> IrrigatedFields(int s_upstream, int s_downstream, const IrrigationGameSpec& spec) {
  const double water_fields = spec.total_water / spec.water_per_field;
  const int f_u = FloorNonNegative(std::min({static_cast<double>(s_upstream),
                                              spec.upstream_budget / spec.irrigation_cost, water_fields}));
  const int f_d = FloorNonNegative(std::min({static_cast<double>(s_downstream),
                                              spec.downstream_budget / spec.irrigation_cost,
                                              std::max(water_fields - f_u, 0.0)}));
  return {f_u, f_d};
}

std::pair<double, double> PairPayoffs(int s_upstream, int s_downstream, const IrrigationGameSpec& spec) {
  const auto [f_u, f_d] = IrrigatedFields(s_upstream, s_downstream, spec);
  const double y = f_u + f_d <= spec.stress_threshold ? spec.base_yield : spec.stressed_yield;
  const double total = s_upstream + s_downstream;
  const double pi_u = f_u * y + spec.upstream_fish_income - (f_u * spec.irrigation_cost + spec.consumption_cost) -
                      spec.tax * total * s_upstream;
  const double pi_d = f_d * y + spec.downstream_fish_income - (f_d * spec.irrigation_cost + spec.consumption_cost) -
                      spec.tax * total * s_downstream;
  return {pi_u, pi_d};
}

BimatrixGame BuildIrrigationGameSerial(const IrrigationGameSpec& spec) {
  spec.Validate();
  const int k = spec.max_fields + 1;
  PayoffMatrix up(k, k);
  PayoffMatrix down(k, k);
  for (int su = 0; su < k; ++su) {
    for (int sd = 0; sd < k; ++sd) {
      const auto [pu, pd] = PairPayoffs(su, sd, spec);
      up(su, sd) = pu;
      down(su, sd) = pd;
    }
  }
  BimatrixGame g{std::move(up), std::move(down), DefaultLabels(k), DefaultLabels(k)};
  return g;
}

BimatrixGame BuildIrrigationGame(const IrrigationGameSpec& spec) {
  spec.Validate();
  const int k = spec.max_fields + 1;
  PayoffMatrix up(k, k);
  PayoffMatrix down(k, k);
  const bool wide = static_cast<long>(k) * k >= kParallelCells;
#pragma omp parallel for schedule(static) if (wide)
  for (int su = 0; su < k; ++su) {
    for (int sd = 0; sd < k; ++sd) {
      const auto [pu, pd] = PairPayoffs(su, sd, spec);
      up(su, sd) = pu;
      down(su, sd) = pd;
    }
  }
  BimatrixGame g{std::move(up), std::move(down), DefaultLabels(k), DefaultLabels(k)};
  return g;
}

CprFishingGame BuildCprFishingGame(double adult_stock_estimate, double fish_price, double effort_cost,
                                   int n_players, int e_max) {
  const double stock = std::max(adult_stock_estimate, 0.0);
  CprFishingGame g;
  g.n_players = n_players;
  g.e_max = e_max;
  g.payoff = [stock, fish_price, effort_cost](int e, int others) {
    const int total = e + others;
    const double share = total > 0 ? std::min(1.0, stock / total) : 1.0;
    return fish_price * e * share - effort_cost * e;
  };
  return g;
}

std::string_view KindName(ActionSituationKind kind) {
  switch (kind) {
    case ActionSituationKind::kPairwiseCooperation: return "PairwiseCooperation";
    case ActionSituationKind::kCommonPoolResource: return "CommonPoolResource";
    case ActionSituationKind::kOther: return "Other";
  }
  return "Other";
}

std::optional<BimatrixGame> ActionSituationModel::AsBimatrix() const {
  if (payoff_cells.empty()) return std::nullopt;
  const int k = static_cast<int>(actions.size());
  PayoffMatrix row(k, k);
  PayoffMatrix col(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      row(r, c) = payoff_cells[static_cast<std::size_t>(r) * k + c][0];
      col(r, c) = payoff_cells[static_cast<std::size_t>(r) * k + c][1];
    }
  }
  return BimatrixGame{std::move(row), std::move(col), actions, actions};
}

std::vector<ActionSituationModel> ParseLlmGame(std::string_view text) {
  json value;
  try {
    value = ExtractStructured(text);
  } catch (const SchemaError&) {
    Fail("no JSON game description found", text);
  }
  const json* list = &value;
  json wrapped;
  if (value.is_object() && value.contains("action_situations")) {
    list = &value["action_situations"];
  } else if (value.is_object()) {
    wrapped = json::array({value});
    list = &wrapped;
  }
  if (!list->is_array() || list->empty()) Fail("expected a non-empty list of action situations", text);

  std::vector<ActionSituationModel> out;
  for (const json& j : *list) out.push_back(ParseSituation(j, text));
  return out;
}

}  // namespace egta
