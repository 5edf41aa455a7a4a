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

#include "egta/game_json.hpp"

#include <fstream>

#include <fmt/format.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

using nlohmann::json;

PayoffMatrix MatrixFromJson(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
    throw InvalidGameError(fmt::format("game json: '{}' must be a non-empty array of rows", key));
  }
  const json& rows = j.at(key);
  const int m = static_cast<int>(rows.size());
  int n = -1;
  std::vector<double> data;
  for (const json& row : rows) {
    if (!row.is_array() || row.empty()) throw InvalidGameError(fmt::format("game json: '{}' rows must be non-empty arrays", key));
    if (n < 0) n = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != n) throw InvalidGameError(fmt::format("game json: '{}' is ragged", key));
    for (const json& v : row) {
      if (!v.is_number()) throw InvalidGameError(fmt::format("game json: '{}' holds a non-number", key));
      data.push_back(v.get<double>());
    }
  }
  return PayoffMatrix(m, n, std::move(data));
}

std::vector<std::string> LabelsFromJson(const json& j, const char* key, int count) {
  std::vector<std::string> labels;
  if (!j.contains(key)) {
    for (int i = 0; i < count; ++i) labels.push_back(std::to_string(i));
    return labels;
  }
  if (!j.at(key).is_array()) throw InvalidGameError(fmt::format("game json: '{}' must be an array", key));
  for (const json& v : j.at(key)) labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  return labels;
}

json ProfileJson(const BimatrixGame& game, const MixedProfile& p) {
  const auto [u_row, u_col] = ExpectedPayoffs(game, p);
  return json{{"row_dist", p.row_dist},
              {"col_dist", p.col_dist},
              {"payoffs", {u_row, u_col}},
              {"is_nash", IsEpsilonNe(game, p, 1e-9)}};
}

}  // namespace

BimatrixGame GameFromJson(const json& j) {
  if (!j.is_object()) throw InvalidGameError("game json: top level must be an object");
  BimatrixGame g;
  g.row_payoffs = MatrixFromJson(j, "row_payoffs");
  g.col_payoffs = MatrixFromJson(j, "col_payoffs");
  g.row_actions = LabelsFromJson(j, "row_actions", g.row_payoffs.rows());
  g.col_actions = LabelsFromJson(j, "col_actions", g.row_payoffs.cols());
  g.Validate();
  return g;
}

json GameToJson(const BimatrixGame& game) {
  auto rows = [](const PayoffMatrix& m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      out.push_back(std::move(row));
    }
    return out;
  };
  return json{{"row_payoffs", rows(game.row_payoffs)},
              {"col_payoffs", rows(game.col_payoffs)},
              {"row_actions", game.row_actions},
              {"col_actions", game.col_actions}};
}

BimatrixGame LoadGameJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open game file {}", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidGameError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return GameFromJson(j);
}

json SolveGameReport(const BimatrixGame& game) {
  json pure = json::array();
  for (const PureProfile& p : EnumeratePureNe(game)) {
    pure.push_back({{"row", game.row_actions[p.row]},
                    {"col", game.col_actions[p.col]},
                    {"payoffs", {game.row_payoffs(p.row, p.col), game.col_payoffs(p.row, p.col)}}});
  }
  const MixedProfile lh = LemkeHowson(game, 0);
  const SelectedEquilibrium selected = SolveGame(game);
  json sel = ProfileJson(game, selected.profile);
  if (selected.pure) {
    sel["row"] = game.row_actions[selected.pure->row];
    sel["col"] = game.col_actions[selected.pure->col];
  }
  return json{{"pure_equilibria", std::move(pure)}, {"lemke_howson", ProfileJson(game, lh)}, {"selected", std::move(sel)}};
}

}  // namespace egta
