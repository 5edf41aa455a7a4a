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

#ifndef EGTA_GAME_JSON_HPP_
#define EGTA_GAME_JSON_HPP_

// JSON form of a bimatrix game, shared by `egta-sim solve-game`:
//
//   {
//     "row_payoffs": [[3, 0], [5, 1]],
//     "col_payoffs": [[3, 5], [0, 1]],
//     "row_actions": ["C", "D"],      // optional, defaults to "0".."m-1"
//     "col_actions": ["C", "D"]       // optional
//   }

#include <filesystem>

#include <json.hpp>

#include "egta/equilibrium.hpp"

namespace egta {

// Throws InvalidGameError on schema violations.
BimatrixGame GameFromJson(const nlohmann::json& j);
nlohmann::json GameToJson(const BimatrixGame& game);
BimatrixGame LoadGameJson(const std::filesystem::path& path);

// Pure equilibria, the Lemke-Howson profile from label 0, and the selected
// equilibrium, with each profile re-verified at eps = 1e-9.
nlohmann::json SolveGameReport(const BimatrixGame& game);

}  // namespace egta

#endif  // EGTA_GAME_JSON_HPP_
