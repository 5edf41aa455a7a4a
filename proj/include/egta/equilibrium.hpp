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

#ifndef EGTA_EQUILIBRIUM_HPP_
#define EGTA_EQUILIBRIUM_HPP_

// Solvers for finite two-player games in normal form, plus a symmetric
// pure-strategy solver for N-player common-pool extraction games.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace egta {

// Dense row-major matrix of payoffs.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}
  PayoffMatrix(int rows, int cols, std::vector<double> row_major);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const PayoffMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct BimatrixGame {
  PayoffMatrix row_payoffs;
  PayoffMatrix col_payoffs;
  std::vector<std::string> row_actions;
  std::vector<std::string> col_actions;

  int rows() const { return row_payoffs.rows(); }
  int cols() const { return row_payoffs.cols(); }

  // Throws InvalidGameError on mismatched shapes, empty action sets, label
  // counts that do not match, or non-finite payoffs.
  void Validate() const;
};

// Labels default to "0".."n-1".
BimatrixGame MakeGame(PayoffMatrix row_payoffs, PayoffMatrix col_payoffs);

struct MixedProfile {
  std::vector<double> row_dist;
  std::vector<double> col_dist;
};

struct PureProfile {
  int row = 0;
  int col = 0;
  auto operator<=>(const PureProfile&) const = default;
};

MixedProfile ToMixed(const PureProfile& p, int rows, int cols);

// One Nash equilibrium by complementary pivoting, starting by dropping
// `initial_label` (0..m-1 are row actions, m..m+n-1 column actions).
// Degenerate games are handled with a lexicographic ratio test, so the path
// always terminates.
MixedProfile LemkeHowson(const BimatrixGame& game, int initial_label = 0);

// Every cell where both actions are best responses (ties included), in
// row-major order. Uses OpenMP for large games.
std::vector<PureProfile> EnumeratePureNe(const BimatrixGame& game);
// Single-threaded reference for EnumeratePureNe.
std::vector<PureProfile> EnumeratePureNeSerial(const BimatrixGame& game);

// True iff no unilateral pure deviation gains more than `eps` in expectation.
// Throws InvalidGameError if the profile dimensions do not match the game.
bool IsEpsilonNe(const BimatrixGame& game, const MixedProfile& profile, double eps);

// Expected payoffs (row, col) of a mixed profile.
std::pair<double, double> ExpectedPayoffs(const BimatrixGame& game, const MixedProfile& profile);

enum class SelectionRule {
  kMinTotalAction,  // smallest row+col action value, then smallest row action
  kLemkeHowson,     // ignore pure candidates; always use the pivoting result
};

struct SelectedEquilibrium {
  MixedProfile profile;
  std::optional<PureProfile> pure;  // set when the selection is a pure cell
};

// Action values are the action indices (field counts on the irrigation grid).
SelectedEquilibrium SelectEquilibrium(const std::vector<PureProfile>& candidates,
                                      const MixedProfile& fallback,
                                      SelectionRule rule = SelectionRule::kMinTotalAction);

// Convenience: enumerate, select, and only run Lemke-Howson when needed.
SelectedEquilibrium SolveGame(const BimatrixGame& game,
                              SelectionRule rule = SelectionRule::kMinTotalAction);

// u(own_extraction, sum_of_others_extraction)
using CprPayoff = std::function<double(int, int)>;

struct CprSolution {
  int extraction = 0;
  bool is_equilibrium = false;
  int iterations = 0;  // best-response steps used when no symmetric NE exists
};

// Smallest symmetric pure equilibrium e* in [0, e_max]; if none exists, the
// point reached by at most 1000 steps of symmetric best-response iteration
// from 0, flagged as not an equilibrium.
CprSolution SolveSymmetricCpr(const CprPayoff& payoff, int n_players, int e_max);

}  // namespace egta

#endif  // EGTA_EQUILIBRIUM_HPP_
