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

#include "egta/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

// Payoff differences at or below this count as ties.
constexpr double kTieTol = 1e-9;
// Pivot entries at or below this are treated as zero. Payoffs are rescaled
// into [1, 2] before pivoting, so an absolute threshold is meaningful.
constexpr double kPivotTol = 1e-12;
constexpr double kLexTol = 1e-12;
constexpr int kMaxPivots = 1 << 20;
// Below this many cells the OpenMP kernels run on one thread.
constexpr long kParallelCells = 1 << 14;

std::vector<std::string> DefaultLabels(int n) {
  std::vector<std::string> labels(std::max(n, 0));
  for (int i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

// Affine map of all entries into [1, 2]; a no-op on equilibria.
PayoffMatrix NormalizedPositive(const PayoffMatrix& m) {
  const auto [lo, hi] = std::minmax_element(m.data().begin(), m.data().end());
  const double range = *hi - *lo;
  const double scale = range > 0 ? 1.0 / range : 1.0;
  PayoffMatrix out = m;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out(r, c) = 1.0 + (m(r, c) - *lo) * scale;
  return out;
}

// Dictionary for one polytope of the Lemke-Howson path. Variables are
// indexed by label; `lex_cols` are the columns of the starting slack basis,
// whose current values are the rows of the basis inverse.
class Tableau {
 public:
  Tableau(int rows, int vars) : rows_(rows), vars_(vars), a_(static_cast<std::size_t>(rows) * vars), rhs_(rows, 1.0), basis_(rows) {}

  double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * vars_ + c]; }
  double at(int r, int c) const { return a_[static_cast<std::size_t>(r) * vars_ + c]; }
  std::vector<int>& basis() { return basis_; }
  std::vector<int>& lex_cols() { return lex_cols_; }

  // Pivots `entering` into the basis and returns the variable that left.
  int Pivot(int entering) {
    const int row = LexMinRatioRow(entering);
    if (row < 0) throw InvalidGameError("lemke-howson: unbounded ray (payoffs not positive?)");
    const double p = at(row, entering);
    for (int c = 0; c < vars_; ++c) at(row, c) /= p;
    rhs_[row] /= p;
    for (int r = 0; r < rows_; ++r) {
      if (r == row) continue;
      const double f = at(r, entering);
      if (f == 0.0) continue;
      for (int c = 0; c < vars_; ++c) at(r, c) -= f * at(row, c);
      rhs_[r] -= f * rhs_[row];
      at(r, entering) = 0.0;
    }
    const int leaving = basis_[row];
    basis_[row] = entering;
    return leaving;
  }

  double ValueOf(int var) const {
    for (int r = 0; r < rows_; ++r)
      if (basis_[r] == var) return std::max(rhs_[r], 0.0);
    return 0.0;
  }

 private:
  int LexMinRatioRow(int entering) const {
    int best = -1;
    for (int r = 0; r < rows_; ++r) {
      if (at(r, entering) <= kPivotTol) continue;
      if (best < 0 || LexLess(r, best, entering)) best = r;
    }
    return best;
  }

  // Compares (rhs, B^-1 row) / pivot lexicographically.
  bool LexLess(int r1, int r2, int e) const {
    const double p1 = at(r1, e);
    const double p2 = at(r2, e);
    const double d = rhs_[r1] / p1 - rhs_[r2] / p2;
    if (d < -kLexTol) return true;
    if (d > kLexTol) return false;
    for (int c : lex_cols_) {
      const double dc = at(r1, c) / p1 - at(r2, c) / p2;
      if (dc < -kLexTol) return true;
      if (dc > kLexTol) return false;
    }
    return r1 < r2;
  }

  int rows_;
  int vars_;
  std::vector<double> a_;
  std::vector<double> rhs_;
  std::vector<int> basis_;
  std::vector<int> lex_cols_;
};

bool IsDistribution(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -kTieTol)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

std::optional<int> PureIndex(const std::vector<double>& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] >= 1.0 - 1e-12) return static_cast<int>(i);
  return std::nullopt;
}

void Normalize(std::vector<double>& p) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (sum <= 0) throw InvalidGameError("lemke-howson: degenerate endpoint with zero mass");
  for (double& v : p) v /= sum;
}

}  // namespace

PayoffMatrix::PayoffMatrix(int rows, int cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidGameError(fmt::format("payoff matrix {}x{} given {} entries", rows, cols, data_.size()));
  }
}

void BimatrixGame::Validate() const {
  if (row_payoffs.rows() < 1 || row_payoffs.cols() < 1) throw InvalidGameError("game needs at least one action per player");
  if (row_payoffs.rows() != col_payoffs.rows() || row_payoffs.cols() != col_payoffs.cols()) {
    throw InvalidGameError(fmt::format("payoff matrices differ in shape: {}x{} vs {}x{}", row_payoffs.rows(),
                                       row_payoffs.cols(), col_payoffs.rows(), col_payoffs.cols()));
  }
  if (static_cast<int>(row_actions.size()) != rows() || static_cast<int>(col_actions.size()) != cols()) {
    throw InvalidGameError("action label count does not match payoff shape");
  }
  for (double v : row_payoffs.data())
    if (!std::isfinite(v)) throw InvalidGameError("row payoffs contain a non-finite value");
  for (double v : col_payoffs.data())
    if (!std::isfinite(v)) throw InvalidGameError("column payoffs contain a non-finite value");
}

BimatrixGame MakeGame(PayoffMatrix row_payoffs, PayoffMatrix col_payoffs) {
  BimatrixGame g;
  g.row_actions = DefaultLabels(row_payoffs.rows());
  g.col_actions = DefaultLabels(row_payoffs.cols());
  g.row_payoffs = std::move(row_payoffs);
  g.col_payoffs = std::move(col_payoffs);
  return g;
}

MixedProfile ToMixed(const PureProfile& p, int rows, int cols) {
  MixedProfile out{std::vector<double>(rows, 0.0), std::vector<double>(cols, 0.0)};
  out.row_dist.at(p.row) = 1.0;
  out.col_dist.at(p.col) = 1.0;
  return out;
}

MixedProfile LemkeHowson(const BimatrixGame& game, int initial_label) {
  game.Validate();
  const int m = game.rows();
  const int n = game.cols();
  if (initial_label < 0 || initial_label >= m + n) {
    throw InvalidGameError(fmt::format("initial label {} outside 0..{}", initial_label, m + n - 1));
  }
  const PayoffMatrix a = NormalizedPositive(game.row_payoffs);
  const PayoffMatrix b = NormalizedPositive(game.col_payoffs);

  // Column polytope: s_i + sum_j A_ij y_j = 1. Label i -> s_i, m+j -> y_j.
  Tableau q(m, m + n);
  for (int i = 0; i < m; ++i) {
    q.at(i, i) = 1.0;
    for (int j = 0; j < n; ++j) q.at(i, m + j) = a(i, j);
    q.basis()[i] = i;
    q.lex_cols().push_back(i);
  }
  // Row polytope: r_j + sum_i B_ij x_i = 1. Label i -> x_i, m+j -> r_j.
  Tableau p(n, m + n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) p.at(j, i) = b(i, j);
    p.at(j, m + j) = 1.0;
    p.basis()[j] = m + j;
    p.lex_cols().push_back(m + j);
  }

  int entering = initial_label;
  bool in_row_polytope = initial_label < m;
  for (int step = 0;; ++step) {
    if (step >= kMaxPivots) throw InvalidGameError("lemke-howson: pivot limit reached");
    Tableau& t = in_row_polytope ? p : q;
    const int leaving = t.Pivot(entering);
    if (leaving == initial_label) break;
    entering = leaving;
    in_row_polytope = !in_row_polytope;
  }

  MixedProfile out{std::vector<double>(m), std::vector<double>(n)};
  for (int i = 0; i < m; ++i) out.row_dist[i] = p.ValueOf(i);
  for (int j = 0; j < n; ++j) out.col_dist[j] = q.ValueOf(m + j);
  Normalize(out.row_dist);
  Normalize(out.col_dist);
  return out;
}

std::vector<PureProfile> EnumeratePureNeSerial(const BimatrixGame& game) {
  game.Validate();
  const int m = game.rows();
  const int n = game.cols();
  std::vector<double> col_best(n, -std::numeric_limits<double>::infinity());
  std::vector<double> row_best(m, -std::numeric_limits<double>::infinity());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      col_best[j] = std::max(col_best[j], game.row_payoffs(i, j));
      row_best[i] = std::max(row_best[i], game.col_payoffs(i, j));
    }
  }
  std::vector<PureProfile> out;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (game.row_payoffs(i, j) >= col_best[j] - kTieTol && game.col_payoffs(i, j) >= row_best[i] - kTieTol)
        out.push_back({i, j});
  return out;
}

std::vector<PureProfile> EnumeratePureNe(const BimatrixGame& game) {
  game.Validate();
  const int m = game.rows();
  const int n = game.cols();
  const bool wide = static_cast<long>(m) * n >= kParallelCells;
  std::vector<double> col_best(n, -std::numeric_limits<double>::infinity());
  std::vector<double> row_best(m, -std::numeric_limits<double>::infinity());

#pragma omp parallel for schedule(static) if (wide)
  for (int j = 0; j < n; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) best = std::max(best, game.row_payoffs(i, j));
    col_best[j] = best;
  }
#pragma omp parallel for schedule(static) if (wide)
  for (int i = 0; i < m; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) best = std::max(best, game.col_payoffs(i, j));
    row_best[i] = best;
  }

  std::vector<std::vector<PureProfile>> per_row(m);
#pragma omp parallel for schedule(static) if (wide)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      if (game.row_payoffs(i, j) >= col_best[j] - kTieTol && game.col_payoffs(i, j) >= row_best[i] - kTieTol)
        per_row[i].push_back({i, j});
  }
  std::vector<PureProfile> out;
  for (auto& row : per_row) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::pair<double, double> ExpectedPayoffs(const BimatrixGame& game, const MixedProfile& profile) {
  double row = 0.0;
  double col = 0.0;
  for (int i = 0; i < game.rows(); ++i) {
    for (int j = 0; j < game.cols(); ++j) {
      const double w = profile.row_dist[i] * profile.col_dist[j];
      row += w * game.row_payoffs(i, j);
      col += w * game.col_payoffs(i, j);
    }
  }
  return {row, col};
}

bool IsEpsilonNe(const BimatrixGame& game, const MixedProfile& profile, double eps) {
  game.Validate();
  const int m = game.rows();
  const int n = game.cols();
  if (static_cast<int>(profile.row_dist.size()) != m || static_cast<int>(profile.col_dist.size()) != n) {
    throw InvalidGameError(fmt::format("profile is {}x{} but game is {}x{}", profile.row_dist.size(),
                                       profile.col_dist.size(), m, n));
  }
  if (!IsDistribution(profile.row_dist) || !IsDistribution(profile.col_dist)) return false;

  const auto [row_value, col_value] = ExpectedPayoffs(game, profile);
  for (int i = 0; i < m; ++i) {
    double dev = 0.0;
    for (int j = 0; j < n; ++j) dev += profile.col_dist[j] * game.row_payoffs(i, j);
    if (dev > row_value + eps) return false;
  }
  for (int j = 0; j < n; ++j) {
    double dev = 0.0;
    for (int i = 0; i < m; ++i) dev += profile.row_dist[i] * game.col_payoffs(i, j);
    if (dev > col_value + eps) return false;
  }
  return true;
}

SelectedEquilibrium SelectEquilibrium(const std::vector<PureProfile>& candidates, const MixedProfile& fallback,
                                      SelectionRule rule) {
  if (rule == SelectionRule::kMinTotalAction && !candidates.empty()) {
    const PureProfile best = *std::min_element(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
      return std::pair(x.row + x.col, x.row) < std::pair(y.row + y.col, y.row);
    });
    return {ToMixed(best, static_cast<int>(fallback.row_dist.size()), static_cast<int>(fallback.col_dist.size())), best};
  }
  SelectedEquilibrium out{fallback, std::nullopt};
  const auto r = PureIndex(fallback.row_dist);
  const auto c = PureIndex(fallback.col_dist);
  if (r && c) out.pure = PureProfile{*r, *c};
  return out;
}

SelectedEquilibrium SolveGame(const BimatrixGame& game, SelectionRule rule) {
  const std::vector<PureProfile> pure = EnumeratePureNe(game);
  if (rule == SelectionRule::kMinTotalAction && !pure.empty()) {
    MixedProfile shape{std::vector<double>(game.rows()), std::vector<double>(game.cols())};
    return SelectEquilibrium(pure, shape, rule);
  }
  return SelectEquilibrium({}, LemkeHowson(game, 0), rule);
}

CprSolution SolveSymmetricCpr(const CprPayoff& payoff, int n_players, int e_max) {
  if (n_players < 1) throw InvalidGameError("cpr game needs at least one player");
  if (e_max < 0) throw InvalidGameError("cpr game needs e_max >= 0");

  auto best_response = [&](int others) {
    int best = 0;
    double best_value = payoff(0, others);
    for (int e = 1; e <= e_max; ++e) {
      const double v = payoff(e, others);
      if (v > best_value + kTieTol) {
        best = e;
        best_value = v;
      }
    }
    return std::pair(best, best_value);
  };

  for (int e = 0; e <= e_max; ++e) {
    const int others = (n_players - 1) * e;
    if (payoff(e, others) >= best_response(others).second - kTieTol) return {e, true, 0};
  }

  CprSolution out;
  int e = 0;
  for (int step = 1; step <= 1000; ++step) {
    e = best_response((n_players - 1) * e).first;
    out.iterations = step;
  }
  out.extraction = e;
  return out;
}

}  // namespace egta
