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

// Times each OpenMP kernel against its serial reference and checks that both
// produce the same result.

#include <chrono>
#include <cstdio>
#include <random>

#include <fmt/format.h>

#ifdef EGTA_HAVE_OPENMP
#include <omp.h>
#endif

#include "egta/empirical_games.hpp"
#include "egta/equilibrium.hpp"
#include "egta/harness.hpp"

namespace {

template <typename F>
double BestOfMs(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void Report(const char* kernel, double serial_ms, double parallel_ms, bool same) {
  fmt::print("{:<24} {:>10.2f} {:>10.2f} {:>8.2f}x  {}\n", kernel, serial_ms, parallel_ms, serial_ms / parallel_ms,
             same ? "match" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef EGTA_HAVE_OPENMP
  fmt::print("OpenMP threads: {}\n", omp_get_max_threads());
#else
  fmt::print("built without OpenMP\n");
#endif
  fmt::print("{:<24} {:>10} {:>10} {:>9}\n", "kernel", "serial ms", "omp ms", "speedup");

  egta::IrrigationGameSpec spec;
  spec.upstream_budget = 1e6;
  spec.downstream_budget = 1e6;
  spec.total_water = 3000;
  spec.max_fields = 400;
  spec.tax = 0.25;
  egta::BimatrixGame a;
  egta::BimatrixGame b;
  const double fill_serial = BestOfMs(5, [&] { a = egta::BuildIrrigationGameSerial(spec); });
  const double fill_parallel = BestOfMs(5, [&] { b = egta::BuildIrrigationGame(spec); });
  Report("irrigation game fill", fill_serial, fill_parallel, a.row_payoffs == b.row_payoffs && a.col_payoffs == b.col_payoffs);

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> payoff(0, 3);
  egta::PayoffMatrix r(600, 600);
  egta::PayoffMatrix c(600, 600);
  for (int i = 0; i < 600; ++i)
    for (int j = 0; j < 600; ++j) {
      r(i, j) = payoff(rng);
      c(i, j) = payoff(rng);
    }
  const egta::BimatrixGame g = egta::MakeGame(std::move(r), std::move(c));
  std::vector<egta::PureProfile> ne_serial;
  std::vector<egta::PureProfile> ne_parallel;
  const double ne_s = BestOfMs(5, [&] { ne_serial = egta::EnumeratePureNeSerial(g); });
  const double ne_p = BestOfMs(5, [&] { ne_parallel = egta::EnumeratePureNe(g); });
  Report("pure-NE enumeration", ne_s, ne_p, ne_serial == ne_parallel);

  egta::RunConfig base = egta::DefaultRunConfig();
  base.pipeline = egta::PipelineKind::kExpertEgta;
  base.horizon = 50;
  egta::SweepGrid grid;
  grid.taus = {0.0, 0.25, 1.0};
  grid.seeds = {1, 2};
  std::vector<egta::SweepRow> rows_serial;
  std::vector<egta::SweepRow> rows_parallel;
  const double sw_s = BestOfMs(1, [&] { rows_serial = egta::SweepSerial(base, grid); });
  const double sw_p = BestOfMs(1, [&] { rows_parallel = egta::Sweep(base, grid); });
  Report("sweep (6 cells)", sw_s, sw_p, egta::SweepCsv(rows_serial) == egta::SweepCsv(rows_parallel));
  return 0;
}
