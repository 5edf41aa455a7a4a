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

#ifndef EGTA_INFLOW_HPP_
#define EGTA_INFLOW_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "egta/ecology.hpp"

namespace egta {

using MonthlyInflow = std::array<double, kMonths>;

// Seasonal generator used when no inflow CSV is configured:
//   q(m) = mean_annual / 12 * max(0, 1 + amplitude * cos(2*pi*(m - peak_month) / 12))
//          * exp(noise_sigma * Z - noise_sigma^2 / 2),   Z ~ N(0, 1) per month.
// The lognormal factor has unit mean, so the expected annual total is
// mean_annual.
struct SyntheticInflowParams {
  double mean_annual = 720.0;
  double amplitude = 0.9;
  double peak_month = 7.0;
  double noise_sigma = 0.15;
};

std::vector<MonthlyInflow> GenerateSyntheticInflow(const SyntheticInflowParams& params, int years,
                                                   std::uint64_t seed);

// Reads a CSV with header `year,month,inflow` and exactly 12 rows per year.
// Years are returned in ascending order. Throws IoError if the file cannot be
// opened and ConfigError on malformed content.
std::vector<MonthlyInflow> LoadInflowCsv(const std::filesystem::path& path);

// Year `year_index` (0-based) of the series; the series repeats when the
// horizon is longer than the data.
RiverYear RiverYearAt(const std::vector<MonthlyInflow>& series, int year_index,
                      const RiverYear& layout = RiverYear{});

}  // namespace egta

#endif  // EGTA_INFLOW_HPP_
