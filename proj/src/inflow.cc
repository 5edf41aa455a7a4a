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

#include "egta/inflow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseField(const std::string& text, const std::filesystem::path& path, int line) {
  T value{};
  const std::string t = Trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(fmt::format("{}:{}: cannot parse '{}'", path.string(), line, t));
  }
  return value;
}

}  // namespace

std::vector<MonthlyInflow> GenerateSyntheticInflow(const SyntheticInflowParams& params, int years,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = params.noise_sigma;
  std::vector<MonthlyInflow> series(std::max(years, 0));
  for (auto& year : series) {
    for (int m = 0; m < kMonths; ++m) {
      const double phase = 2.0 * std::numbers::pi * ((m + 1) - params.peak_month) / kMonths;
      const double shape = std::max(0.0, 1.0 + params.amplitude * std::cos(phase));
      const double factor = std::exp(sigma * noise(rng) - 0.5 * sigma * sigma);
      year[m] = params.mean_annual / kMonths * shape * factor;
    }
  }
  return series;
}

std::vector<MonthlyInflow> LoadInflowCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open inflow file {}", path.string()));

  std::map<int, std::map<int, double>> by_year;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(Trim(cell));
    if (!header_seen) {
      header_seen = true;
      if (cells.size() != 3 || cells[0] != "year" || cells[1] != "month" || cells[2] != "inflow") {
        throw ConfigError(fmt::format("{}: expected header 'year,month,inflow'", path.string()));
      }
      continue;
    }
    if (cells.size() != 3) throw ConfigError(fmt::format("{}:{}: expected 3 columns", path.string(), line_no));
    const int year = ParseField<int>(cells[0], path, line_no);
    const int month = ParseField<int>(cells[1], path, line_no);
    const double q = ParseField<double>(cells[2], path, line_no);
    if (month < 1 || month > kMonths) {
      throw ConfigError(fmt::format("{}:{}: month {} not in 1..12", path.string(), line_no, month));
    }
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw ConfigError(fmt::format("{}:{}: inflow must be finite and >= 0", path.string(), line_no));
    }
    if (!by_year[year].emplace(month, q).second) {
      throw ConfigError(fmt::format("{}:{}: duplicate month {} for year {}", path.string(), line_no, month, year));
    }
  }
  if (by_year.empty()) throw ConfigError(fmt::format("{}: no inflow rows", path.string()));

  std::vector<MonthlyInflow> series;
  for (const auto& [year, months] : by_year) {
    if (months.size() != kMonths) {
      throw ConfigError(fmt::format("{}: year {} has {} months, expected 12", path.string(), year, months.size()));
    }
    MonthlyInflow q{};
    for (const auto& [m, v] : months) q[m - 1] = v;
    series.push_back(q);
  }
  return series;
}

RiverYear RiverYearAt(const std::vector<MonthlyInflow>& series, int year_index, const RiverYear& layout) {
  if (series.empty()) throw ConfigError("inflow series is empty");
  RiverYear river = layout;
  river.monthly_inflow = series[static_cast<std::size_t>(year_index) % series.size()];
  return river;
}

}  // namespace egta
