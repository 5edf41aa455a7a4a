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

#include "egta/outputs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

namespace fs = std::filesystem;

constexpr int kWidth = 800;
constexpr int kHeight = 480;
constexpr int kLeft = 70;
constexpr int kRight = 150;
constexpr int kTop = 40;
constexpr int kBottom = 50;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string Csv(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string SvgOpen(std::string_view title) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{3}</text>\n",
      kWidth, kHeight, kLeft, XmlEscape(title));
}

struct Frame {
  double x0, x1, y0, y1;
  double X(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double Y(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string Axes(const Frame& f, std::string_view x_label, std::string_view y_label, int y_ticks) {
  std::string out;
  const double plot_right = kWidth - kRight;
  const double plot_bottom = kHeight - kBottom;
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLeft, plot_bottom, plot_right,
                     plot_bottom);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLeft, kTop, kLeft, plot_bottom);
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / y_ticks;
    out += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.0f}</text>\n",
        static_cast<double>(kLeft), f.Y(v), plot_right, f.Y(v), kLeft - 6.0, f.Y(v) + 4, v);
  }
  const int x_ticks = std::min(10, std::max(1, static_cast<int>(f.x1 - f.x0)));
  for (int i = 0; i <= x_ticks; ++i) {
    const double v = f.x0 + (f.x1 - f.x0) * i / x_ticks;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"middle\">{:.0f}</text>\n",
                       f.X(v), plot_bottom + 16, v);
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                     (kLeft + plot_right) / 2.0, kHeight - 12, XmlEscape(x_label));
  out += fmt::format("<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
                     (kTop + plot_bottom) / 2.0, (kTop + plot_bottom) / 2.0, XmlEscape(y_label));
  return out;
}

std::string LegendEntry(int row, const char* color, std::string_view label) {
  const int x = kWidth - kRight + 16;
  const int y = kTop + 8 + row * 18;
  return fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n"
                     "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                     x, y, color, x + 18, y + 10, XmlEscape(label));
}

std::string Title(const RunArtifacts& a, std::string_view what) {
  return fmt::format("{}: {}, tau {}, seed {}", what, PipelineName(a.pipeline), a.tau, a.seed);
}

}  // namespace

std::string RecordsCsv(const RunArtifacts& a) {
  std::string out =
      "year,household,planted,irrigated,delivered,crop_income,catch,fish_income,irrigation_cost,budget,stress,activity\n";
  for (const YearRecord& r : a.records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.year, r.household, r.planted, r.irrigated, r.delivered,
                       r.crop_income, r.catch_count, r.fish_income, r.irrigation_cost, r.budget, r.stress,
                       ActivityName(r.activity));
  }
  return out;
}

std::string SummaryCsv(const RunArtifacts& a) {
  const SummaryRow& s = a.summary;
  return fmt::format(
      "pipeline,tau,behaviour,seed,horizon,n_households,min_budget_y_final,max_budget_y_final,pct_both,"
      "pct_irrig_only,pct_fish_only,pct_none,fallback_events\n"
      "{},{},{},{},{},{},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{}\n",
      PipelineName(a.pipeline), a.tau, BehaviourName(a.behaviour), a.seed, a.horizon, a.n_households, s.min_budget_final,
      s.max_budget_final, s.pct_both, s.pct_irrig_only, s.pct_fish_only, s.pct_none, a.fallback_events());
}

std::string EventsCsv(const RunArtifacts& a) {
  std::string out = "year,household,kind,detail\n";
  for (const PolicyEvent& e : a.events) {
    out += fmt::format("{},{},{},{}\n", e.year, e.household, Csv(e.kind), Csv(e.detail));
  }
  return out;
}

std::string RequestsJsonl(const RunArtifacts& a) {
  std::string out;
  for (const RequestLogEntry& e : a.requests) out += LogEntryJson(e).dump() + "\n";
  return out;
}

std::string BudgetsSvg(const RunArtifacts& a) {
  const int n = a.n_households;
  const int years = a.records.empty() ? 0 : a.records.back().year;
  double lo = 0.0;
  double hi = 0.0;
  for (const YearRecord& r : a.records) {
    lo = std::min(lo, r.budget);
    hi = std::max(hi, r.budget);
  }
  if (hi - lo < 1.0) hi = lo + 1.0;
  const Frame f{0.0, static_cast<double>(std::max(years, 1)), lo, hi};
  std::string out = SvgOpen(Title(a, "Household budgets"));
  out += Axes(f, "year", "budget", 5);
  if (lo < 0.0) {
    out += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n",
                       kLeft, f.Y(0.0), kWidth - kRight, f.Y(0.0));
  }
  for (int h = 1; h <= n; ++h) {
    const char* color = kPalette[static_cast<std::size_t>(h - 1) % kPalette.size()];
    std::string points;
    for (const YearRecord& r : a.records) {
      if (r.household != h) continue;
      points += fmt::format("{}{:.1f},{:.1f}", points.empty() ? "" : " ", f.X(r.year), f.Y(r.budget));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, points);
    out += LegendEntry(h - 1, color, fmt::format("household {}", h));
  }
  return out + "</svg>\n";
}

std::string ActivitySvg(const RunArtifacts& a) {
  const int years = a.records.empty() ? 0 : a.records.back().year;
  const Frame f{0.0, static_cast<double>(std::max(years, 1)), 0.0, 100.0};
  std::string out = SvgOpen(Title(a, "Activity shares"));
  out += Axes(f, "year", "percent of households", 4);
  constexpr std::array<ActivityClass, 4> kOrder = {ActivityClass::kBoth, ActivityClass::kFarmingOnly,
                                                   ActivityClass::kFishingOnly, ActivityClass::kNone};
  constexpr std::array<const char*, 4> kColors = {"#2ca02c", "#1f77b4", "#17becf", "#bbbbbb"};
  std::vector<std::array<int, 4>> counts(static_cast<std::size_t>(years) + 1);
  for (const YearRecord& r : a.records) ++counts[r.year][static_cast<std::size_t>(r.activity)];
  const double bar = (f.X(1.0) - f.X(0.0)) * 0.9;
  for (int y = 1; y <= years; ++y) {
    const double total = counts[y][0] + counts[y][1] + counts[y][2] + counts[y][3];
    if (total == 0) continue;
    double base = 0.0;
    for (std::size_t k = 0; k < kOrder.size(); ++k) {
      const double share = 100.0 * counts[y][static_cast<std::size_t>(kOrder[k])] / total;
      if (share > 0) {
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                           f.X(y - 0.95), f.Y(base + share), bar, f.Y(base) - f.Y(base + share), kColors[k]);
      }
      base += share;
    }
  }
  for (std::size_t k = 0; k < kOrder.size(); ++k) out += LegendEntry(static_cast<int>(k), kColors[k], ActivityName(kOrder[k]));
  return out + "</svg>\n";
}

void WriteFileAtomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(fmt::format("error writing {}", path.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(fmt::format("cannot move output into place at {}", path.string()));
  }
}

void EmitOutputs(const RunArtifacts& a, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError(fmt::format("cannot create output directory {}", out_dir.string()));
  WriteFileAtomic(out_dir / "records.csv", RecordsCsv(a));
  WriteFileAtomic(out_dir / "summary.csv", SummaryCsv(a));
  WriteFileAtomic(out_dir / "events.csv", EventsCsv(a));
  WriteFileAtomic(out_dir / "budgets.svg", BudgetsSvg(a));
  WriteFileAtomic(out_dir / "activity.svg", ActivitySvg(a));
  if (a.llm_backed) WriteFileAtomic(out_dir / "requests.jsonl", RequestsJsonl(a));
}

}  // namespace egta
