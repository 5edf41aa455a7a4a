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

#ifndef EGTA_OUTPUTS_HPP_
#define EGTA_OUTPUTS_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "egta/harness.hpp"

namespace egta {

std::string RecordsCsv(const RunArtifacts& artifacts);
std::string SummaryCsv(const RunArtifacts& artifacts);
std::string EventsCsv(const RunArtifacts& artifacts);
std::string RequestsJsonl(const RunArtifacts& artifacts);
std::string BudgetsSvg(const RunArtifacts& artifacts);
std::string ActivitySvg(const RunArtifacts& artifacts);

// Writes through a temporary file and a rename. Throws IoError with the path.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

// records.csv, summary.csv, events.csv, budgets.svg, activity.svg, and
// requests.jsonl for LLM-backed runs. Creates `out_dir` if needed.
void EmitOutputs(const RunArtifacts& artifacts, const std::filesystem::path& out_dir);

}  // namespace egta

#endif  // EGTA_OUTPUTS_HPP_
