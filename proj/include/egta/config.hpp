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

#ifndef EGTA_CONFIG_HPP_
#define EGTA_CONFIG_HPP_

// Run configuration, read from a YAML file. Nested maps and dotted keys are
// equivalent ("ecology: {fecundity: 8}" is "ecology.fecundity: 8"). Unknown
// keys are rejected. Relative paths resolve against the config file's
// directory. See README.md for the key list.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egta/ecology.hpp"
#include "egta/inflow.hpp"
#include "egta/llm_gateway.hpp"
#include "egta/policies.hpp"

namespace egta {

enum class PipelineKind { kProcedural, kGenerative, kNaiveEgta, kExpertEgta, kCentralized };

std::string_view PipelineName(PipelineKind kind);
// Throws ConfigError listing the valid names.
PipelineKind ParsePipeline(std::string_view name);
bool UsesGateway(PipelineKind kind);

struct RunConfig {
  PipelineKind pipeline = PipelineKind::kProcedural;
  int horizon = 100;
  int n_households = 9;
  BehaviourKind behaviour = BehaviourKind::kRational;
  std::uint64_t seed = 42;
  double initial_budget = 0.0;
  double initial_fish_per_class = 0.0;
  double initial_last_yield = 0.0;

  EcologyParams ecology;
  PolicyParams policy;

  std::filesystem::path inflow_csv;  // empty: synthetic series
  SyntheticInflowParams synthetic_inflow;
  RiverYear river_layout;  // irrigation months and migration month

  GatewayConfig gateway;
  std::filesystem::path prompts_dir;

  std::optional<double> authority_budget;  // default: n_households * initial_budget
  int authority_window = 20;

  void Validate() const;
};

// The gateway settings with the stub fixture defaulted to the pipeline's
// shipped fixture.
GatewayConfig EffectiveGateway(const RunConfig& config);

// Defaults of the shipped parameter set.
RunConfig DefaultRunConfig();

// Throws IoError for a missing file and ConfigError for anything invalid.
RunConfig LoadConfig(const std::filesystem::path& path);
RunConfig ParseConfig(std::string_view yaml_text, const std::filesystem::path& base_dir);

// Directory holding the shipped prompts and fixtures.
std::filesystem::path DefaultDataDir();

}  // namespace egta

#endif  // EGTA_CONFIG_HPP_
