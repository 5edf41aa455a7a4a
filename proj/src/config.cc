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

#include "egta/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "egta/errors.hpp"

#ifndef EGTA_DATA_DIR
#define EGTA_DATA_DIR "."
#endif

namespace egta {
namespace {

namespace fs = std::filesystem;

template <typename T>
T As(const YAML::Node& node, const std::string& key, const char* what) {
  if (!node.IsScalar()) throw ConfigError(fmt::format("{}: expected {}", key, what));
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: expected {}, got '{}'", key, what, node.Scalar()));
  }
}

double Real(const YAML::Node& n, const std::string& k) { return As<double>(n, k, "a number"); }
int Int(const YAML::Node& n, const std::string& k) { return As<int>(n, k, "an integer"); }
std::string Str(const YAML::Node& n, const std::string& k) { return As<std::string>(n, k, "a string"); }

fs::path PathOf(const YAML::Node& n, const std::string& k, const fs::path& base) {
  fs::path p = Str(n, k);
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

using Setter = std::function<void(RunConfig&, const YAML::Node&, const std::string&, const fs::path&)>;

#define EGTA_REAL(field) [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.field = Real(n, k); }
#define EGTA_INT(field) [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.field = Int(n, k); }

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> kSetters = {
      {"pipeline", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.pipeline = ParsePipeline(Str(n, k)); }},
      {"horizon", EGTA_INT(horizon)},
      {"n_households", EGTA_INT(n_households)},
      {"behaviour", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.behaviour = ParseBehaviour(Str(n, k)); }},
      {"seed", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.seed = As<std::uint64_t>(n, k, "a non-negative integer"); }},
      {"tau", EGTA_REAL(policy.tau)},
      {"initial_budget", EGTA_REAL(initial_budget)},
      {"initial_fish_per_class", EGTA_REAL(initial_fish_per_class)},
      {"initial_last_yield", EGTA_REAL(initial_last_yield)},

      {"policy.max_fields", EGTA_INT(policy.max_fields)},
      {"policy.max_fish", EGTA_INT(policy.max_fish)},
      {"policy.pair_stress_threshold", EGTA_INT(policy.pair_stress_threshold)},
      {"policy.fishing_effort_cost", EGTA_REAL(policy.fishing_effort_cost)},
      {"policy.subsistence_income", EGTA_REAL(policy.subsistence_income)},
      {"policy.base_fish_target", EGTA_INT(policy.base_fish_target)},
      {"policy.low_action", EGTA_INT(policy.low_action)},
      {"policy.parse_retries", EGTA_INT(policy.parse_retries)},
      {"policy.selection",
       [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) {
         const std::string v = Str(n, k);
         if (v == "min-total") c.policy.selection = SelectionRule::kMinTotalAction;
         else if (v == "lemke-howson") c.policy.selection = SelectionRule::kLemkeHowson;
         else throw ConfigError(fmt::format("{}: unknown rule '{}' (valid: min-total, lemke-howson)", k, v));
       }},

      {"ecology.water_per_field", EGTA_REAL(ecology.water_per_field)},
      {"ecology.irrigation_cost", EGTA_REAL(ecology.irrigation_cost)},
      {"ecology.base_yield", EGTA_REAL(ecology.base_yield)},
      {"ecology.stressed_yield", EGTA_REAL(ecology.stressed_yield)},
      {"ecology.reach_stress_threshold", EGTA_INT(ecology.reach_stress_threshold)},
      {"ecology.consumption_cost", EGTA_REAL(ecology.consumption_cost)},
      {"ecology.fish_price", EGTA_REAL(ecology.fish_price)},
      {"ecology.adult_survival", EGTA_REAL(ecology.adult_survival)},
      {"ecology.larva_survival", EGTA_REAL(ecology.larva_survival)},
      {"ecology.juvenile_survival", EGTA_REAL(ecology.juvenile_survival)},
      {"ecology.juvenile_capacity", EGTA_REAL(ecology.juvenile_capacity)},
      {"ecology.fecundity", EGTA_REAL(ecology.fecundity)},
      {"ecology.migration_min_inflow", EGTA_REAL(ecology.migration_min_inflow)},
      {"ecology.migrant_larvae", EGTA_REAL(ecology.migrant_larvae)},
      {"ecology.reference_lake_inflow", EGTA_REAL(ecology.reference_lake_inflow)},
      {"ecology.stress_recovery", EGTA_REAL(ecology.stress_recovery)},

      {"river.irrigation_months",
       [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) {
         if (!n.IsSequence()) throw ConfigError(fmt::format("{}: expected a list of months", k));
         c.river_layout.irrigation_months.clear();
         for (const YAML::Node& m : n) c.river_layout.irrigation_months.push_back(Int(m, k));
       }},
      {"river.may_index", EGTA_INT(river_layout.may_index)},

      {"inflow.csv", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path& b) { c.inflow_csv = PathOf(n, k, b); }},
      {"inflow.mean_annual", EGTA_REAL(synthetic_inflow.mean_annual)},
      {"inflow.amplitude", EGTA_REAL(synthetic_inflow.amplitude)},
      {"inflow.peak_month", EGTA_REAL(synthetic_inflow.peak_month)},
      {"inflow.noise_sigma", EGTA_REAL(synthetic_inflow.noise_sigma)},

      {"gateway.backend",
       [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) {
         const std::string v = Str(n, k);
         if (v == "stub") c.gateway.backend = GatewayBackend::kStub;
         else if (v == "http") c.gateway.backend = GatewayBackend::kHttp;
         else throw ConfigError(fmt::format("{}: unknown backend '{}' (valid: stub, http)", k, v));
       }},
      {"gateway.endpoint", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.gateway.endpoint = Str(n, k); }},
      {"gateway.model", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.gateway.model = Str(n, k); }},
      {"gateway.timeout_seconds", EGTA_REAL(gateway.timeout_seconds)},
      {"gateway.max_retries", EGTA_INT(gateway.max_retries)},
      {"gateway.backoff_ms", EGTA_INT(gateway.backoff_ms)},
      {"gateway.max_in_flight", EGTA_INT(gateway.max_in_flight)},
      {"gateway.temperature", EGTA_REAL(gateway.temperature)},
      {"gateway.max_tokens", EGTA_INT(gateway.max_tokens)},
      {"gateway.fixture", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path& b) { c.gateway.fixture = PathOf(n, k, b); }},

      {"prompts.dir", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path& b) { c.prompts_dir = PathOf(n, k, b); }},
      {"authority.initial_budget", [](RunConfig& c, const YAML::Node& n, const std::string& k, const fs::path&) { c.authority_budget = Real(n, k); }},
      {"authority.window", EGTA_INT(authority_window)},
  };
  return kSetters;
}

#undef EGTA_REAL
#undef EGTA_INT

void Flatten(const YAML::Node& node, const std::string& prefix, std::vector<std::pair<std::string, YAML::Node>>& out) {
  for (const auto& kv : node) {
    const std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
    if (kv.second.IsMap()) Flatten(kv.second, key, out);
    else out.emplace_back(key, kv.second);
  }
}

}  // namespace

std::string_view PipelineName(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::kProcedural: return "procedural";
    case PipelineKind::kGenerative: return "generative";
    case PipelineKind::kNaiveEgta: return "naive-egta";
    case PipelineKind::kExpertEgta: return "expert-egta";
    case PipelineKind::kCentralized: return "centralized";
  }
  return "procedural";
}

PipelineKind ParsePipeline(std::string_view name) {
  for (PipelineKind k : {PipelineKind::kProcedural, PipelineKind::kGenerative, PipelineKind::kNaiveEgta,
                         PipelineKind::kExpertEgta, PipelineKind::kCentralized}) {
    if (name == PipelineName(k)) return k;
  }
  throw ConfigError(fmt::format(
      "unknown pipeline '{}' (valid: procedural, generative, naive-egta, expert-egta, centralized)", name));
}

bool UsesGateway(PipelineKind kind) { return kind == PipelineKind::kGenerative || kind == PipelineKind::kNaiveEgta; }

fs::path DefaultDataDir() {
  if (const char* v = std::getenv("EGTA_DATA_DIR"); v && *v) return v;
  return EGTA_DATA_DIR;
}

RunConfig DefaultRunConfig() {
  RunConfig c;
  c.prompts_dir = DefaultDataDir() / "prompts";
  c.initial_budget = 500.0;
  c.initial_fish_per_class = 200.0;
  c.initial_last_yield = c.policy.subsistence_income;
  return c;
}

void RunConfig::Validate() const {
  if (horizon < 1) throw ConfigError(fmt::format("horizon must be >= 1 (got {})", horizon));
  if (n_households < 1) throw ConfigError(fmt::format("n_households must be >= 1 (got {})", n_households));
  if (pipeline == PipelineKind::kExpertEgta && n_households < 2) {
    throw ConfigError("expert-egta needs n_households >= 2");
  }
  if (!(initial_fish_per_class >= 0)) throw ConfigError("initial_fish_per_class must be >= 0");
  if (authority_window < 1) throw ConfigError("authority.window must be >= 1");
  if (!(synthetic_inflow.mean_annual >= 0)) throw ConfigError("inflow.mean_annual must be >= 0");
  if (!(synthetic_inflow.noise_sigma >= 0)) throw ConfigError("inflow.noise_sigma must be >= 0");
  if (synthetic_inflow.amplitude < 0 || synthetic_inflow.amplitude > 1) throw ConfigError("inflow.amplitude must lie in [0, 1]");
  ecology.Validate();
  policy.Validate();
  RiverYear probe = river_layout;
  if (probe.irrigation_months.empty()) throw ConfigError("river.irrigation_months is empty");
  for (int m : probe.irrigation_months) {
    if (m < 1 || m > kMonths) throw ConfigError(fmt::format("river.irrigation_months: {} not in 1..12", m));
  }
  if (probe.may_index < 1 || probe.may_index > kMonths) throw ConfigError("river.may_index must lie in 1..12");
  if (UsesGateway(pipeline)) EffectiveGateway(*this).Validate();
}

GatewayConfig EffectiveGateway(const RunConfig& config) {
  GatewayConfig g = config.gateway;
  if (g.fixture.empty()) {
    g.fixture = config.prompts_dir / "stub" /
                (config.pipeline == PipelineKind::kNaiveEgta ? "naive.json" : "generative.json");
  }
  return g;
}

RunConfig ParseConfig(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config is not valid YAML: {}", e.what()));
  }
  RunConfig cfg = DefaultRunConfig();
  bool last_yield_set = false;
  if (root.IsDefined() && !root.IsNull()) {
    if (!root.IsMap()) throw ConfigError("config must be a mapping of keys to values");
    std::vector<std::pair<std::string, YAML::Node>> entries;
    Flatten(root, "", entries);
    for (const auto& [key, node] : entries) {
      const auto it = Setters().find(key);
      if (it == Setters().end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
      it->second(cfg, node, key, base_dir);
      if (key == "initial_last_yield") last_yield_set = true;
    }
  }
  if (!last_yield_set) cfg.initial_last_yield = cfg.policy.subsistence_income;

  if (cfg.prompts_dir.empty()) cfg.prompts_dir = DefaultDataDir() / "prompts";
  cfg.gateway.ApplyEnvironment();
  cfg.Validate();
  return cfg;
}

RunConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseConfig(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace egta
