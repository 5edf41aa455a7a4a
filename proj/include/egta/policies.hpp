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

#ifndef EGTA_POLICIES_HPP_
#define EGTA_POLICIES_HPP_

// Decision pipelines. Every pipeline maps the world at the start of a year to
// one Decision per household, in household order.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "egta/ecology.hpp"
#include "egta/empirical_games.hpp"
#include "egta/equilibrium.hpp"
#include "egta/llm_gateway.hpp"

namespace egta {

struct PolicyParams {
  int max_fields = 10;
  int max_fish = 10;  // e_max
  int pair_stress_threshold = 6;
  double fishing_effort_cost = 1.0;
  double tau = 0.0;
  double subsistence_income = 50.0;
  int base_fish_target = 10;  // fish target of the household nearest the lake
  int low_action = 2;         // value of an abstract "low" action
  int parse_retries = 2;      // re-asks after an unusable reply
  SelectionRule selection = SelectionRule::kMinTotalAction;

  void Validate() const;
};

struct AuthorityState {
  double budget = 0.0;
  std::deque<double> inflow_history;  // annual totals, oldest first
  int window = 20;
};

enum class BehaviourKind { kAltruistic, kBalanced, kRational };
std::string_view BehaviourName(BehaviourKind kind);
// Throws ConfigError listing the valid names.
BehaviourKind ParseBehaviour(std::string_view name);

struct BehaviourProfile {
  BehaviourKind kind = BehaviourKind::kRational;
  std::string system_prompt;
};

// Prompt templates read from a directory of plain text files.
struct PromptSet {
  std::string role;              // generative decision prompt
  std::string naive_role;        // system prompt for game extraction
  std::string naive_decision;    // yearly prompt of the naive pipeline
  std::string as_extraction;     // asks for the action situations
  std::string odd_d;             // model description handed to extraction
  BehaviourProfile profile;
};

// Throws IoError naming the missing file; ConfigError if a prompt is empty.
PromptSet LoadPromptSet(const std::filesystem::path& dir, BehaviourKind behaviour);

// Mean of the last min(window, size) entries. Throws ConfigError when the
// history is empty or window < 1.
double MovingAveragePredict(const std::deque<double>& history, int window);
double MovingAveragePredict(const std::vector<double>& history, int window);

// Lake-proximity ranked constant: round(base * index / n).
int ProximityFishTarget(int household_index, int n_households, const PolicyParams& params);

Decision ProceduralDecide(const HouseholdState& household, double predicted_water, int n_households,
                          const EcologyParams& ecology, const PolicyParams& params);

struct Allocation {
  std::vector<int> fields;  // per household
  int unallocated = 0;
};

Allocation CentralizedAllocate(const AuthorityState& authority, double predicted_inflow, int n_households,
                               const EcologyParams& ecology, const PolicyParams& params);

// Cumulative agricultural returns minus irrigation and consumption costs.
void SettleAuthorityBudget(AuthorityState& authority, const std::vector<YearRecord>& records,
                           const EcologyParams& ecology);

// Uniform double in [0, 1) from the top 53 bits; stable across standard
// libraries, unlike std::uniform_real_distribution.
double UnitUniform(std::mt19937_64& rng);

struct ExpertYearPlan {
  std::vector<Decision> decisions;
  CprSolution fishing;
  std::vector<double> fish_income;  // F_i estimates
  std::vector<SelectedEquilibrium> pair_equilibria;
};

// `node_water[i]` is the annual volume expected at household i's node.
// Throws RunError carrying the pair index when a pair game cannot be solved.
ExpertYearPlan ExpertEgtaDecide(const WorldState& state, const std::vector<double>& node_water,
                                const EcologyParams& ecology, const PolicyParams& params, std::mt19937_64& rng,
                                int year);

struct PolicyEvent {
  int year = 0;
  int household = 0;  // 1-based; 0 for run-level events
  std::string kind;   // clamp, retry, fallback
  std::string detail;
};

struct ParsedReply {
  int fields = 0;
  std::optional<int> fish;
  bool fields_clamped = false;
  bool fish_clamped = false;
};

// Reads {"fields": n, "fish": m} or a bare integer (fields only). Returns
// nullopt when the reply holds neither.
std::optional<ParsedReply> ParseDecisionReply(std::string_view text, const PolicyParams& params);

// "high" -> upper, "low" -> low_action, integers clamped into [0, upper].
// Sets `clamped` when an integer was out of range.
std::optional<int> MapActionLabel(const nlohmann::json& label, int upper, int low_action, bool* clamped = nullptr);

struct YearContext {
  int year = 1;                   // year about to be simulated, 1-based
  double observed_inflow = 0.0;   // raw annual inflow of that year
  std::mt19937_64* rng = nullptr;
};

class Pipeline {
 public:
  virtual ~Pipeline() = default;
  virtual std::string_view name() const = 0;
  virtual std::vector<Decision> Decide(const WorldState& state, const YearContext& ctx) = 0;
  virtual void Observe(const YearOutcome& /*outcome*/) {}
  const std::vector<PolicyEvent>& events() const { return events_; }

 protected:
  std::vector<PolicyEvent> events_;
};

// Previous year's flow at each node, or the raw inflow before the first year.
std::vector<double> NodeWaterView(const WorldState& state, double observed_inflow);

class ProceduralPipeline : public Pipeline {
 public:
  ProceduralPipeline(EcologyParams ecology, PolicyParams params);
  std::string_view name() const override { return "procedural"; }
  std::vector<Decision> Decide(const WorldState& state, const YearContext& ctx) override;

 private:
  EcologyParams ecology_;
  PolicyParams params_;
};

class CentralizedPipeline : public Pipeline {
 public:
  CentralizedPipeline(EcologyParams ecology, PolicyParams params, AuthorityState authority);
  std::string_view name() const override { return "centralized"; }
  std::vector<Decision> Decide(const WorldState& state, const YearContext& ctx) override;
  void Observe(const YearOutcome& outcome) override;
  const AuthorityState& authority() const { return authority_; }

 private:
  EcologyParams ecology_;
  PolicyParams params_;
  AuthorityState authority_;
};

class ExpertEgtaPipeline : public Pipeline {
 public:
  ExpertEgtaPipeline(EcologyParams ecology, PolicyParams params);
  std::string_view name() const override { return "expert-egta"; }
  std::vector<Decision> Decide(const WorldState& state, const YearContext& ctx) override;

 private:
  EcologyParams ecology_;
  PolicyParams params_;
};

class GenerativePipeline : public Pipeline {
 public:
  GenerativePipeline(EcologyParams ecology, PolicyParams params, PromptSet prompts, LlmGateway& gateway);
  std::string_view name() const override { return "generative"; }
  std::vector<Decision> Decide(const WorldState& state, const YearContext& ctx) override;

 private:
  EcologyParams ecology_;
  PolicyParams params_;
  PromptSet prompts_;
  LlmGateway& gateway_;
};

class NaiveEgtaPipeline : public Pipeline {
 public:
  NaiveEgtaPipeline(EcologyParams ecology, PolicyParams params, PromptSet prompts, LlmGateway& gateway);
  std::string_view name() const override { return "naive-egta"; }
  std::vector<Decision> Decide(const WorldState& state, const YearContext& ctx) override;

  // Asks for the action situations once; later calls are no-ops.
  void ExtractActionSituations();
  const std::vector<ActionSituationModel>& situations() const { return situations_; }
  const std::optional<ActionSituationModel>& pairwise() const { return pairwise_; }
  const std::optional<ActionSituationModel>& commons() const { return commons_; }

  ChatRequest ExtractionRequest() const;

 private:
  std::string DescribeSituations() const;

  EcologyParams ecology_;
  PolicyParams params_;
  PromptSet prompts_;
  LlmGateway& gateway_;
  bool extracted_ = false;
  std::vector<ActionSituationModel> situations_;
  std::optional<ActionSituationModel> pairwise_;
  std::optional<ActionSituationModel> commons_;
};

}  // namespace egta

#endif  // EGTA_POLICIES_HPP_
