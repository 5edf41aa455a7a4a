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

#include "egta/policies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

using nlohmann::json;

constexpr double kFloorSlack = 1e-9;

int FloorCount(double v) { return v <= 0 ? 0 : static_cast<int>(std::floor(v + kFloorSlack)); }

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string ReadPrompt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open prompt file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = Trim(ss.str());
  if (text.empty()) throw ConfigError(fmt::format("prompt file {} is empty", path.string()));
  return text;
}

std::string FormatNumber(double v) {
  if (std::abs(v - std::round(v)) < 1e-9) return fmt::format("{:.0f}", v);
  return fmt::format("{:.2f}", v);
}

std::optional<int> JsonInt(const json& v) {
  if (v.is_number_integer()) return static_cast<int>(std::clamp<long long>(v.get<long long>(), -1000000, 1000000));
  if (v.is_number()) return static_cast<int>(std::clamp(std::round(v.get<double>()), -1e6, 1e6));
  if (v.is_string()) {
    const std::string s = Trim(v.get<std::string>());
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    try {
      const long long n = std::stoll(s, &used);
      if (used == s.size()) return static_cast<int>(std::clamp<long long>(n, -1000000, 1000000));
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

int ClampTo(int v, int upper, bool* clamped) {
  const int out = std::clamp(v, 0, upper);
  if (clamped && out != v) *clamped = true;
  return out;
}

// Runs one request per household, re-asking up to parse_retries times when
// `parse` rejects a reply. Households whose reply never parses, or whose
// request fails in transport, get `fallback` and a logged event.
template <typename Parse, typename Fallback>
std::vector<Decision> ResolveDecisions(LlmGateway& gateway, const std::vector<ChatRequest>& requests,
                                       const std::vector<RequestTag>& tags, const PolicyParams& params,
                                       std::vector<PolicyEvent>& events, Parse parse, Fallback fallback) {
  const std::vector<CompletionResult> first = gateway.CompleteBatch(requests, tags);
  std::vector<Decision> out(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const RequestTag& tag = tags[i];
    std::optional<Decision> decision;
    std::string failure;
    if (first[i].text) {
      decision = parse(i, *first[i].text);
      for (int retry = 0; !decision && retry < params.parse_retries; ++retry) {
        events.push_back({tag.year, tag.household, "retry", "unusable reply"});
        try {
          decision = parse(i, gateway.Complete(requests[i], tag));
        } catch (const TransportError& e) {
          failure = fmt::format("transport: {}", e.what());
          break;
        }
      }
      if (!decision && failure.empty()) failure = "unusable reply after retries";
    } else {
      failure = fmt::format("transport: {}", first[i].error);
    }
    if (!decision) {
      events.push_back({tag.year, tag.household, "fallback", failure});
      decision = fallback(i);
    }
    out[i] = *decision;
  }
  return out;
}

}  // namespace

void PolicyParams::Validate() const {
  if (max_fields < 0) throw ConfigError("max_fields must be >= 0");
  if (max_fish < 0) throw ConfigError("max_fish must be >= 0");
  if (pair_stress_threshold < 0) throw ConfigError("pair_stress_threshold must be >= 0");
  if (!(fishing_effort_cost >= 0)) throw ConfigError("fishing_effort_cost must be >= 0");
  if (!(tau >= 0)) throw ConfigError(fmt::format("tau must be >= 0 (got {})", tau));
  if (base_fish_target < 0) throw ConfigError("base_fish_target must be >= 0");
  if (low_action < 0 || low_action > max_fields) throw ConfigError("low_action must lie in [0, max_fields]");
  if (parse_retries < 0) throw ConfigError("parse_retries must be >= 0");
}

std::string_view BehaviourName(BehaviourKind kind) {
  switch (kind) {
    case BehaviourKind::kAltruistic: return "altruistic";
    case BehaviourKind::kBalanced: return "balanced";
    case BehaviourKind::kRational: return "rational";
  }
  return "rational";
}

BehaviourKind ParseBehaviour(std::string_view name) {
  for (BehaviourKind k : {BehaviourKind::kAltruistic, BehaviourKind::kBalanced, BehaviourKind::kRational}) {
    if (name == BehaviourName(k)) return k;
  }
  throw ConfigError(fmt::format("unknown behaviour '{}' (valid: altruistic, balanced, rational)", name));
}

PromptSet LoadPromptSet(const std::filesystem::path& dir, BehaviourKind behaviour) {
  PromptSet p;
  p.role = ReadPrompt(dir / "role.txt");
  p.naive_role = ReadPrompt(dir / "naive_role.txt");
  p.naive_decision = ReadPrompt(dir / "naive_decision.txt");
  p.as_extraction = ReadPrompt(dir / "as_extraction.txt");
  p.odd_d = ReadPrompt(dir / "odd_d.txt");
  p.profile.kind = behaviour;
  p.profile.system_prompt = ReadPrompt(dir / fmt::format("{}.txt", BehaviourName(behaviour)));
  return p;
}

double MovingAveragePredict(const std::deque<double>& history, int window) {
  if (window < 1) throw ConfigError("moving average window must be >= 1");
  if (history.empty()) throw ConfigError("moving average needs at least one observation");
  const std::size_t k = std::min(history.size(), static_cast<std::size_t>(window));
  return std::accumulate(history.end() - static_cast<std::ptrdiff_t>(k), history.end(), 0.0) / static_cast<double>(k);
}

double MovingAveragePredict(const std::vector<double>& history, int window) {
  return MovingAveragePredict(std::deque<double>(history.begin(), history.end()), window);
}

int ProximityFishTarget(int household_index, int n_households, const PolicyParams& params) {
  if (n_households < 1) return 0;
  const double t = std::round(static_cast<double>(params.base_fish_target) * household_index / n_households);
  return std::clamp(static_cast<int>(t), 0, params.max_fish);
}

Decision ProceduralDecide(const HouseholdState& household, double predicted_water, int n_households,
                          const EcologyParams& ecology, const PolicyParams& params) {
  int fields = 0;
  if (household.budget < 0) {
    fields = 0;
  } else if (household.last_yield_income < params.subsistence_income) {
    const int next = household.last_fields + 1;
    fields = household.budget >= next * ecology.irrigation_cost ? next
                                                                : FloorCount(household.budget / ecology.irrigation_cost);
  } else {
    fields = FloorCount(predicted_water / ecology.water_per_field);
  }
  return {std::clamp(fields, 0, params.max_fields), ProximityFishTarget(household.index, n_households, params)};
}

Allocation CentralizedAllocate(const AuthorityState& authority, double predicted_inflow, int n_households,
                               const EcologyParams& ecology, const PolicyParams& params) {
  Allocation out;
  out.fields.assign(std::max(n_households, 0), 0);
  if (n_households < 1) return out;
  const int total = std::min(FloorCount(predicted_inflow / ecology.water_per_field),
                             FloorCount(authority.budget / ecology.irrigation_cost));
  const int each = std::min(total / n_households, params.max_fields);
  std::fill(out.fields.begin(), out.fields.end(), each);
  out.unallocated = total - each * n_households;
  return out;
}

void SettleAuthorityBudget(AuthorityState& authority, const std::vector<YearRecord>& records,
                           const EcologyParams& ecology) {
  for (const YearRecord& r : records) {
    authority.budget += r.crop_income - r.irrigation_cost - ecology.consumption_cost;
  }
}

double UnitUniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

int SampleIndex(const std::vector<double>& dist, std::mt19937_64& rng) {
  const double u = UnitUniform(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist[i];
    if (u < acc) return static_cast<int>(i);
  }
  for (std::size_t i = dist.size(); i-- > 0;)
    if (dist[i] > 0) return static_cast<int>(i);
  return 0;
}

}  // namespace

ExpertYearPlan ExpertEgtaDecide(const WorldState& state, const std::vector<double>& node_water,
                                const EcologyParams& ecology, const PolicyParams& params, std::mt19937_64& rng,
                                int year) {
  const int n = static_cast<int>(state.households.size());
  if (n < 2) throw ConfigError("expert-egta needs at least 2 households");
  if (static_cast<int>(node_water.size()) != n) throw ConfigError("expert-egta: one node water value per household");

  ExpertYearPlan plan;
  const double stock = state.fish.AdultTotal();
  const CprFishingGame fishing =
      BuildCprFishingGame(stock, ecology.fish_price, params.fishing_effort_cost, n, params.max_fish);
  plan.fishing = SolveSymmetricCpr(fishing.payoff, n, params.max_fish);

  // Expected catch mirrors the harvest rule: whole fish, nearest the lake first.
  plan.fish_income.assign(n, 0.0);
  double remaining = stock;
  for (int who : DownstreamFirstOrder(n)) {
    const double caught = std::min<double>(plan.fishing.extraction, std::floor(remaining + kFloorSlack));
    const double taken = std::clamp(caught, 0.0, remaining);
    plan.fish_income[who] = ecology.fish_price * taken;
    remaining -= taken;
  }

  std::vector<std::pair<int, int>> choice(n - 1);
  for (int p = 0; p + 1 < n; ++p) {
    IrrigationGameSpec spec;
    spec.upstream_budget = state.households[p].budget;
    spec.downstream_budget = state.households[p + 1].budget;
    spec.irrigation_cost = ecology.irrigation_cost;
    spec.total_water = node_water[p];
    spec.water_per_field = ecology.water_per_field;
    spec.base_yield = ecology.base_yield;
    spec.stressed_yield = ecology.stressed_yield;
    spec.stress_threshold = params.pair_stress_threshold;
    spec.consumption_cost = ecology.consumption_cost;
    spec.tax = params.tau;
    spec.upstream_fish_income = plan.fish_income[p];
    spec.downstream_fish_income = plan.fish_income[p + 1];
    spec.max_fields = params.max_fields;
    try {
      const BimatrixGame game = BuildIrrigationGame(spec);
      SelectedEquilibrium eq = SolveGame(game, params.selection);
      if (eq.pure) {
        choice[p] = {eq.pure->row, eq.pure->col};
      } else {
        const int up = SampleIndex(eq.profile.row_dist, rng);
        const int down = SampleIndex(eq.profile.col_dist, rng);
        choice[p] = {up, down};
      }
      plan.pair_equilibria.push_back(std::move(eq));
    } catch (const std::runtime_error& e) {
      throw RunError(fmt::format("pair {} (households {} and {}): {}", p + 1, p + 1, p + 2, e.what()), year, p + 1);
    }
  }

  plan.decisions.resize(n);
  for (int i = 0; i < n; ++i) {
    int fields = 0;
    if (i == 0) {
      fields = choice[0].first;
    } else if (i == n - 1) {
      fields = choice[n - 2].second;
    } else {
      fields = UnitUniform(rng) < 0.5 ? choice[i - 1].second : choice[i].first;
    }
    plan.decisions[i] = {std::clamp(fields, 0, params.max_fields), std::clamp(plan.fishing.extraction, 0, params.max_fish)};
  }
  return plan;
}

std::optional<ParsedReply> ParseDecisionReply(std::string_view text, const PolicyParams& params) {
  json v;
  try {
    v = ExtractStructured(text);
  } catch (const SchemaError&) {
    return std::nullopt;
  }
  ParsedReply out;
  std::optional<int> fields;
  if (v.is_object()) {
    for (const char* key : {"fields", "fields_planted", "irrigate"}) {
      if (v.contains(key)) {
        fields = JsonInt(v[key]);
        break;
      }
    }
    for (const char* key : {"fish", "fish_target", "catch"}) {
      if (v.contains(key)) {
        if (auto f = JsonInt(v[key])) out.fish = ClampTo(*f, params.max_fish, &out.fish_clamped);
        break;
      }
    }
  } else {
    fields = JsonInt(v);
  }
  if (!fields) return std::nullopt;
  out.fields = ClampTo(*fields, params.max_fields, &out.fields_clamped);
  return out;
}

std::optional<int> MapActionLabel(const json& label, int upper, int low_action, bool* clamped) {
  if (label.is_string()) {
    const std::string s = Lower(Trim(label.get<std::string>()));
    if (s == "high") return upper;
    if (s == "low") return std::min(low_action, upper);
  }
  if (auto v = JsonInt(label)) return ClampTo(*v, upper, clamped);
  return std::nullopt;
}

std::vector<double> NodeWaterView(const WorldState& state, double observed_inflow) {
  if (state.last_node_inflow.size() == state.households.size()) return state.last_node_inflow;
  return std::vector<double>(state.households.size(), observed_inflow);
}

ProceduralPipeline::ProceduralPipeline(EcologyParams ecology, PolicyParams params)
    : ecology_(ecology), params_(params) {}

std::vector<Decision> ProceduralPipeline::Decide(const WorldState& state, const YearContext& ctx) {
  const std::vector<double> water = NodeWaterView(state, ctx.observed_inflow);
  const int n = static_cast<int>(state.households.size());
  std::vector<Decision> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(ProceduralDecide(state.households[i], water[i], n, ecology_, params_));
  return out;
}

CentralizedPipeline::CentralizedPipeline(EcologyParams ecology, PolicyParams params, AuthorityState authority)
    : ecology_(ecology), params_(params), authority_(std::move(authority)) {
  if (authority_.window < 1) throw ConfigError("authority window must be >= 1");
}

std::vector<Decision> CentralizedPipeline::Decide(const WorldState& state, const YearContext& ctx) {
  const int n = static_cast<int>(state.households.size());
  const double predicted =
      authority_.inflow_history.empty() ? ctx.observed_inflow : MovingAveragePredict(authority_.inflow_history, authority_.window);
  const Allocation a = CentralizedAllocate(authority_, predicted, n, ecology_, params_);
  std::vector<Decision> out(n);
  for (int i = 0; i < n; ++i) out[i] = {a.fields[i], ProximityFishTarget(i + 1, n, params_)};
  return out;
}

void CentralizedPipeline::Observe(const YearOutcome& outcome) {
  SettleAuthorityBudget(authority_, outcome.records, ecology_);
  authority_.inflow_history.push_back(outcome.river.AnnualTotal());
  while (static_cast<int>(authority_.inflow_history.size()) > authority_.window) authority_.inflow_history.pop_front();
}

ExpertEgtaPipeline::ExpertEgtaPipeline(EcologyParams ecology, PolicyParams params)
    : ecology_(ecology), params_(params) {}

std::vector<Decision> ExpertEgtaPipeline::Decide(const WorldState& state, const YearContext& ctx) {
  if (!ctx.rng) throw ConfigError("expert-egta needs a random stream");
  return ExpertEgtaDecide(state, NodeWaterView(state, ctx.observed_inflow), ecology_, params_, *ctx.rng, ctx.year)
      .decisions;
}

GenerativePipeline::GenerativePipeline(EcologyParams ecology, PolicyParams params, PromptSet prompts,
                                       LlmGateway& gateway)
    : ecology_(ecology), params_(params), prompts_(std::move(prompts)), gateway_(gateway) {}

std::vector<Decision> GenerativePipeline::Decide(const WorldState& state, const YearContext& ctx) {
  const std::vector<double> water = NodeWaterView(state, ctx.observed_inflow);
  const int n = static_cast<int>(state.households.size());
  std::vector<ChatRequest> requests;
  std::vector<RequestTag> tags;
  for (int i = 0; i < n; ++i) {
    const HouseholdState& h = state.households[i];
    const std::string user = RenderPrompt(prompts_.role, {{"household", std::to_string(h.index)},
                                                          {"n_households", std::to_string(n)},
                                                          {"year", std::to_string(ctx.year)},
                                                          {"predicted_water", FormatNumber(water[i])},
                                                          {"last_yield", FormatNumber(h.last_yield_income)},
                                                          {"subsistence", FormatNumber(params_.subsistence_income)},
                                                          {"water_per_field", FormatNumber(ecology_.water_per_field)},
                                                          {"irrigation_cost", FormatNumber(ecology_.irrigation_cost)},
                                                          {"budget", FormatNumber(h.budget)},
                                                          {"max_fields", std::to_string(params_.max_fields)},
                                                          {"max_fish", std::to_string(params_.max_fish)}});
    requests.push_back(gateway_.MakeRequest({{ChatRole::kSystem, prompts_.profile.system_prompt}, {ChatRole::kUser, user}}));
    tags.push_back({ctx.year, h.index, "generative", "decision"});
  }
  auto parse = [&](std::size_t i, const std::string& text) -> std::optional<Decision> {
    auto reply = ParseDecisionReply(text, params_);
    if (!reply) return std::nullopt;
    const int index = state.households[i].index;
    if (reply->fields_clamped) events_.push_back({ctx.year, index, "clamp", "fields"});
    if (reply->fish_clamped) events_.push_back({ctx.year, index, "clamp", "fish"});
    return Decision{reply->fields, reply->fish.value_or(ProximityFishTarget(index, n, params_))};
  };
  auto fallback = [&](std::size_t i) {
    return ProceduralDecide(state.households[i], water[i], n, ecology_, params_);
  };
  return ResolveDecisions(gateway_, requests, tags, params_, events_, parse, fallback);
}

NaiveEgtaPipeline::NaiveEgtaPipeline(EcologyParams ecology, PolicyParams params, PromptSet prompts,
                                     LlmGateway& gateway)
    : ecology_(ecology), params_(params), prompts_(std::move(prompts)), gateway_(gateway) {}

ChatRequest NaiveEgtaPipeline::ExtractionRequest() const {
  return gateway_.MakeRequest({{ChatRole::kSystem, prompts_.naive_role},
                               {ChatRole::kUser, RenderPrompt(prompts_.as_extraction, {{"odd_d", prompts_.odd_d}})}});
}

void NaiveEgtaPipeline::ExtractActionSituations() {
  if (extracted_) return;
  extracted_ = true;
  const ChatRequest request = ExtractionRequest();
  const RequestTag tag{0, 0, "naive-egta", "as_extraction"};
  for (int attempt = 0; attempt <= params_.parse_retries; ++attempt) {
    try {
      situations_ = ParseLlmGame(gateway_.Complete(request, tag));
      break;
    } catch (const SchemaError& e) {
      events_.push_back({0, 0, "retry", fmt::format("action situations: {}", e.what())});
    } catch (const TransportError& e) {
      events_.push_back({0, 0, "fallback", fmt::format("action situations: transport: {}", e.what())});
      break;
    }
  }
  for (const ActionSituationModel& as : situations_) {
    if (!pairwise_ && as.kind == ActionSituationKind::kPairwiseCooperation) pairwise_ = as;
    if (!commons_ && as.kind == ActionSituationKind::kCommonPoolResource) commons_ = as;
  }
}

std::string NaiveEgtaPipeline::DescribeSituations() const {
  std::string out;
  for (const auto* as : {&pairwise_, &commons_}) {
    if (!*as) continue;
    const ActionSituationModel& m = **as;
    std::string actions;
    for (const std::string& a : m.actions) actions += (actions.empty() ? "" : ", ") + a;
    std::string parts;
    for (const std::string& p : m.participants) parts += (parts.empty() ? "" : ", ") + p;
    out += fmt::format("- {} ({}); participants: {}; actions: {}\n", m.name, KindName(m.kind), parts, actions);
    const std::size_t k = m.actions.size();
    for (std::size_t r = 0; r < k && !m.payoff_cells.empty(); ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        const auto& cell = m.payoff_cells[r * k + c];
        out += fmt::format("  ({}, {}) -> ({}, {})\n", m.actions[r], m.actions[c], FormatNumber(cell[0]),
                           FormatNumber(cell[1]));
      }
    }
  }
  return Trim(out);
}

std::vector<Decision> NaiveEgtaPipeline::Decide(const WorldState& state, const YearContext& ctx) {
  ExtractActionSituations();
  const std::vector<double> water = NodeWaterView(state, ctx.observed_inflow);
  const int n = static_cast<int>(state.households.size());
  auto procedural = [&](std::size_t i) {
    return ProceduralDecide(state.households[i], water[i], n, ecology_, params_);
  };
  if (!pairwise_) {
    std::vector<Decision> out;
    for (int i = 0; i < n; ++i) {
      events_.push_back({ctx.year, state.households[i].index, "fallback", "no pairwise action situation"});
      out.push_back(procedural(i));
    }
    return out;
  }

  const std::string situations = DescribeSituations();
  std::vector<ChatRequest> requests;
  std::vector<RequestTag> tags;
  for (int i = 0; i < n; ++i) {
    const HouseholdState& h = state.households[i];
    const std::string user = RenderPrompt(prompts_.naive_decision, {{"household", std::to_string(h.index)},
                                                                    {"n_households", std::to_string(n)},
                                                                    {"year", std::to_string(ctx.year)},
                                                                    {"situations", situations},
                                                                    {"budget", FormatNumber(h.budget)},
                                                                    {"predicted_water", FormatNumber(water[i])},
                                                                    {"max_fields", std::to_string(params_.max_fields)},
                                                                    {"max_fish", std::to_string(params_.max_fish)}});
    requests.push_back(gateway_.MakeRequest({{ChatRole::kSystem, prompts_.profile.system_prompt}, {ChatRole::kUser, user}}));
    tags.push_back({ctx.year, h.index, "naive-egta", "decision"});
  }

  auto parse = [&](std::size_t i, const std::string& text) -> std::optional<Decision> {
    const int index = state.households[i].index;
    json fields_label;
    json fish_label;
    try {
      const json v = ExtractStructured(text);
      if (v.is_object()) {
        for (const std::string& key : {std::string("fields"), pairwise_->name}) {
          if (v.contains(key)) {
            fields_label = v[key];
            break;
          }
        }
        for (const std::string& key : {std::string("fish"), commons_ ? commons_->name : std::string("fish")}) {
          if (v.contains(key)) {
            fish_label = v[key];
            break;
          }
        }
      } else {
        fields_label = v;
      }
    } catch (const SchemaError&) {
      // A bare action label such as "low".
      const std::string lower = Lower(text);
      std::size_t best = std::string::npos;
      for (const std::string& a : pairwise_->actions) {
        const std::size_t at = lower.find(Lower(a));
        if (at < best) {
          best = at;
          fields_label = a;
        }
      }
    }
    bool fields_clamped = false;
    bool fish_clamped = false;
    const std::optional<int> fields = MapActionLabel(fields_label, params_.max_fields, params_.low_action, &fields_clamped);
    if (!fields) return std::nullopt;
    std::optional<int> fish;
    if (!fish_label.is_null()) fish = MapActionLabel(fish_label, params_.max_fish, params_.low_action, &fish_clamped);
    if (fields_clamped) events_.push_back({ctx.year, index, "clamp", "fields"});
    if (fish_clamped) events_.push_back({ctx.year, index, "clamp", "fish"});
    return Decision{*fields, fish.value_or(ProximityFishTarget(index, n, params_))};
  };
  return ResolveDecisions(gateway_, requests, tags, params_, events_, parse, procedural);
}

}  // namespace egta
