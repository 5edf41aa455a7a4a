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

#include "egta/ecology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

// Absorbs the rounding left over when a monthly share is summed back up.
constexpr double kVolumeSlack = 1e-9;

void Require(bool ok, const char* what) {
  if (!ok) throw ConfigError(fmt::format("ecology parameter out of range: {}", what));
}

void ValidateRiver(const RiverYear& river) {
  if (river.irrigation_months.empty()) throw ConfigError("river: irrigation_months is empty");
  for (int m : river.irrigation_months) {
    if (m < 1 || m > kMonths) throw ConfigError(fmt::format("river: irrigation month {} not in 1..12", m));
  }
  if (river.may_index < 1 || river.may_index > kMonths) {
    throw ConfigError(fmt::format("river: may_index {} not in 1..12", river.may_index));
  }
  for (double q : river.monthly_inflow) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("river: monthly inflow must be finite and >= 0");
  }
}

}  // namespace

void EcologyParams::Validate() const {
  Require(water_per_field > 0, "water_per_field > 0");
  Require(irrigation_cost > 0, "irrigation_cost > 0");
  Require(base_yield > 0, "base_yield > 0");
  Require(stressed_yield > 0 && stressed_yield < base_yield, "0 < stressed_yield < base_yield");
  Require(reach_stress_threshold >= 0, "reach_stress_threshold >= 0");
  Require(consumption_cost >= 0, "consumption_cost >= 0");
  Require(fish_price >= 0, "fish_price >= 0");
  Require(adult_survival > 0 && adult_survival <= 1, "adult_survival in (0,1]");
  Require(larva_survival > 0 && larva_survival <= 1, "larva_survival in (0,1]");
  Require(juvenile_survival > 0 && juvenile_survival <= 1, "juvenile_survival in (0,1]");
  Require(juvenile_capacity > 0, "juvenile_capacity > 0");
  Require(fecundity >= 0, "fecundity >= 0");
  Require(migration_min_inflow >= 0, "migration_min_inflow >= 0");
  Require(migrant_larvae >= 0, "migrant_larvae >= 0");
  Require(reference_lake_inflow > 0, "reference_lake_inflow > 0");
  Require(stress_recovery >= 0 && stress_recovery <= 1, "stress_recovery in [0,1]");
}

double FishPopulation::AdultTotal() const {
  return std::accumulate(classes.begin() + kFirstAdultClass, classes.end(), 0.0);
}

double FishPopulation::Total() const { return std::accumulate(classes.begin(), classes.end(), 0.0); }

double RiverYear::AnnualTotal() const {
  return std::accumulate(monthly_inflow.begin(), monthly_inflow.end(), 0.0);
}

RoutingResult RouteRiver(const RiverYear& river, std::span<const int> planted_fields,
                         const EcologyParams& params) {
  ValidateRiver(river);
  const std::size_t n = planted_fields.size();
  std::array<bool, kMonths> irrigating{};
  for (int m : river.irrigation_months) irrigating[m - 1] = true;
  const double months = static_cast<double>(std::count(irrigating.begin(), irrigating.end(), true));

  std::vector<double> monthly_demand(n);
  for (std::size_t i = 0; i < n; ++i) {
    monthly_demand[i] = params.water_per_field * std::max(planted_fields[i], 0) / months;
  }

  RoutingResult out;
  out.delivered.assign(n, 0.0);
  out.node_inflow.assign(n, 0.0);
  out.withdrawals.assign(kMonths, std::vector<double>(n, 0.0));
  for (int m = 0; m < kMonths; ++m) {
    double flow = river.monthly_inflow[m];
    for (std::size_t i = 0; i < n; ++i) {
      out.node_inflow[i] += flow;
      if (!irrigating[m]) continue;
      const double take = std::min(monthly_demand[i], flow);
      out.withdrawals[m][i] = take;
      out.delivered[i] += take;
      flow -= take;
    }
    out.lake_inflow_by_month[m] = flow;
  }
  return out;
}

int IrrigableFields(int planted, double delivered, const EcologyParams& params) {
  if (planted <= 0) return 0;
  const double supported = std::floor(delivered / params.water_per_field + kVolumeSlack);
  return std::min(planted, static_cast<int>(std::max(supported, 0.0)));
}

CropOutcome ComputeCropOutcome(int planted, double delivered, double stress_in,
                               int total_irrigated_in_reach, const EcologyParams& params) {
  CropOutcome out;
  out.irrigated = IrrigableFields(planted, delivered, params);
  double deficit = 0.0;
  if (planted > 0) {
    deficit = std::clamp(1.0 - delivered / (params.water_per_field * planted), 0.0, 1.0);
    if (deficit < kVolumeSlack) deficit = 0.0;
  }
  out.stress_out = std::clamp(stress_in + deficit - params.stress_recovery, 0.0, 1.0);
  const double per_field = total_irrigated_in_reach <= params.reach_stress_threshold
                               ? params.base_yield
                               : params.stressed_yield;
  out.income = out.irrigated * per_field * (1.0 - out.stress_out);
  return out;
}

std::vector<int> DownstreamFirstOrder(int n_households) {
  std::vector<int> order(std::max(n_households, 0));
  std::iota(order.rbegin(), order.rend(), 0);
  return order;
}

FishStep StepFish(const FishPopulation& pop, const std::array<double, kMonths>& lake_inflow_by_month,
                  std::span<const double> harvest_targets, std::span<const int> harvest_order,
                  int may_index, const EcologyParams& params) {
  FishStep out;
  out.catches.assign(harvest_targets.size(), 0.0);
  out.pre_harvest_adults = pop.AdultTotal();

  // Harvest whole fish, nearest household first, then thin the adult classes
  // proportionally.
  double remaining = out.pre_harvest_adults;
  for (int who : harvest_order) {
    const double target = std::max(harvest_targets[who], 0.0);
    const double available = std::floor(remaining + kVolumeSlack);
    const double caught = std::clamp(std::min(target, available), 0.0, remaining);
    out.catches[who] = caught;
    remaining -= caught;
  }
  FishPopulation harvested = pop;
  if (out.pre_harvest_adults > 0) {
    const double keep = remaining <= 0 ? 0.0 : remaining / out.pre_harvest_adults;
    for (int k = kFirstAdultClass; k < kFishClasses; ++k) harvested.classes[k] *= keep;
  }
  const double spawners = harvested.AdultTotal();

  FishPopulation& next = out.population;
  next.classes[kFirstJuvenileClass] = harvested.classes[0] * params.larva_survival;
  for (int k = kFirstJuvenileClass; k < kFirstAdultClass; ++k) {
    const double a = harvested.classes[k];
    next.classes[k + 1] = params.juvenile_survival * a / (1.0 + a / params.juvenile_capacity);
  }
  for (int k = kFirstAdultClass; k + 1 < kFishClasses; ++k) {
    next.classes[k + 1] = harvested.classes[k] * params.adult_survival;
  }

  const double annual_lake =
      std::accumulate(lake_inflow_by_month.begin(), lake_inflow_by_month.end(), 0.0);
  double larvae = params.fecundity * spawners * std::min(1.0, annual_lake / params.reference_lake_inflow);
  if (may_index >= 1 && may_index <= kMonths &&
      lake_inflow_by_month[may_index - 1] >= params.migration_min_inflow) {
    larvae += params.migrant_larvae;
  }
  next.classes[0] = larvae;
  for (double& c : next.classes) c = std::max(c, 0.0);
  return out;
}

ActivityClass ClassifyActivity(int irrigated, double catch_count) {
  const bool farms = irrigated > 0;
  const bool fishes = catch_count > 0;
  if (farms && fishes) return ActivityClass::kBoth;
  if (farms) return ActivityClass::kFarmingOnly;
  if (fishes) return ActivityClass::kFishingOnly;
  return ActivityClass::kNone;
}

std::string_view ActivityName(ActivityClass activity) {
  switch (activity) {
    case ActivityClass::kBoth: return "both";
    case ActivityClass::kFarmingOnly: return "farming_only";
    case ActivityClass::kFishingOnly: return "fishing_only";
    case ActivityClass::kNone: return "none";
  }
  return "none";
}

WorldState MakeInitialWorld(int n_households, double initial_budget, double initial_fish_per_class,
                            double initial_last_yield) {
  WorldState world;
  world.households.resize(std::max(n_households, 0));
  for (int i = 0; i < n_households; ++i) {
    HouseholdState& h = world.households[i];
    h.index = i + 1;
    h.budget = initial_budget;
    h.last_yield_income = initial_last_yield;
  }
  world.fish.classes.fill(initial_fish_per_class);
  return world;
}

YearOutcome AdvanceYear(const WorldState& state, const RiverYear& river,
                        std::span<const Decision> decisions, const EcologyParams& params) {
  const std::size_t n = state.households.size();
  if (decisions.size() != n) {
    throw ConfigError(fmt::format("advance_year: {} decisions for {} households", decisions.size(), n));
  }
  YearOutcome out;
  out.river = river;

  std::vector<int> planted(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    planted[i] = std::max(decisions[i].fields_planted, 0);
    targets[i] = std::max(decisions[i].fish_target, 0);
  }
  out.routing = RouteRiver(river, planted, params);

  int total_irrigated = 0;
  for (std::size_t i = 0; i < n; ++i) total_irrigated += IrrigableFields(planted[i], out.routing.delivered[i], params);

  const std::vector<int> order = DownstreamFirstOrder(static_cast<int>(n));
  out.fish = StepFish(state.fish, out.routing.lake_inflow_by_month, targets, order, river.may_index, params);

  out.state = state;
  out.state.year = state.year + 1;
  out.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    HouseholdState& h = out.state.households[i];
    const CropOutcome crop =
        ComputeCropOutcome(planted[i], out.routing.delivered[i], h.stress, total_irrigated, params);
    const double caught = out.fish.catches[i];
    const double fish_income = params.fish_price * caught;
    const double irrigation_cost = params.irrigation_cost * crop.irrigated;
    h.budget += crop.income + fish_income - irrigation_cost - params.consumption_cost;
    h.stress = crop.stress_out;
    h.last_yield_income = crop.income;
    h.last_fields = planted[i];
    h.last_catch = caught;

    YearRecord& r = out.records.emplace_back();
    r.year = out.state.year;
    r.household = h.index;
    r.planted = planted[i];
    r.irrigated = crop.irrigated;
    r.delivered = out.routing.delivered[i];
    r.crop_income = crop.income;
    r.catch_count = caught;
    r.fish_income = fish_income;
    r.irrigation_cost = irrigation_cost;
    r.budget = h.budget;
    r.stress = h.stress;
    r.activity = ClassifyActivity(crop.irrigated, caught);
  }
  out.state.fish = out.fish.population;
  out.state.last_node_inflow = out.routing.node_inflow;
  out.state.annual_inflow_history.push_back(river.AnnualTotal());
  out.state.last_lake_inflow = std::accumulate(out.routing.lake_inflow_by_month.begin(),
                                               out.routing.lake_inflow_by_month.end(), 0.0);
  return out;
}

}  // namespace egta
