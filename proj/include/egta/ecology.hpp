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

#ifndef EGTA_ECOLOGY_HPP_
#define EGTA_ECOLOGY_HPP_

// Ecological model of a river reach with farming households strung along it
// and a terminal lake holding an age-structured fish population.
//
// Households are ordered upstream to downstream (index 1 is the most
// upstream). Each year water is routed month by month: every household
// withdraws its share of the irrigation plan in upstream order and whatever
// is left flows on to the lake. Lake inflow drives fish recruitment; fish are
// harvested from the adult classes, nearest-to-the-lake households first.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace egta {

inline constexpr int kMonths = 12;
inline constexpr int kFishClasses = 13;
inline constexpr int kFirstJuvenileClass = 1;
inline constexpr int kFirstAdultClass = 5;

struct EcologyParams {
  double water_per_field = 10.0;      // w, volume per field per year
  double irrigation_cost = 10.0;      // c, money per irrigated field
  double base_yield = 50.0;           // y0, income per field
  double stressed_yield = 23.0;       // ys < y0
  int reach_stress_threshold = 27;    // fields irrigated along the whole reach
  double consumption_cost = 50.0;     // kappa, per household per year
  double fish_price = 5.0;
  double adult_survival = 0.8;
  double larva_survival = 0.2;
  double juvenile_survival = 0.7;     // base rate of the density-dependent form
  double juvenile_capacity = 5000.0;
  double fecundity = 10.0;            // larvae per adult per year
  double migration_min_inflow = 20.0; // lake inflow needed in the trigger month
  double migrant_larvae = 3000.0;
  double reference_lake_inflow = 200.0;
  double stress_recovery = 0.25;

  // Throws ConfigError naming the first violated bound.
  void Validate() const;
};

struct HouseholdState {
  int index = 1;  // 1 = most upstream
  double budget = 0.0;
  double stress = 0.0;  // [0, 1]
  double last_yield_income = 0.0;
  int last_fields = 0;
  double last_catch = 0.0;
};

struct FishPopulation {
  std::array<double, kFishClasses> classes{};

  double AdultTotal() const;
  double Total() const;
};

struct RiverYear {
  std::array<double, kMonths> monthly_inflow{};
  std::vector<int> irrigation_months{5, 6, 7, 8, 9};  // 1-based months
  int may_index = 5;

  double AnnualTotal() const;
};

struct RoutingResult {
  std::vector<double> delivered;  // per household, annual
  // Annual volume arriving at each household's node before it withdraws.
  std::vector<double> node_inflow;
  std::array<double, kMonths> lake_inflow_by_month{};
  // withdrawals[month][household]
  std::vector<std::vector<double>> withdrawals;
};

RoutingResult RouteRiver(const RiverYear& river, std::span<const int> planted_fields,
                         const EcologyParams& params);

struct CropOutcome {
  double income = 0.0;
  double stress_out = 0.0;
  int irrigated = 0;
};

CropOutcome ComputeCropOutcome(int planted, double delivered, double stress_in,
                               int total_irrigated_in_reach, const EcologyParams& params);

// Fields that the delivered volume can actually irrigate.
int IrrigableFields(int planted, double delivered, const EcologyParams& params);

struct FishStep {
  FishPopulation population;
  std::vector<double> catches;  // aligned with the order of `harvest_targets`
  double pre_harvest_adults = 0.0;
};

// `harvest_order` lists household positions (0-based into harvest_targets)
// in the order they fish, nearest to the lake first.
FishStep StepFish(const FishPopulation& pop, const std::array<double, kMonths>& lake_inflow_by_month,
                  std::span<const double> harvest_targets, std::span<const int> harvest_order,
                  int may_index, const EcologyParams& params);

// Household positions ordered nearest-to-the-lake first.
std::vector<int> DownstreamFirstOrder(int n_households);

enum class ActivityClass : std::uint8_t { kBoth, kFarmingOnly, kFishingOnly, kNone };

ActivityClass ClassifyActivity(int irrigated, double catch_count);
std::string_view ActivityName(ActivityClass activity);

struct Decision {
  int fields_planted = 0;
  int fish_target = 0;
};

struct YearRecord {
  int year = 0;
  int household = 0;  // 1-based
  int planted = 0;
  int irrigated = 0;
  double delivered = 0.0;
  double crop_income = 0.0;
  double catch_count = 0.0;
  double fish_income = 0.0;
  double irrigation_cost = 0.0;
  double budget = 0.0;
  double stress = 0.0;
  ActivityClass activity = ActivityClass::kNone;
};

struct WorldState {
  int year = 0;  // number of completed years
  std::vector<HouseholdState> households;
  FishPopulation fish;
  // Filled in by AdvanceYear; empty before the first year.
  std::vector<double> last_node_inflow;
  std::vector<double> annual_inflow_history;
  double last_lake_inflow = 0.0;
};

WorldState MakeInitialWorld(int n_households, double initial_budget, double initial_fish_per_class,
                            double initial_last_yield);

struct YearOutcome {
  WorldState state;
  std::vector<YearRecord> records;
  RoutingResult routing;
  FishStep fish;
  RiverYear river;
};

// Routes water, grows crops, steps the fish population and settles budgets.
// Throws ConfigError when the decision count differs from the household count.
YearOutcome AdvanceYear(const WorldState& state, const RiverYear& river,
                        std::span<const Decision> decisions, const EcologyParams& params);

}  // namespace egta

#endif  // EGTA_ECOLOGY_HPP_
