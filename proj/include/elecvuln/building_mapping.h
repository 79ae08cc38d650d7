// Copyright 2026 The elecvuln Authors
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

#ifndef ELECVULN_BUILDING_MAPPING_H_
#define ELECVULN_BUILDING_MAPPING_H_

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "elecvuln/activity_model.h"
#include "elecvuln/common.h"
#include "elecvuln/ingest.h"

namespace elecvuln {

// Residential: bedrooms * (1 - vacancy); business: floor area * worker
// density; capacity-typed buildings: capacity.
double allocation_weight(const Building& b);

// For each activity class, the building types that host it and their shares.
// An empty list means the class is tracked but not placed in any building.
class ActivityPlacementTable {
 public:
  struct Target {
    BuildingType type;
    double share;
    bool operator==(const Target&) const = default;
  };
  using Rows = std::array<std::vector<Target>, kNumClasses>;

  static constexpr double kTolerance = 1e-9;

  // Throws unless every non-empty row has shares in [0,1] summing to 1.
  static ActivityPlacementTable create(Rows rows);
  static ActivityPlacementTable defaults();

  const std::vector<Target>& targets(ActivityClass c) const { return rows_[index_of(c)]; }
  double share(ActivityClass c, BuildingType type) const;
  bool hosts(ActivityClass c, BuildingType type) const { return share(c, type) > 0.0; }

 private:
  explicit ActivityPlacementTable(Rows rows) : rows_(std::move(rows)) {}
  Rows rows_;
};

// How mass is split among capacity-typed buildings of one type before caps
// bind. kByCount gives each building an equal share; kByCapacity splits in
// proportion to allocation_weight. Residential and business buildings always
// split by allocation_weight.
enum class CappedSplit { kByCount, kByCapacity };

struct AllocationOptions {
  CappedSplit capped_split = CappedSplit::kByCount;
};

// Expected occupants per (step, building, class), plus the mass that could not
// be placed: "untracked" for classes without a placement target and
// "overflow" for mass exceeding the capacity of every candidate building.
class OccupancyField {
 public:
  OccupancyField(std::size_t steps, std::vector<std::string> building_ids, double population);

  std::size_t num_steps() const { return steps_; }
  std::size_t num_buildings() const { return building_ids_.size(); }
  const std::vector<std::string>& building_ids() const { return building_ids_; }
  double population() const { return population_; }

  double count(std::size_t t, std::size_t b, ActivityClass c) const {
    return counts_[(t * num_buildings() + b) * kNumClasses + index_of(c)];
  }
  double& count(std::size_t t, std::size_t b, ActivityClass c) {
    return counts_[(t * num_buildings() + b) * kNumClasses + index_of(c)];
  }
  double untracked(std::size_t t, ActivityClass c) const {
    return untracked_[t * kNumClasses + index_of(c)];
  }
  double& untracked(std::size_t t, ActivityClass c) {
    return untracked_[t * kNumClasses + index_of(c)];
  }
  double overflow(std::size_t t, ActivityClass c) const {
    return overflow_[t * kNumClasses + index_of(c)];
  }
  double& overflow(std::size_t t, ActivityClass c) {
    return overflow_[t * kNumClasses + index_of(c)];
  }

  double building_total(std::size_t t, std::size_t b) const;
  double placed_total(std::size_t t) const;
  double unplaced_total(std::size_t t) const;

  bool operator==(const OccupancyField&) const = default;

 private:
  std::size_t steps_;
  std::vector<std::string> building_ids_;
  double population_;
  std::vector<double> counts_;
  std::vector<double> untracked_;
  std::vector<double> overflow_;
};

// Distributes mass over candidates in proportion to weights without
// exceeding caps (use +infinity for uncapped). Capped candidates are fixed at
// their cap and the remainder is re-split among the rest until stable.
// Returns the allocation; *residual receives mass that fits nowhere.
std::vector<double> water_fill(std::span<const double> weights, std::span<const double> caps,
                               double mass, double* residual);

// Spreads population * traj[t][c] over buildings at every step. Education
// mass is split across school levels by the population-weighted zone
// school-level shares (levels without buildings are dropped and the rest
// renormalized; without any demographic signal all education buildings form
// one group). Throws Error(kFailedPrecondition) naming the class and type
// when a class carrying mass sends a positive share to a type with no
// building weight to receive it.
OccupancyField allocate(const TrajectoryMatrix& traj, double population,
                        std::span<const Building> buildings,
                        const ActivityPlacementTable& table,
                        std::span<const ZoneDemographics> demographics,
                        const AllocationOptions& options = {});

struct StepAssignment {
  std::optional<std::string> building_id;  // nullopt: no building within radius
  ActivityClass activity = ActivityClass::kOthers;
  bool operator==(const StepAssignment&) const = default;
};

struct PersonAssignment {
  std::string person_id;
  std::vector<StepAssignment> steps;  // kStepsPerDay entries
};

inline constexpr double kDefaultSnapRadius = 100.0;

// Matches each step midpoint to the latest fix at or before it (the first fix
// when none precedes it), snaps that position to the nearest centroid within
// radius (ties to the lexicographically smaller id) and picks the likeliest
// class the building type can host.
std::vector<PersonAssignment> join_gps(std::span<const TimeLocationPath> paths,
                                       const TrajectoryMatrix& traj,
                                       std::span<const Building> buildings,
                                       const ActivityPlacementTable& table,
                                       double radius = kDefaultSnapRadius);

// Largest-remainder rounding of nonnegative values to integers preserving the
// rounded total. Ties go to the lower index.
std::vector<long long> round_largest_remainder(std::span<const double> values);

// "t,building_id,class,expected_count" rows for every positive count.
void write_occupancy_csv(std::ostream& out, const OccupancyField& field);
// "t,class,untracked,overflow" rows for every step and class.
void write_unplaced_csv(std::ostream& out, const OccupancyField& field);
OccupancyField read_occupancy_csv(std::istream& occupancy, std::istream& unplaced,
                                  std::span<const Building> buildings, double population);

}  // namespace elecvuln

#endif  // ELECVULN_BUILDING_MAPPING_H_
