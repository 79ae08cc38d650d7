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

#ifndef ELECVULN_VRI_H_
#define ELECVULN_VRI_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elecvuln/building_mapping.h"
#include "elecvuln/ingest.h"
#include "elecvuln/raster.h"

namespace elecvuln {

// ---------------------------------------------------------------------------
// Aspect scoring
// ---------------------------------------------------------------------------

struct ActivityVulnerability {
  int criticality = 1;  // 1..5
  int relevance = 1;    // 1..5
  bool operator==(const ActivityVulnerability&) const = default;
};

class ActivityVulnerabilityTable {
 public:
  static ActivityVulnerabilityTable create(std::array<ActivityVulnerability, kNumClasses> rows);
  // Expert-editable starting point; see README for the table.
  static ActivityVulnerabilityTable defaults();

  const ActivityVulnerability& at(ActivityClass c) const { return rows_[index_of(c)]; }

 private:
  explicit ActivityVulnerabilityTable(std::array<ActivityVulnerability, kNumClasses> rows)
      : rows_(rows) {}
  std::array<ActivityVulnerability, kNumClasses> rows_;
};

enum class CombineMode { kGeometric, kArithmetic };

// Geometric mean sqrt(c*r) (or (c+r)/2). Both already lie in [1,5].
double combine(const ActivityVulnerability& v, CombineMode mode = CombineMode::kGeometric);

using VariableWeights = std::map<std::string, double>;

// Age gets the largest single weight.
VariableWeights default_variable_weights();

// Per-zone sum of weight * share. Throws Error(kInvalidArgument) naming the
// first variable a zone lacks.
std::vector<double> score_demographic(std::span<const ZoneDemographics> zones,
                                      const VariableWeights& weights);

// Per-building sum over classes of expected occupants * combined score.
std::vector<double> score_activity(const OccupancyField& field,
                                   const ActivityVulnerabilityTable& table, std::size_t t,
                                   CombineMode mode = CombineMode::kGeometric);

// Environment attributes in a fixed order; keys of EnvWeights.
inline constexpr std::array<std::string_view, 5> kEnvAttributes = {
    "year_built", "floor_area_m2", "construction", "glazing", "energy_structure"};
using EnvWeights = std::map<std::string, double>;
EnvWeights default_env_weights();

// Normalized [0,1] attribute scores per building in kEnvAttributes order
// (nullopt where the attribute is missing). Higher means more exposed:
// older stock, larger floor area (min-max over the inventory), light
// construction, single glazing and all-electric supply.
std::vector<std::array<std::optional<double>, 5>> env_attribute_scores(
    std::span<const Building> buildings);

// Weighted mean of the present normalized attribute scores; 0 when none of
// the weighted attributes is present.
std::vector<double> score_building_env(std::span<const Building> buildings,
                                       const EnvWeights& weights);

// ---------------------------------------------------------------------------
// Ranking and composition
// ---------------------------------------------------------------------------

enum class Aspect { kDemographic, kActivity, kBuildingEnv };
std::string_view aspect_name(Aspect a);
std::optional<Aspect> parse_aspect(std::string_view name);

inline constexpr std::uint8_t kNoRank = 0;

// Quintile ranks 1..5 (kNoRank for NaN input). Values are sorted ascending
// and the value at 1-based sorted position i lands in the smallest bucket k
// with i <= ceil(k*n/5). Equal values share the bucket of the first of them.
// Throws when every value is NaN.
std::vector<std::uint8_t> quintile_ranks(std::span<const double> values);

struct AspectLayer {
  GridSpec grid;
  std::vector<std::uint8_t> ranks;  // row-major, kNoRank for nodata
  Aspect aspect = Aspect::kDemographic;
  std::optional<int> timestep;  // set only for activity layers

  std::uint8_t at(CellIndex cell) const { return ranks[grid.flat(cell)]; }
  bool operator==(const AspectLayer&) const = default;
};

AspectLayer rank_quintiles(const RawLayer& raw, Aspect aspect,
                           std::optional<int> timestep = std::nullopt);

// Ranks a stack of per-step layers against their pooled values so ranks are
// comparable across steps. Layer i gets timestep i.
std::vector<AspectLayer> rank_quintiles_pooled(std::span<const RawLayer> layers, Aspect aspect);

// Aspect weights (demographic, activity, building environment), nonnegative
// and summing to 1.
class VRIWeights {
 public:
  static constexpr double kTolerance = 1e-9;

  static VRIWeights create(std::array<double, 3> q);
  // Normalizes raw (e.g. slider) weights. Throws Error(kInvalidArgument) on a
  // negative or non-finite entry or an all-zero vector.
  static VRIWeights from_raw(double demographic, double activity, double building_env);
  static VRIWeights defaults() { return create({0.4, 0.35, 0.25}); }

  double demographic() const { return q_[0]; }
  double activity() const { return q_[1]; }
  double building_env() const { return q_[2]; }
  const std::array<double, 3>& values() const { return q_; }

  bool operator==(const VRIWeights&) const = default;

 private:
  explicit VRIWeights(std::array<double, 3> q) : q_(q) {}
  std::array<double, 3> q_;
};

struct VulnerabilityMap {
  GridSpec grid;
  std::vector<double> values;  // NaN for nodata
  std::optional<int> timestep;
  VRIWeights weights = VRIWeights::defaults();
};

// V = sum of rank * weight over the three aspects, per cell. Requires exactly
// one layer per aspect on one grid; nodata in any input gives nodata.
VulnerabilityMap compose(std::span<const AspectLayer> layers, const VRIWeights& weights);

}  // namespace elecvuln

#endif  // ELECVULN_VRI_H_
