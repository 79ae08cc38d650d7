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

#include "elecvuln/vri.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace elecvuln {

ActivityVulnerabilityTable ActivityVulnerabilityTable::create(
    std::array<ActivityVulnerability, kNumClasses> rows) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& v = rows[c];
    if (v.criticality < 1 || v.criticality > 5 || v.relevance < 1 || v.relevance > 5) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("criticality/relevance for {} must be integers in 1..5",
                              class_label(class_at(c))));
    }
  }
  return ActivityVulnerabilityTable(rows);
}

ActivityVulnerabilityTable ActivityVulnerabilityTable::defaults() {
  return create({{
      {5, 5},  // c01 essential health
      {5, 2},  // c02 biological needs
      {3, 4},  // c03 working
      {3, 3},  // c04 education
      {2, 3},  // c05 household management
      {3, 3},  // c06 personal obligations
      {1, 5},  // c07 personal preference
      {2, 1},  // c08 others
  }});
}

double combine(const ActivityVulnerability& v, CombineMode mode) {
  if (mode == CombineMode::kArithmetic) return 0.5 * (v.criticality + v.relevance);
  return std::sqrt(static_cast<double>(v.criticality) * v.relevance);
}

VariableWeights default_variable_weights() {
  return {
      {"share_over_65", 0.30},        {"share_under_5", 0.10},
      {"share_below_poverty", 0.20},  {"share_disability", 0.20},
      {"share_no_vehicle", 0.10},     {"share_no_high_school", 0.10},
  };
}

std::vector<double> score_demographic(std::span<const ZoneDemographics> zones,
                                      const VariableWeights& weights) {
  for (const auto& [name, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("variable weight for {} must be nonnegative", name));
    }
  }
  std::vector<double> scores;
  scores.reserve(zones.size());
  for (const ZoneDemographics& z : zones) {
    double score = 0.0;
    for (const auto& [name, w] : weights) {
      auto it = z.shares.find(name);
      if (it == z.shares.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("zone '{}' is missing variable {}", z.zone_id, name));
      }
      score += w * it->second;
    }
    scores.push_back(score);
  }
  return scores;
}

std::vector<double> score_activity(const OccupancyField& field,
                                   const ActivityVulnerabilityTable& table, std::size_t t,
                                   CombineMode mode) {
  if (t >= field.num_steps()) {
    throw Error(ErrorCode::kNotFound, fmt::format("timestep {} out of range", t));
  }
  std::array<double, kNumClasses> combined{};
  for (ActivityClass c : kAllClasses) combined[index_of(c)] = combine(table.at(c), mode);
  std::vector<double> scores(field.num_buildings(), 0.0);
  for (std::size_t b = 0; b < field.num_buildings(); ++b) {
    for (ActivityClass c : kAllClasses) {
      scores[b] += field.count(t, b, c) * combined[index_of(c)];
    }
  }
  return scores;
}

EnvWeights default_env_weights() {
  return {
      {"year_built", 0.20}, {"floor_area_m2", 0.10},    {"construction", 0.20},
      {"glazing", 0.15},    {"energy_structure", 0.35},
  };
}

namespace {

constexpr int kOldStockYear = 1940;
constexpr int kModernStockYear = 2020;

double class_score(std::size_t ordinal) {
  // light/single/all_electric = 1, medium/double/mixed = 0.5, heavy/triple/non_electric = 0
  return 1.0 - 0.5 * static_cast<double>(ordinal);
}

}  // namespace

std::vector<std::array<std::optional<double>, 5>> env_attribute_scores(
    std::span<const Building> buildings) {
  double min_area = std::numeric_limits<double>::infinity();
  double max_area = -std::numeric_limits<double>::infinity();
  for (const Building& b : buildings) {
    if (b.environment.floor_area_m2) {
      min_area = std::min(min_area, *b.environment.floor_area_m2);
      max_area = std::max(max_area, *b.environment.floor_area_m2);
    }
  }
  std::vector<std::array<std::optional<double>, 5>> out;
  out.reserve(buildings.size());
  for (const Building& b : buildings) {
    const BuildingEnvironment& env = b.environment;
    std::array<std::optional<double>, 5> s;
    if (env.year_built) {
      s[0] = std::clamp(static_cast<double>(kModernStockYear - *env.year_built) /
                            (kModernStockYear - kOldStockYear),
                        0.0, 1.0);
    }
    if (env.floor_area_m2) {
      s[1] = max_area > min_area ? (*env.floor_area_m2 - min_area) / (max_area - min_area) : 0.0;
    }
    if (env.construction) s[2] = class_score(static_cast<std::size_t>(*env.construction));
    if (env.glazing) s[3] = class_score(static_cast<std::size_t>(*env.glazing));
    if (env.energy_structure) s[4] = class_score(static_cast<std::size_t>(*env.energy_structure));
    out.push_back(s);
  }
  return out;
}

std::vector<double> score_building_env(std::span<const Building> buildings,
                                       const EnvWeights& weights) {
  std::array<double, 5> w{};
  for (const auto& [name, value] : weights) {
    auto it = std::find(kEnvAttributes.begin(), kEnvAttributes.end(), name);
    if (it == kEnvAttributes.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("unknown environment attribute '{}'", name));
    }
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("environment weight for {} must be nonnegative", name));
    }
    w[static_cast<std::size_t>(it - kEnvAttributes.begin())] = value;
  }
  const auto attrs = env_attribute_scores(buildings);
  std::vector<double> scores;
  scores.reserve(buildings.size());
  for (const auto& s : attrs) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!s[k] || w[k] <= 0.0) continue;
      num += w[k] * *s[k];
      den += w[k];
    }
    scores.push_back(den > 0.0 ? num / den : 0.0);
  }
  return scores;
}

std::string_view aspect_name(Aspect a) {
  switch (a) {
    case Aspect::kDemographic:
      return "demographic";
    case Aspect::kActivity:
      return "activity";
    case Aspect::kBuildingEnv:
      return "building_env";
  }
  return "";
}

std::optional<Aspect> parse_aspect(std::string_view name) {
  for (Aspect a : {Aspect::kDemographic, Aspect::kActivity, Aspect::kBuildingEnv}) {
    if (aspect_name(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<std::uint8_t> quintile_ranks(std::span<const double> values) {
  std::vector<std::size_t> order;
  order.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!is_nodata(values[i])) order.push_back(i);
  }
  if (order.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot rank a layer with no data cells");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const std::size_t n = order.size();
  std::vector<std::uint8_t> ranks(values.size(), kNoRank);
  std::uint8_t bucket = 1;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    if (pos > 0 && values[i] == values[order[pos - 1]]) {
      ranks[i] = ranks[order[pos - 1]];
      continue;
    }
    // Smallest k with pos+1 <= ceil(k*n/5).
    while (bucket < 5 && pos + 1 > (bucket * n + 4) / 5) ++bucket;
    ranks[i] = bucket;
  }
  return ranks;
}

AspectLayer rank_quintiles(const RawLayer& raw, Aspect aspect, std::optional<int> timestep) {
  if (raw.values.size() != raw.grid.size()) {
    throw Error(ErrorCode::kInvalidArgument, "raw layer size does not match its grid");
  }
  if ((aspect == Aspect::kActivity) != timestep.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "activity layers carry a timestep; demographic and building layers do not");
  }
  return {raw.grid, quintile_ranks(raw.values), aspect, timestep};
}

std::vector<AspectLayer> rank_quintiles_pooled(std::span<const RawLayer> layers, Aspect aspect) {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "no layers to rank");
  const GridSpec& grid = layers.front().grid;
  std::vector<double> pooled;
  pooled.reserve(grid.size() * layers.size());
  for (const RawLayer& l : layers) {
    if (!(l.grid == grid) || l.values.size() != grid.size()) {
      throw Error(ErrorCode::kInvalidArgument, "pooled layers must share one grid");
    }
    pooled.insert(pooled.end(), l.values.begin(), l.values.end());
  }
  const auto ranks = quintile_ranks(pooled);
  std::vector<AspectLayer> out;
  out.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::optional<int> timestep;
    if (aspect == Aspect::kActivity) timestep = static_cast<int>(i);
    out.push_back({grid,
                   std::vector<std::uint8_t>(ranks.begin() + i * grid.size(),
                                             ranks.begin() + (i + 1) * grid.size()),
                   aspect, timestep});
  }
  return out;
}

VRIWeights VRIWeights::create(std::array<double, 3> q) {
  double sum = 0.0;
  for (double v : q) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "aspect weights must be nonnegative and finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("aspect weights sum to {} instead of 1", format_double(sum)));
  }
  return VRIWeights(q);
}

VRIWeights VRIWeights::from_raw(double demographic, double activity, double building_env) {
  const std::array<double, 3> raw = {demographic, activity, building_env};
  double sum = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "aspect weights must be nonnegative and finite");
    }
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(ErrorCode::kInvalidArgument, "aspect weights cannot all be zero");
  }
  return VRIWeights({raw[0] / sum, raw[1] / sum, raw[2] / sum});
}

VulnerabilityMap compose(std::span<const AspectLayer> layers, const VRIWeights& weights) {
  if (layers.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("compose needs exactly 3 aspect layers, got {}", layers.size()));
  }
  std::array<const AspectLayer*, 3> by_aspect{};
  for (const AspectLayer& l : layers) {
    auto& slot = by_aspect[static_cast<std::size_t>(l.aspect)];
    if (slot) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("compose got two {} layers", aspect_name(l.aspect)));
    }
    slot = &l;
  }
  const GridSpec& grid = by_aspect[0]->grid;
  for (const AspectLayer* l : by_aspect) {
    if (!(l->grid == grid)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("grid mismatch: {} layer has [{}], demographic layer has [{}]",
                              aspect_name(l->aspect), l->grid.describe(), grid.describe()));
    }
    if (l->ranks.size() != grid.size()) {
      throw Error(ErrorCode::kInvalidArgument, "layer size does not match its grid");
    }
  }

  VulnerabilityMap map{grid, std::vector<double>(grid.size(), kNoData),
                       by_aspect[1]->timestep, weights};
  const auto& q = weights.values();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::uint8_t pd = by_aspect[0]->ranks[i];
    const std::uint8_t pa = by_aspect[1]->ranks[i];
    const std::uint8_t pb = by_aspect[2]->ranks[i];
    if (pd == kNoRank || pa == kNoRank || pb == kNoRank) continue;
    map.values[i] = pd * q[0] + pa * q[1] + pb * q[2];
  }
  return map;
}

}  // namespace elecvuln
