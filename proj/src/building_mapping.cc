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

#include "elecvuln/building_mapping.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "elecvuln/csv.h"

namespace elecvuln {

double allocation_weight(const Building& b) {
  return std::visit(
      [](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ResidentialAttrs>) {
          return a.bedrooms * (1.0 - a.vacancy_rate);
        } else if constexpr (std::is_same_v<T, BusinessAttrs>) {
          return a.gross_floor_area * a.worker_density;
        } else {
          return a.capacity;
        }
      },
      b.allocation);
}

ActivityPlacementTable ActivityPlacementTable::create(Rows rows) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& targets = rows[c];
    if (targets.empty()) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const Target& t = targets[i];
      if (!(t.share >= 0.0 && t.share <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("placement share for {} -> {} outside [0,1]",
                                class_label(class_at(c)), building_type_name(t.type)));
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (targets[j].type == t.type) {
          throw Error(ErrorCode::kInvalidArgument,
                      fmt::format("placement for {} lists {} twice", class_label(class_at(c)),
                                  building_type_name(t.type)));
        }
      }
      sum += t.share;
    }
    if (std::abs(sum - 1.0) > kTolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("placement shares for {} sum to {}", class_label(class_at(c)),
                              format_double(sum)));
    }
  }
  return ActivityPlacementTable(std::move(rows));
}

ActivityPlacementTable ActivityPlacementTable::defaults() {
  using BT = BuildingType;
  Rows rows;
  rows[index_of(ActivityClass::kEssentialHealth)] = {{BT::kPublicService, 1.0}};
  rows[index_of(ActivityClass::kBiologicalNeeds)] = {{BT::kResidential, 1.0}};
  rows[index_of(ActivityClass::kWorking)] = {{BT::kBusiness, 1.0}};
  rows[index_of(ActivityClass::kEducation)] = {{BT::kEducation, 1.0}};
  rows[index_of(ActivityClass::kHouseholdManagement)] = {{BT::kResidential, 1.0}};
  rows[index_of(ActivityClass::kPersonalObligations)] = {{BT::kMercantile, 0.6},
                                                         {BT::kPublicService, 0.4}};
  rows[index_of(ActivityClass::kPersonalPreference)] = {{BT::kAssembly, 0.5},
                                                        {BT::kResidential, 0.5}};
  // c08 (travel) stays unplaced.
  return create(std::move(rows));
}

double ActivityPlacementTable::share(ActivityClass c, BuildingType type) const {
  for (const Target& t : rows_[index_of(c)]) {
    if (t.type == type) return t.share;
  }
  return 0.0;
}

OccupancyField::OccupancyField(std::size_t steps, std::vector<std::string> building_ids,
                               double population)
    : steps_(steps),
      building_ids_(std::move(building_ids)),
      population_(population),
      counts_(steps * building_ids_.size() * kNumClasses, 0.0),
      untracked_(steps * kNumClasses, 0.0),
      overflow_(steps * kNumClasses, 0.0) {}

double OccupancyField::building_total(std::size_t t, std::size_t b) const {
  double sum = 0.0;
  for (ActivityClass c : kAllClasses) sum += count(t, b, c);
  return sum;
}

double OccupancyField::placed_total(std::size_t t) const {
  double sum = 0.0;
  for (std::size_t b = 0; b < num_buildings(); ++b) sum += building_total(t, b);
  return sum;
}

double OccupancyField::unplaced_total(std::size_t t) const {
  double sum = 0.0;
  for (ActivityClass c : kAllClasses) sum += untracked(t, c) + overflow(t, c);
  return sum;
}

std::vector<double> water_fill(std::span<const double> weights, std::span<const double> caps,
                               double mass, double* residual) {
  if (weights.size() != caps.size()) {
    throw Error(ErrorCode::kInvalidArgument, "water_fill: weights and caps differ in size");
  }
  const std::size_t n = weights.size();
  std::vector<double> alloc(n, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] > 0.0) active.push_back(i);
  }
  double remaining = mass;
  while (remaining > 0.0 && !active.empty()) {
    double total_weight = 0.0;
    for (std::size_t i : active) total_weight += weights[i];
    std::vector<std::size_t> uncapped;
    double capped_mass = 0.0;
    for (std::size_t i : active) {
      if (remaining * weights[i] / total_weight > caps[i]) {
        alloc[i] = caps[i];
        capped_mass += caps[i];
      } else {
        uncapped.push_back(i);
      }
    }
    if (uncapped.size() == active.size()) {
      for (std::size_t i : active) alloc[i] = remaining * weights[i] / total_weight;
      remaining = 0.0;
      break;
    }
    remaining -= capped_mass;
    active = std::move(uncapped);
  }
  if (residual) *residual = std::max(0.0, remaining);
  return alloc;
}

namespace {

// Buildings sharing one water-filling pool at every step.
struct Group {
  BuildingType type;
  double fraction = 1.0;  // of the type's incoming mass
  std::vector<std::size_t> members;
  std::vector<double> split_weights;
  std::vector<double> caps;
};

std::vector<Group> build_groups(std::span<const Building> buildings,
                                std::span<const ZoneDemographics> demographics,
                                const AllocationOptions& options) {
  std::vector<Group> groups;
  auto add_member = [&](Group& g, std::size_t i) {
    const Building& b = buildings[i];
    g.members.push_back(i);
    const bool capped = is_capacity_typed(b.type);
    const double w = allocation_weight(b);
    g.split_weights.push_back(capped && options.capped_split == CappedSplit::kByCount ? 1.0 : w);
    g.caps.push_back(capped ? *b.capacity() : std::numeric_limits<double>::infinity());
  };

  for (BuildingType type : kAllBuildingTypes) {
    if (type == BuildingType::kEducation) continue;
    Group g{type, 1.0, {}, {}, {}};
    for (std::size_t i = 0; i < buildings.size(); ++i) {
      if (buildings[i].type == type) add_member(g, i);
    }
    if (!g.members.empty()) groups.push_back(std::move(g));
  }

  // Education: one pool per school level, sized by community enrolment.
  std::array<double, kNumSchoolLevels> level_share{};
  double population = 0.0;
  for (const ZoneDemographics& z : demographics) {
    const auto shares = z.school_shares();
    for (std::size_t l = 0; l < kNumSchoolLevels; ++l) {
      level_share[l] += static_cast<double>(z.population) * shares[l];
    }
    population += static_cast<double>(z.population);
  }
  std::array<Group, kNumSchoolLevels> levels;
  std::array<double, kNumSchoolLevels> level_weight{};
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    if (buildings[i].type != BuildingType::kEducation) continue;
    const auto l = static_cast<std::size_t>(*buildings[i].school_level());
    levels[l].type = BuildingType::kEducation;
    add_member(levels[l], i);
    level_weight[l] += allocation_weight(buildings[i]);
  }
  double signal = 0.0;
  for (std::size_t l = 0; l < kNumSchoolLevels; ++l) {
    if (level_weight[l] > 0.0 && population > 0.0) signal += level_share[l];
  }
  if (signal > 0.0) {
    for (std::size_t l = 0; l < kNumSchoolLevels; ++l) {
      if (level_weight[l] <= 0.0 || level_share[l] <= 0.0) continue;
      levels[l].fraction = level_share[l] / signal;
      groups.push_back(std::move(levels[l]));
    }
  } else {
    Group all{BuildingType::kEducation, 1.0, {}, {}, {}};
    for (std::size_t i = 0; i < buildings.size(); ++i) {
      if (buildings[i].type == BuildingType::kEducation) add_member(all, i);
    }
    if (!all.members.empty()) groups.push_back(std::move(all));
  }
  return groups;
}

}  // namespace

OccupancyField allocate(const TrajectoryMatrix& traj, double population,
                        std::span<const Building> buildings,
                        const ActivityPlacementTable& table,
                        std::span<const ZoneDemographics> demographics,
                        const AllocationOptions& options) {
  if (traj.num_states() != kNumClasses) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory must have 8 activity classes");
  }
  if (!(population >= 0.0) || !std::isfinite(population)) {
    throw Error(ErrorCode::kInvalidArgument, "population must be nonnegative");
  }

  std::array<double, kNumBuildingTypes> type_weight{};
  for (const Building& b : buildings) {
    type_weight[static_cast<std::size_t>(b.type)] += allocation_weight(b);
  }
  for (ActivityClass c : kAllClasses) {
    bool has_mass = false;
    for (std::size_t t = 0; t < traj.num_steps() && !has_mass; ++t) {
      has_mass = traj(t, index_of(c)) > 0.0;
    }
    if (!has_mass || population <= 0.0) continue;
    for (const auto& target : table.targets(c)) {
      if (target.share > 0.0 && type_weight[static_cast<std::size_t>(target.type)] <= 0.0) {
        throw Error(ErrorCode::kFailedPrecondition,
                    fmt::format("class {} sends share {} to {} but those buildings have zero "
                                "total allocation weight",
                                class_label(c), format_double(target.share),
                                building_type_name(target.type)));
      }
    }
  }

  std::vector<std::string> ids;
  ids.reserve(buildings.size());
  for (const Building& b : buildings) ids.push_back(b.id);
  OccupancyField field(traj.num_steps(), std::move(ids), population);
  const std::vector<Group> groups = build_groups(buildings, demographics, options);

  for (std::size_t t = 0; t < traj.num_steps(); ++t) {
    for (ActivityClass c : kAllClasses) {
      if (table.targets(c).empty()) field.untracked(t, c) = population * traj(t, index_of(c));
    }
    for (const Group& g : groups) {
      std::array<double, kNumClasses> class_mass{};
      double mass = 0.0;
      for (ActivityClass c : kAllClasses) {
        class_mass[index_of(c)] =
            population * traj(t, index_of(c)) * table.share(c, g.type) * g.fraction;
        mass += class_mass[index_of(c)];
      }
      if (mass <= 0.0) continue;
      double residual = 0.0;
      const auto alloc = water_fill(g.split_weights, g.caps, mass, &residual);
      for (std::size_t m = 0; m < g.members.size(); ++m) {
        if (alloc[m] <= 0.0) continue;
        for (ActivityClass c : kAllClasses) {
          field.count(t, g.members[m], c) += alloc[m] * (class_mass[index_of(c)] / mass);
        }
      }
      if (residual > 0.0) {
        for (ActivityClass c : kAllClasses) {
          field.overflow(t, c) += residual * (class_mass[index_of(c)] / mass);
        }
      }
    }
  }
  return field;
}

std::vector<PersonAssignment> join_gps(std::span<const TimeLocationPath> paths,
                                       const TrajectoryMatrix& traj,
                                       std::span<const Building> buildings,
                                       const ActivityPlacementTable& table, double radius) {
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "join_gps: no paths");
  if (buildings.empty()) throw Error(ErrorCode::kInvalidArgument, "join_gps: no buildings");
  if (traj.num_steps() != static_cast<std::size_t>(kStepsPerDay) ||
      traj.num_states() != kNumClasses) {
    throw Error(ErrorCode::kInvalidArgument, "join_gps: trajectory must be 96 x 8");
  }
  const double radius2 = radius * radius;

  auto row_argmax = [&](std::size_t t, auto&& eligible) -> std::optional<ActivityClass> {
    std::optional<ActivityClass> best;
    for (ActivityClass c : kAllClasses) {
      if (!eligible(c)) continue;
      if (!best || traj(t, index_of(c)) > traj(t, index_of(*best))) best = c;
    }
    return best;
  };

  std::vector<PersonAssignment> out;
  out.reserve(paths.size());
  for (const TimeLocationPath& path : paths) {
    if (path.points.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("join_gps: path '{}' has no fixes", path.person_id));
    }
    PersonAssignment person{path.person_id, {}};
    person.steps.reserve(kStepsPerDay);
    for (std::size_t t = 0; t < static_cast<std::size_t>(kStepsPerDay); ++t) {
      const double midpoint = kStepMinutes * (static_cast<double>(t) + 0.5);
      auto after = std::upper_bound(path.points.begin(), path.points.end(), midpoint,
                                    [](double m, const GpsFix& f) { return m < f.t_min; });
      const Point2 pos = (after == path.points.begin() ? path.points.front() : *(after - 1))
                             .position;

      const Building* nearest = nullptr;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (const Building& b : buildings) {
        const double dx = b.centroid.x - pos.x;
        const double dy = b.centroid.y - pos.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2 || (d2 == best_d2 && nearest && b.id < nearest->id)) {
          best_d2 = d2;
          nearest = &b;
        }
      }

      StepAssignment step;
      const auto fallback = *row_argmax(t, [](ActivityClass) { return true; });
      if (nearest && best_d2 <= radius2) {
        step.building_id = nearest->id;
        const BuildingType type = nearest->type;
        step.activity = row_argmax(t, [&](ActivityClass c) { return table.hosts(c, type); })
                            .value_or(fallback);
      } else {
        step.activity = fallback;
      }
      person.steps.push_back(std::move(step));
    }
    out.push_back(std::move(person));
  }
  return out;
}

std::vector<long long> round_largest_remainder(std::span<const double> values) {
  std::vector<long long> out(values.size());
  double total = 0.0;
  long long floored = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "round_largest_remainder needs nonnegative values");
    }
    total += values[i];
    out[i] = static_cast<long long>(std::floor(values[i]));
    floored += out[i];
    remainders.emplace_back(values[i] - std::floor(values[i]), i);
  }
  long long missing = std::llround(total) - floored;
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; k < remainders.size() && missing > 0; ++k, --missing) {
    ++out[remainders[k].second];
  }
  return out;
}

void write_occupancy_csv(std::ostream& out, const OccupancyField& field) {
  out << "t,building_id,class,expected_count\n";
  for (std::size_t t = 0; t < field.num_steps(); ++t) {
    for (std::size_t b = 0; b < field.num_buildings(); ++b) {
      for (ActivityClass c : kAllClasses) {
        const double v = field.count(t, b, c);
        if (v <= 0.0) continue;
        out << t << ',' << csv::escape(field.building_ids()[b]) << ',' << class_label(c) << ','
            << format_double(v) << '\n';
      }
    }
  }
}

void write_unplaced_csv(std::ostream& out, const OccupancyField& field) {
  out << "t,class,untracked,overflow\n";
  for (std::size_t t = 0; t < field.num_steps(); ++t) {
    for (ActivityClass c : kAllClasses) {
      out << t << ',' << class_label(c) << ',' << format_double(field.untracked(t, c)) << ','
          << format_double(field.overflow(t, c)) << '\n';
    }
  }
}

OccupancyField read_occupancy_csv(std::istream& occupancy, std::istream& unplaced,
                                  std::span<const Building> buildings, double population) {
  auto fail = [](std::size_t line, const std::string& what) -> Error {
    return Error(ErrorCode::kParse, fmt::format("occupancy line {}: {}", line, what));
  };

  csv::Reader up(unplaced);
  auto header = up.next();
  if (!header || header->fields != std::vector<std::string>{"t", "class", "untracked", "overflow"}) {
    throw Error(ErrorCode::kParse, "unplaced file: malformed header");
  }
  struct UnplacedRow {
    std::size_t t;
    ActivityClass c;
    double untracked, overflow;
  };
  std::vector<UnplacedRow> rows;
  std::size_t steps = 0;
  while (auto row = up.next()) {
    const auto& f = row->fields;
    if (f.size() != 4) throw fail(row->line, "expected 4 fields");
    auto t = parse_int(f[0]);
    auto c = parse_class_label(f[1]);
    auto u = parse_double(f[2]);
    auto o = parse_double(f[3]);
    if (!t || *t < 0 || !c || !u || !o) throw fail(row->line, "bad unplaced row");
    rows.push_back({static_cast<std::size_t>(*t), *c, *u, *o});
    steps = std::max(steps, static_cast<std::size_t>(*t) + 1);
  }

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    ids.push_back(buildings[i].id);
    index.emplace(buildings[i].id, i);
  }
  OccupancyField field(steps, std::move(ids), population);
  for (const UnplacedRow& r : rows) {
    field.untracked(r.t, r.c) = r.untracked;
    field.overflow(r.t, r.c) = r.overflow;
  }

  csv::Reader reader(occupancy);
  header = reader.next();
  if (!header ||
      header->fields != std::vector<std::string>{"t", "building_id", "class", "expected_count"}) {
    throw Error(ErrorCode::kParse, "occupancy file: malformed header");
  }
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() != 4) throw fail(row->line, "expected 4 fields");
    auto t = parse_int(f[0]);
    auto it = index.find(f[1]);
    auto c = parse_class_label(f[2]);
    auto v = parse_double(f[3]);
    if (!t || *t < 0 || static_cast<std::size_t>(*t) >= steps) throw fail(row->line, "bad step");
    if (it == index.end()) throw fail(row->line, fmt::format("unknown building '{}'", f[1]));
    if (!c || !v || *v < 0) throw fail(row->line, "bad class or count");
    field.count(static_cast<std::size_t>(*t), it->second, *c) = *v;
  }
  return field;
}

}  // namespace elecvuln
