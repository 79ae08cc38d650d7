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

#ifndef ELECVULN_INGEST_H_
#define ELECVULN_INGEST_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "elecvuln/common.h"

namespace elecvuln {

// ---------------------------------------------------------------------------
// Parse reports
// ---------------------------------------------------------------------------

struct ParseIssue {
  std::size_t line = 0;  // 0 when the issue is not tied to one input line
  std::string subject;   // person, building or zone id
  std::string reason;
};

struct ParseReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t records_kept = 0;
  std::size_t records_dropped = 0;
  std::vector<ParseIssue> issues;
};

template <typename T>
struct Parsed {
  std::vector<T> items;
  ParseReport report;
};

// ---------------------------------------------------------------------------
// Activity diaries
// ---------------------------------------------------------------------------

// First-match-wins prefix table collapsing raw diary codes onto the eight
// canonical classes. The last rule must have an empty prefix (catch-all).
class ActivityCodeMap {
 public:
  struct Rule {
    std::string prefix;
    ActivityClass activity;
    bool operator==(const Rule&) const = default;
  };

  static ActivityCodeMap create(std::vector<Rule> rules);
  // ATUS-style six digit lexicon codes (tier 1/2 prefixes).
  static ActivityCodeMap atus_default();
  // Maps the literal labels "c01".."c08" onto themselves.
  static ActivityCodeMap canonical();

  ActivityClass resolve(std::string_view code) const;
  const std::vector<Rule>& rules() const { return rules_; }

 private:
  explicit ActivityCodeMap(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  std::vector<Rule> rules_;
};

// Code carried by entries synthesized to fill uncovered minutes. Always
// resolves to c08, independent of the code map.
inline constexpr std::string_view kGapCode = "__gap__";

struct DiaryEntry {
  int start_min = 0;
  int duration_min = 0;
  std::string code;
  ActivityClass activity = ActivityClass::kOthers;

  int end_min() const { return start_min + duration_min; }
  bool operator==(const DiaryEntry&) const = default;
};

// One respondent's day. After parsing, entries are sorted, non-overlapping and
// tile [0, 1440) exactly (gaps are filled with c08 entries).
struct DiaryRecord {
  std::string person_id;
  double sample_weight = 1.0;
  std::vector<DiaryEntry> entries;
  std::map<std::string, std::string> attributes;

  bool operator==(const DiaryRecord&) const = default;
};

// Diary CSV: header "person_id,weight,start_min,duration_min,code" followed by
// any number of "attr:<key>" columns. One entry per row; rows of one person
// need not be contiguous. Throws Error(kParse) on a malformed header.
Parsed<DiaryRecord> parse_diaries(std::istream& in, const ActivityCodeMap& code_map);
void write_diaries(std::ostream& out, std::span<const DiaryRecord> records);

// ---------------------------------------------------------------------------
// Buildings
// ---------------------------------------------------------------------------

enum class BuildingType {
  kResidential,
  kBusiness,
  kMercantile,
  kPublicService,
  kAssembly,
  kEducation,
};
inline constexpr std::size_t kNumBuildingTypes = 6;
inline constexpr std::array<BuildingType, kNumBuildingTypes> kAllBuildingTypes = {
    BuildingType::kResidential, BuildingType::kBusiness,
    BuildingType::kMercantile,  BuildingType::kPublicService,
    BuildingType::kAssembly,    BuildingType::kEducation};

std::string_view building_type_name(BuildingType type);
std::optional<BuildingType> parse_building_type(std::string_view name);
// Mercantile, public service, assembly and education buildings hold at most
// their capacity.
bool is_capacity_typed(BuildingType type);

enum class SchoolLevel { kPrimary, kMiddle, kHigh, kCollege };
inline constexpr std::size_t kNumSchoolLevels = 4;
std::string_view school_level_name(SchoolLevel level);
std::optional<SchoolLevel> parse_school_level(std::string_view name);

enum class ConstructionClass { kLight, kMedium, kHeavy };
enum class GlazingClass { kSingle, kDouble, kTriple };
enum class EnergyStructure { kAllElectric, kMixed, kNonElectric };

std::string_view construction_name(ConstructionClass c);
std::string_view glazing_name(GlazingClass g);
std::string_view energy_structure_name(EnergyStructure e);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct ResidentialAttrs {
  int bedrooms = 0;
  double vacancy_rate = 0.0;
  bool operator==(const ResidentialAttrs&) const = default;
};
struct BusinessAttrs {
  double gross_floor_area = 0.0;  // m2
  double worker_density = 0.0;    // persons per m2
  bool operator==(const BusinessAttrs&) const = default;
};
struct CapacityAttrs {
  double capacity = 0.0;
  bool operator==(const CapacityAttrs&) const = default;
};
struct EducationAttrs {
  double capacity = 0.0;
  SchoolLevel level = SchoolLevel::kPrimary;
  bool operator==(const EducationAttrs&) const = default;
};
using AllocationAttrs =
    std::variant<ResidentialAttrs, BusinessAttrs, CapacityAttrs, EducationAttrs>;

// Environment attributes are optional; scoring uses whichever are present.
struct BuildingEnvironment {
  std::optional<int> year_built;
  std::optional<double> floor_area_m2;
  std::optional<ConstructionClass> construction;
  std::optional<GlazingClass> glazing;
  std::optional<EnergyStructure> energy_structure;
  bool operator==(const BuildingEnvironment&) const = default;
};

struct Building {
  std::string id;
  BuildingType type = BuildingType::kResidential;
  Point2 centroid;
  std::string zone_id;
  AllocationAttrs allocation;
  BuildingEnvironment environment;

  // Capacity of a capacity-typed building, nullopt otherwise.
  std::optional<double> capacity() const;
  std::optional<SchoolLevel> school_level() const;

  bool operator==(const Building&) const = default;
};

// GeoJSON FeatureCollection. Point geometries are taken as centroids; Polygon
// and MultiPolygon geometries are reduced to their area centroid. Throws
// Error(kParse) when the document is not a FeatureCollection.
Parsed<Building> parse_buildings(std::istream& in);
void write_buildings(std::ostream& out, std::span<const Building> buildings);

// ---------------------------------------------------------------------------
// Zone demographics and geometry
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, kNumSchoolLevels> kSchoolShareColumns = {
    "share_school_primary", "share_school_middle", "share_school_high",
    "share_school_college"};

struct ZoneDemographics {
  std::string zone_id;
  long long population = 0;
  std::map<std::string, double> shares;  // keyed by full column name

  // Share of the zone population enrolled at each school level (0 if absent).
  std::array<double, kNumSchoolLevels> school_shares() const;

  bool operator==(const ZoneDemographics&) const = default;
};

// CSV "zone_id,population,share_*". Zones with out-of-range shares are
// rejected and reported.
Parsed<ZoneDemographics> parse_demographics(std::istream& in);
void write_demographics(std::ostream& out, std::span<const ZoneDemographics> zones);

using Ring = std::vector<Point2>;
struct ZoneGeometry {
  std::string zone_id;
  // Each polygon is an outer ring followed by optional holes.
  std::vector<std::vector<Ring>> polygons;
};

// GeoJSON FeatureCollection of Polygon/MultiPolygon features carrying
// properties.zone_id.
Parsed<ZoneGeometry> parse_zones(std::istream& in);

// ---------------------------------------------------------------------------
// GPS traces
// ---------------------------------------------------------------------------

struct GpsFix {
  double t_min = 0.0;
  Point2 position;
  bool operator==(const GpsFix&) const = default;
};

struct TimeLocationPath {
  std::string person_id;
  std::vector<GpsFix> points;
  bool operator==(const TimeLocationPath&) const = default;
};

// CSV "person_id,t_min,x,y". Fixes sharing a timestamp collapse to the last
// one in file order; a path whose timestamps then go backwards is dropped.
Parsed<TimeLocationPath> parse_gps(std::istream& in);
void write_gps(std::ostream& out, std::span<const TimeLocationPath> paths);

}  // namespace elecvuln

#endif  // ELECVULN_INGEST_H_
