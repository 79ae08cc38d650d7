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

#include <set>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/ingest.h"

namespace elecvuln {

namespace bg = boost::geometry;
using json = nlohmann::json;

namespace {

using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

constexpr std::array<std::string_view, kNumBuildingTypes> kTypeNames = {
    "residential", "business", "mercantile", "public_service", "assembly", "education"};
constexpr std::array<std::string_view, kNumSchoolLevels> kLevelNames = {
    "primary", "middle", "high", "college"};
constexpr std::array<std::string_view, 3> kConstructionNames = {"light", "medium", "heavy"};
constexpr std::array<std::string_view, 3> kGlazingNames = {"single", "double", "triple"};
constexpr std::array<std::string_view, 3> kEnergyNames = {"all_electric", "mixed",
                                                          "non_electric"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names,
                           std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

// Rejection raised while decoding a single feature.
struct Reject {
  std::string reason;
};

Ring read_ring(const json& coords) {
  Ring ring;
  for (const json& p : coords) {
    if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Reject{"malformed coordinate"};
    }
    ring.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (ring.size() < 4) throw Reject{"polygon ring has fewer than 4 positions"};
  return ring;
}

std::vector<std::vector<Ring>> read_polygons(const json& geometry) {
  const std::string type = geometry.value("type", "");
  const json& coords = geometry.at("coordinates");
  std::vector<std::vector<Ring>> polygons;
  auto read_polygon = [](const json& rings) {
    std::vector<Ring> out;
    for (const json& r : rings) out.push_back(read_ring(r));
    if (out.empty()) throw Reject{"polygon without rings"};
    return out;
  };
  if (type == "Polygon") {
    polygons.push_back(read_polygon(coords));
  } else if (type == "MultiPolygon") {
    for (const json& poly : coords) polygons.push_back(read_polygon(poly));
  } else {
    throw Reject{fmt::format("unsupported geometry type '{}'", type)};
  }
  return polygons;
}

BgMultiPolygon to_boost(const std::vector<std::vector<Ring>>& polygons) {
  BgMultiPolygon mp;
  for (const auto& rings : polygons) {
    BgPolygon poly;
    for (const Point2& p : rings[0]) bg::append(poly.outer(), BgPoint(p.x, p.y));
    for (std::size_t h = 1; h < rings.size(); ++h) {
      poly.inners().emplace_back();
      for (const Point2& p : rings[h]) bg::append(poly.inners().back(), BgPoint(p.x, p.y));
    }
    mp.push_back(std::move(poly));
  }
  bg::correct(mp);
  return mp;
}

Point2 read_centroid(const json& geometry) {
  if (!geometry.is_object()) throw Reject{"missing geometry"};
  const std::string type = geometry.value("type", "");
  if (type == "Point") {
    const json& c = geometry.at("coordinates");
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw Reject{"malformed coordinate"};
    }
    return {c[0].get<double>(), c[1].get<double>()};
  }
  BgMultiPolygon mp = to_boost(read_polygons(geometry));
  if (bg::area(mp) <= 0.0) throw Reject{"degenerate polygon"};
  BgPoint c(0.0, 0.0);
  bg::centroid(mp, c);
  return {c.x(), c.y()};
}

const json* find_property(const json& props, std::string_view key) {
  auto it = props.find(key);
  if (it == props.end() || it->is_null()) return nullptr;
  return &*it;
}

double require_number(const json& props, std::string_view key) {
  const json* v = find_property(props, key);
  if (!v) throw Reject{fmt::format("missing {}", key)};
  if (!v->is_number()) throw Reject{fmt::format("{} is not a number", key)};
  return v->get<double>();
}

std::optional<double> optional_number(const json& props, std::string_view key) {
  const json* v = find_property(props, key);
  if (!v) return std::nullopt;
  if (!v->is_number()) throw Reject{fmt::format("{} is not a number", key)};
  return v->get<double>();
}

template <typename Enum, std::size_t N>
std::optional<Enum> optional_enum(const json& props, std::string_view key,
                                  const std::array<std::string_view, N>& names) {
  const json* v = find_property(props, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw Reject{fmt::format("{} is not a string", key)};
  auto parsed = lookup<Enum>(names, v->get<std::string>());
  if (!parsed) {
    throw Reject{fmt::format("unknown {} '{}'", key, v->get<std::string>())};
  }
  return parsed;
}

double require_capacity(const json& props) {
  double capacity = require_number(props, "capacity");
  if (capacity < 0) throw Reject{"negative capacity"};
  return capacity;
}

Building decode_building(const json& feature) {
  if (!feature.is_object() || feature.value("type", "") != "Feature") {
    throw Reject{"not a GeoJSON Feature"};
  }
  const json& props = feature.contains("properties") ? feature["properties"] : json();
  if (!props.is_object()) throw Reject{"missing properties"};

  Building b;
  if (const json* id = find_property(props, "building_id"); id && id->is_string()) {
    b.id = id->get<std::string>();
  } else if (feature.contains("id") && feature["id"].is_string()) {
    b.id = feature["id"].get<std::string>();
  } else if (feature.contains("id") && feature["id"].is_number_integer()) {
    b.id = std::to_string(feature["id"].get<long long>());
  }
  if (b.id.empty()) throw Reject{"missing building_id"};

  const json* type = find_property(props, "type");
  if (!type || !type->is_string()) throw Reject{"missing type"};
  auto btype = parse_building_type(type->get<std::string>());
  if (!btype) throw Reject{fmt::format("unknown type code '{}'", type->get<std::string>())};
  b.type = *btype;

  if (const json* zone = find_property(props, "zone_id")) {
    if (!zone->is_string()) throw Reject{"zone_id is not a string"};
    b.zone_id = zone->get<std::string>();
  }

  switch (b.type) {
    case BuildingType::kResidential: {
      double bedrooms = require_number(props, "bedrooms");
      double vacancy = require_number(props, "vacancy_rate");
      if (bedrooms < 0 || bedrooms != static_cast<int>(bedrooms)) {
        throw Reject{"bedrooms must be a non-negative integer"};
      }
      if (vacancy < 0 || vacancy > 1) throw Reject{"vacancy_rate outside [0,1]"};
      b.allocation = ResidentialAttrs{static_cast<int>(bedrooms), vacancy};
      break;
    }
    case BuildingType::kBusiness: {
      double area = require_number(props, "gross_floor_area");
      double density = require_number(props, "worker_density");
      if (area < 0) throw Reject{"negative gross_floor_area"};
      if (area == 0) throw Reject{"gross_floor_area must be positive"};
      if (density <= 0) throw Reject{"worker_density must be positive"};
      b.allocation = BusinessAttrs{area, density};
      break;
    }
    case BuildingType::kMercantile:
    case BuildingType::kPublicService:
    case BuildingType::kAssembly:
      b.allocation = CapacityAttrs{require_capacity(props)};
      break;
    case BuildingType::kEducation: {
      double capacity = require_capacity(props);
      auto level = optional_enum<SchoolLevel>(props, "school_level", kLevelNames);
      if (!level) throw Reject{"missing school_level"};
      b.allocation = EducationAttrs{capacity, *level};
      break;
    }
  }

  BuildingEnvironment& env = b.environment;
  if (auto year = optional_number(props, "year_built")) {
    if (*year != static_cast<int>(*year)) throw Reject{"year_built must be an integer"};
    env.year_built = static_cast<int>(*year);
  }
  if (auto area = optional_number(props, "floor_area_m2")) {
    if (*area < 0) throw Reject{"negative floor_area_m2"};
    env.floor_area_m2 = *area;
  }
  env.construction = optional_enum<ConstructionClass>(props, "construction", kConstructionNames);
  env.glazing = optional_enum<GlazingClass>(props, "glazing", kGlazingNames);
  env.energy_structure =
      optional_enum<EnergyStructure>(props, "energy_structure", kEnergyNames);

  b.centroid = read_centroid(feature.contains("geometry") ? feature["geometry"] : json());
  return b;
}

json parse_feature_collection(std::istream& in, std::string_view what) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, fmt::format("{}: invalid JSON: {}", what, e.what()));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw Error(ErrorCode::kParse, fmt::format("{}: not a GeoJSON FeatureCollection", what));
  }
  return doc;
}

}  // namespace

std::string_view building_type_name(BuildingType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}
std::optional<BuildingType> parse_building_type(std::string_view name) {
  return lookup<BuildingType>(kTypeNames, name);
}
bool is_capacity_typed(BuildingType type) {
  return type != BuildingType::kResidential && type != BuildingType::kBusiness;
}
std::string_view school_level_name(SchoolLevel level) {
  return kLevelNames[static_cast<std::size_t>(level)];
}
std::optional<SchoolLevel> parse_school_level(std::string_view name) {
  return lookup<SchoolLevel>(kLevelNames, name);
}
std::string_view construction_name(ConstructionClass c) {
  return kConstructionNames[static_cast<std::size_t>(c)];
}
std::string_view glazing_name(GlazingClass g) {
  return kGlazingNames[static_cast<std::size_t>(g)];
}
std::string_view energy_structure_name(EnergyStructure e) {
  return kEnergyNames[static_cast<std::size_t>(e)];
}

std::optional<double> Building::capacity() const {
  if (const auto* c = std::get_if<CapacityAttrs>(&allocation)) return c->capacity;
  if (const auto* e = std::get_if<EducationAttrs>(&allocation)) return e->capacity;
  return std::nullopt;
}

std::optional<SchoolLevel> Building::school_level() const {
  if (const auto* e = std::get_if<EducationAttrs>(&allocation)) return e->level;
  return std::nullopt;
}

Parsed<Building> parse_buildings(std::istream& in) {
  json doc = parse_feature_collection(in, "building file");
  Parsed<Building> result;
  std::set<std::string> ids;
  std::size_t index = 0;
  for (const json& feature : doc["features"]) {
    ++index;
    ++result.report.rows_read;
    std::string subject;
    try {
      Building b = decode_building(feature);
      subject = b.id;
      if (!ids.insert(b.id).second) throw Reject{"duplicate building_id"};
      result.items.push_back(std::move(b));
    } catch (const Reject& r) {
      if (subject.empty() && feature.is_object() && feature.contains("properties") &&
          feature["properties"].is_object()) {
        subject = feature["properties"].value("building_id", "");
      }
      ++result.report.records_dropped;
      result.report.issues.push_back({index, subject, r.reason});
    } catch (const json::exception& e) {
      ++result.report.records_dropped;
      result.report.issues.push_back({index, subject, fmt::format("malformed feature: {}", e.what())});
    }
  }
  result.report.records_kept = result.items.size();
  return result;
}

void write_buildings(std::ostream& out, std::span<const Building> buildings) {
  json features = json::array();
  for (const Building& b : buildings) {
    json props;
    props["building_id"] = b.id;
    props["type"] = building_type_name(b.type);
    if (!b.zone_id.empty()) props["zone_id"] = b.zone_id;
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, ResidentialAttrs>) {
            props["bedrooms"] = a.bedrooms;
            props["vacancy_rate"] = a.vacancy_rate;
          } else if constexpr (std::is_same_v<T, BusinessAttrs>) {
            props["gross_floor_area"] = a.gross_floor_area;
            props["worker_density"] = a.worker_density;
          } else if constexpr (std::is_same_v<T, CapacityAttrs>) {
            props["capacity"] = a.capacity;
          } else {
            props["capacity"] = a.capacity;
            props["school_level"] = school_level_name(a.level);
          }
        },
        b.allocation);
    const BuildingEnvironment& env = b.environment;
    if (env.year_built) props["year_built"] = *env.year_built;
    if (env.floor_area_m2) props["floor_area_m2"] = *env.floor_area_m2;
    if (env.construction) props["construction"] = construction_name(*env.construction);
    if (env.glazing) props["glazing"] = glazing_name(*env.glazing);
    if (env.energy_structure) {
      props["energy_structure"] = energy_structure_name(*env.energy_structure);
    }
    features.push_back({{"type", "Feature"},
                        {"properties", std::move(props)},
                        {"geometry",
                         {{"type", "Point"},
                          {"coordinates", {b.centroid.x, b.centroid.y}}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  out << doc.dump(1) << '\n';
}

Parsed<ZoneGeometry> parse_zones(std::istream& in) {
  json doc = parse_feature_collection(in, "zone file");
  Parsed<ZoneGeometry> result;
  std::set<std::string> ids;
  std::size_t index = 0;
  for (const json& feature : doc["features"]) {
    ++index;
    ++result.report.rows_read;
    std::string subject;
    try {
      if (!feature.is_object() || !feature.contains("properties")) {
        throw Reject{"missing properties"};
      }
      subject = feature["properties"].value("zone_id", "");
      if (subject.empty()) throw Reject{"missing zone_id"};
      if (!ids.insert(subject).second) throw Reject{"duplicate zone_id"};
      if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
        throw Reject{"missing geometry"};
      }
      result.items.push_back({subject, read_polygons(feature["geometry"])});
    } catch (const Reject& r) {
      ++result.report.records_dropped;
      result.report.issues.push_back({index, subject, r.reason});
    } catch (const json::exception& e) {
      ++result.report.records_dropped;
      result.report.issues.push_back({index, subject, fmt::format("malformed feature: {}", e.what())});
    }
  }
  result.report.records_kept = result.items.size();
  return result;
}

}  // namespace elecvuln
