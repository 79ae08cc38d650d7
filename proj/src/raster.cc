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

#include "elecvuln/raster.h"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/csv.h"

namespace elecvuln {

namespace bg = boost::geometry;
using json = nlohmann::json;

void GridSpec::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::kInvalidArgument, "grid cell_size must be positive");
  }
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one row and column");
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid origin must be finite");
  }
}

std::optional<CellIndex> GridSpec::cell_of(Point2 p) const {
  const double fc = std::floor((p.x - x0) / cell_size);
  const double fr = std::floor((p.y - y0) / cell_size);
  if (!(fc >= 0.0 && fr >= 0.0) || fc >= static_cast<double>(cols) ||
      fr >= static_cast<double>(rows)) {
    return std::nullopt;
  }
  return CellIndex{static_cast<std::size_t>(fr), static_cast<std::size_t>(fc)};
}

Point2 GridSpec::cell_center(CellIndex cell) const {
  return {x0 + (static_cast<double>(cell.col) + 0.5) * cell_size,
          y0 + (static_cast<double>(cell.row) + 0.5) * cell_size};
}

std::string GridSpec::describe() const {
  return fmt::format("origin=({}, {}) cell_size={} rows={} cols={}", format_double(x0),
                     format_double(y0), format_double(cell_size), rows, cols);
}

RasterizeResult rasterize(std::span<const PointValue> points, const GridSpec& grid,
                          Reducer reducer) {
  grid.validate();
  RasterizeResult result;
  result.layer.grid = grid;
  result.layer.values.assign(grid.size(), kNoData);
  std::vector<std::size_t> hits(grid.size(), 0);
  auto& values = result.layer.values;
  for (const PointValue& p : points) {
    auto cell = grid.cell_of(p.position);
    if (!cell) {
      ++result.out_of_bounds;
      continue;
    }
    const std::size_t i = grid.flat(*cell);
    if (hits[i]++ == 0) {
      values[i] = p.value;
    } else if (reducer == Reducer::kMax) {
      values[i] = std::max(values[i], p.value);
    } else {
      values[i] += p.value;
    }
  }
  if (reducer == Reducer::kMean) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (hits[i] > 1) values[i] /= static_cast<double>(hits[i]);
    }
  }
  return result;
}

RawLayer paint_zones(std::span<const ZoneGeometry> zones,
                     const std::map<std::string, double>& zone_scores, const GridSpec& grid) {
  using BgPoint = bg::model::d2::point_xy<double>;
  using BgPolygon = bg::model::polygon<BgPoint>;
  grid.validate();

  struct Painted {
    double score;
    std::vector<BgPolygon> polygons;
  };
  std::vector<Painted> painted;
  for (const ZoneGeometry& z : zones) {
    auto it = zone_scores.find(z.zone_id);
    if (it == zone_scores.end()) continue;
    Painted p{it->second, {}};
    for (const auto& rings : z.polygons) {
      BgPolygon poly;
      for (const Point2& q : rings[0]) bg::append(poly.outer(), BgPoint(q.x, q.y));
      for (std::size_t h = 1; h < rings.size(); ++h) {
        poly.inners().emplace_back();
        for (const Point2& q : rings[h]) bg::append(poly.inners().back(), BgPoint(q.x, q.y));
      }
      bg::correct(poly);
      p.polygons.push_back(std::move(poly));
    }
    painted.push_back(std::move(p));
  }

  RawLayer layer;
  layer.grid = grid;
  layer.values.assign(grid.size(), kNoData);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Point2 center = grid.cell_center({r, c});
      const BgPoint pt(center.x, center.y);
      for (const Painted& p : painted) {
        const bool inside = std::any_of(p.polygons.begin(), p.polygons.end(),
                                        [&](const BgPolygon& poly) { return bg::within(pt, poly); });
        if (inside) {
          layer.values[grid.flat({r, c})] = p.score;
          break;
        }
      }
    }
  }
  return layer;
}

void write_values_csv(std::ostream& out, const GridSpec& grid, std::span<const double> values) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::kInvalidArgument, "value count does not match the grid");
  }
  out << "row,col,value\n";
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double v = values[grid.flat({r, c})];
      out << r << ',' << c << ',';
      if (!is_nodata(v)) out << format_double(v);
      out << '\n';
    }
  }
}

std::vector<double> read_values_csv(std::istream& in, const GridSpec& grid) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields != std::vector<std::string>{"row", "col", "value"}) {
    throw Error(ErrorCode::kParse, "layer file: expected header row,col,value");
  }
  std::vector<double> values(grid.size(), kNoData);
  std::vector<bool> seen(grid.size(), false);
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    auto r = parse_int(f.size() == 3 ? f[0] : "");
    auto c = parse_int(f.size() == 3 ? f[1] : "");
    if (!r || !c || *r < 0 || *c < 0 || static_cast<std::size_t>(*r) >= grid.rows ||
        static_cast<std::size_t>(*c) >= grid.cols) {
      throw Error(ErrorCode::kParse, fmt::format("layer file line {}: bad cell", row->line));
    }
    const std::size_t i = grid.flat({static_cast<std::size_t>(*r), static_cast<std::size_t>(*c)});
    seen[i] = true;
    if (f[2].empty()) continue;
    auto v = parse_double(f[2]);
    if (!v) throw Error(ErrorCode::kParse, fmt::format("layer file line {}: bad value", row->line));
    values[i] = *v;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::kParse, "layer file does not cover every grid cell");
  }
  return values;
}

void write_cells_geojson(std::ostream& out, const GridSpec& grid,
                         std::span<const double> values, const std::string& property) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::kInvalidArgument, "value count does not match the grid");
  }
  json features = json::array();
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double v = values[grid.flat({r, c})];
      if (is_nodata(v)) continue;
      const double x = grid.x0 + static_cast<double>(c) * grid.cell_size;
      const double y = grid.y0 + static_cast<double>(r) * grid.cell_size;
      const double s = grid.cell_size;
      json ring = {{x, y}, {x + s, y}, {x + s, y + s}, {x, y + s}, {x, y}};
      features.push_back({{"type", "Feature"},
                          {"properties", {{"row", r}, {"col", c}, {property, v}}},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
  }
  out << json({{"type", "FeatureCollection"}, {"features", std::move(features)}}).dump()
      << '\n';
}

}  // namespace elecvuln
