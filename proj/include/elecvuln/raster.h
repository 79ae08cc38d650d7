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

#ifndef ELECVULN_RASTER_H_
#define ELECVULN_RASTER_H_

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "elecvuln/ingest.h"

namespace elecvuln {

inline constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();
inline bool is_nodata(double v) { return std::isnan(v); }

struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const CellIndex&) const = default;
};

// Row r, column c covers [x0 + c*s, x0 + (c+1)*s) x [y0 + r*s, y0 + (r+1)*s).
// Row 0 is the southern edge.
struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double cell_size = 100.0;
  std::size_t rows = 1;
  std::size_t cols = 1;

  // Throws Error(kInvalidArgument) on a non-positive size or empty grid.
  void validate() const;
  std::size_t size() const { return rows * cols; }
  std::size_t flat(CellIndex cell) const { return cell.row * cols + cell.col; }
  std::optional<CellIndex> cell_of(Point2 p) const;
  Point2 cell_center(CellIndex cell) const;
  std::string describe() const;

  bool operator==(const GridSpec&) const = default;
};

struct LayerProvenance {
  std::string aspect;
  std::optional<int> timestep;  // nullopt: static layer
  std::vector<std::string> input_hashes;
  bool operator==(const LayerProvenance&) const = default;
};

// Real-valued raster, row-major, NaN for nodata.
struct RawLayer {
  GridSpec grid;
  std::vector<double> values;
  LayerProvenance provenance;

  double at(CellIndex cell) const { return values[grid.flat(cell)]; }
};

enum class Reducer { kSum, kMean, kMax };

struct PointValue {
  Point2 position;
  double value = 0.0;
};

struct RasterizeResult {
  RawLayer layer;
  std::size_t out_of_bounds = 0;
};

// Bins each point into its containing cell and reduces per cell. Cells with no
// points are nodata; points outside the grid are counted, not fatal.
RasterizeResult rasterize(std::span<const PointValue> points, const GridSpec& grid,
                          Reducer reducer);

// Paints each zone's score onto every cell whose center lies inside the zone
// polygon. The first zone in list order wins where zones overlap. Zones
// without a score are skipped; unpainted cells are nodata.
RawLayer paint_zones(std::span<const ZoneGeometry> zones,
                     const std::map<std::string, double>& zone_scores, const GridSpec& grid);

// "row,col,value" for every cell in row-major order; nodata as an empty value.
void write_values_csv(std::ostream& out, const GridSpec& grid, std::span<const double> values);
std::vector<double> read_values_csv(std::istream& in, const GridSpec& grid);

// One Polygon feature per data cell carrying row, col and the named value.
void write_cells_geojson(std::ostream& out, const GridSpec& grid,
                         std::span<const double> values, const std::string& property);

}  // namespace elecvuln

#endif  // ELECVULN_RASTER_H_
