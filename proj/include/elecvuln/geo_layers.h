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

#ifndef ELECVULN_GEO_LAYERS_H_
#define ELECVULN_GEO_LAYERS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elecvuln/raster.h"
#include "elecvuln/vri.h"

namespace elecvuln {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Rgba&) const = default;
};

// Five stops for values 1..5, light to dark.
struct ColorRamp {
  std::string_view id;
  std::array<Rgba, 5> stops;
};

inline constexpr Rgba kNoDataColor = {0, 0, 0, 0};
inline constexpr std::string_view kDefaultRamp = "reds";
inline constexpr int kDefaultCellPixels = 8;

std::span<const ColorRamp> color_ramps();
// Throws Error(kInvalidArgument) listing the available ramp ids.
const ColorRamp& find_ramp(std::string_view id);

// Rec. 709 luma of the 8-bit channels.
double luminance(Rgba c);
// Piecewise-linear interpolation between stops; value is clamped to [1,5].
Rgba ramp_color(const ColorRamp& ramp, double value);

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgba;  // row-major, top row first

  Rgba pixel(std::size_t x, std::size_t y) const;
  bool operator==(const Image&) const = default;
};

// One cell_px x cell_px block per cell, north up (grid row 0 is the bottom
// image row). Nodata cells are transparent.
Image render(const AspectLayer& layer, std::string_view ramp_id,
             int cell_px = kDefaultCellPixels);
Image render(const VulnerabilityMap& map, std::string_view ramp_id,
             int cell_px = kDefaultCellPixels);
Image render_values(const GridSpec& grid, std::span<const double> values,
                    std::string_view ramp_id, int cell_px = kDefaultCellPixels);

std::string encode_png(const Image& image);
// JSON legend sidecar describing the stops of a ramp.
std::string legend_json(const ColorRamp& ramp);

struct SweepFrame {
  int timestep = 0;
  VulnerabilityMap map;
  std::optional<Image> image;
};

struct SweepOptions {
  std::optional<std::string> ramp;  // render images when set
  int cell_px = kDefaultCellPixels;
};

// Composes one map per requested step. The static demographic and building
// layers are reused for every frame. Throws Error(kNotFound) naming the first
// step without an activity layer.
std::vector<SweepFrame> temporal_sweep(const AspectLayer& demographic,
                                       const AspectLayer& building_env,
                                       const std::map<int, AspectLayer>& activity_by_step,
                                       const VRIWeights& weights, std::span<const int> steps,
                                       const SweepOptions& options = {});

// Manifest listing frame timesteps, their files and the weight vector.
std::string sweep_manifest_json(std::span<const SweepFrame> frames,
                                const std::map<int, std::vector<std::string>>& files);

}  // namespace elecvuln

#endif  // ELECVULN_GEO_LAYERS_H_
