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

#include <png.h>

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/geo_layers.h"

namespace elecvuln {

using json = nlohmann::json;

namespace {

constexpr Rgba hex(std::uint32_t rgb) {
  return {static_cast<std::uint8_t>(rgb >> 16), static_cast<std::uint8_t>((rgb >> 8) & 0xff),
          static_cast<std::uint8_t>(rgb & 0xff), 255};
}

// ColorBrewer sequential 5-class schemes.
constexpr std::array<ColorRamp, 4> kRamps = {{
    {"reds", {hex(0xfee5d9), hex(0xfcae91), hex(0xfb6a4a), hex(0xde2d26), hex(0xa50f15)}},
    {"purples", {hex(0xf2f0f7), hex(0xcbc9e2), hex(0x9e9ac8), hex(0x756bb1), hex(0x54278f)}},
    {"ylorrd", {hex(0xffffb2), hex(0xfecc5c), hex(0xfd8d3c), hex(0xf03b20), hex(0xbd0026)}},
    {"greys", {hex(0xf7f7f7), hex(0xcccccc), hex(0x969696), hex(0x636363), hex(0x252525)}},
}};

constexpr std::array<std::string_view, 5> kRankLabels = {"low", "medium-low", "medium",
                                                         "medium-high", "high"};

std::string hex_string(Rgba c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

void append_png(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

}  // namespace

std::span<const ColorRamp> color_ramps() { return kRamps; }

const ColorRamp& find_ramp(std::string_view id) {
  for (const ColorRamp& r : kRamps) {
    if (r.id == id) return r;
  }
  std::string available;
  for (const ColorRamp& r : kRamps) {
    if (!available.empty()) available += ", ";
    available += r.id;
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown color ramp '{}'; available: {}", id, available));
}

double luminance(Rgba c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

Rgba ramp_color(const ColorRamp& ramp, double value) {
  const double v = std::clamp(value, 1.0, 5.0) - 1.0;
  const std::size_t seg = std::min<std::size_t>(3, static_cast<std::size_t>(v));
  const double f = v - static_cast<double>(seg);
  const Rgba a = ramp.stops[seg];
  const Rgba b = ramp.stops[seg + 1];
  auto mix = [f](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * f));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b), 255};
}

Rgba Image::pixel(std::size_t x, std::size_t y) const {
  const std::size_t i = (y * width + x) * 4;
  return {rgba[i], rgba[i + 1], rgba[i + 2], rgba[i + 3]};
}

Image render_values(const GridSpec& grid, std::span<const double> values,
                    std::string_view ramp_id, int cell_px) {
  const ColorRamp& ramp = find_ramp(ramp_id);
  if (cell_px < 1) throw Error(ErrorCode::kInvalidArgument, "cell_px must be positive");
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::kInvalidArgument, "value count does not match the grid");
  }
  const auto px = static_cast<std::size_t>(cell_px);
  Image img{grid.cols * px, grid.rows * px, {}};
  img.rgba.resize(img.width * img.height * 4);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    const std::size_t image_row = grid.rows - 1 - r;
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double v = values[grid.flat({r, c})];
      const Rgba color = is_nodata(v) ? kNoDataColor : ramp_color(ramp, v);
      for (std::size_t dy = 0; dy < px; ++dy) {
        for (std::size_t dx = 0; dx < px; ++dx) {
          const std::size_t i = ((image_row * px + dy) * img.width + c * px + dx) * 4;
          img.rgba[i] = color.r;
          img.rgba[i + 1] = color.g;
          img.rgba[i + 2] = color.b;
          img.rgba[i + 3] = color.a;
        }
      }
    }
  }
  return img;
}

Image render(const AspectLayer& layer, std::string_view ramp_id, int cell_px) {
  std::vector<double> values(layer.ranks.size(), kNoData);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (layer.ranks[i] != kNoRank) values[i] = layer.ranks[i];
  }
  return render_values(layer.grid, values, ramp_id, cell_px);
}

Image render(const VulnerabilityMap& map, std::string_view ramp_id, int cell_px) {
  return render_values(map.grid, map.values, ramp_id, cell_px);
}

std::string encode_png(const Image& image) {
  if (image.width == 0 || image.height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty image");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::kIo, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "png_create_info_struct failed");
  }
  std::string out;
  std::vector<png_bytep> rows(image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.rgba.data() + y * image.width * 4);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, append_png, nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGBA,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::string legend_json(const ColorRamp& ramp) {
  json stops = json::array();
  for (std::size_t i = 0; i < ramp.stops.size(); ++i) {
    stops.push_back({{"value", i + 1}, {"label", kRankLabels[i]}, {"color", hex_string(ramp.stops[i])}});
  }
  json doc = {{"ramp", ramp.id},
              {"interpolation", "linear between stops"},
              {"stops", std::move(stops)},
              {"nodata", "transparent"}};
  return doc.dump(1) + "\n";
}

std::vector<SweepFrame> temporal_sweep(const AspectLayer& demographic,
                                       const AspectLayer& building_env,
                                       const std::map<int, AspectLayer>& activity_by_step,
                                       const VRIWeights& weights, std::span<const int> steps,
                                       const SweepOptions& options) {
  for (int t : steps) {
    if (!activity_by_step.count(t)) {
      throw Error(ErrorCode::kNotFound, fmt::format("no activity layer for timestep {}", t));
    }
  }
  if (options.ramp) find_ramp(*options.ramp);
  std::vector<SweepFrame> frames;
  frames.reserve(steps.size());
  for (int t : steps) {
    const std::array<AspectLayer, 3> layers = {demographic, activity_by_step.at(t), building_env};
    SweepFrame frame{t, compose(layers, weights), std::nullopt};
    frame.map.timestep = t;
    if (options.ramp) frame.image = render(frame.map, *options.ramp, options.cell_px);
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::string sweep_manifest_json(std::span<const SweepFrame> frames,
                                const std::map<int, std::vector<std::string>>& files) {
  json list = json::array();
  std::optional<VRIWeights> weights;
  for (const SweepFrame& f : frames) {
    weights = f.map.weights;
    json entry = {{"timestep", f.timestep},
                  {"minute_of_day", f.timestep * kStepMinutes}};
    if (auto it = files.find(f.timestep); it != files.end()) entry["files"] = it->second;
    list.push_back(std::move(entry));
  }
  json doc = {{"frames", std::move(list)}};
  if (weights) {
    doc["weights"] = {{"demographic", weights->demographic()},
                      {"activity", weights->activity()},
                      {"building_env", weights->building_env()}};
  }
  return doc.dump(1) + "\n";
}

}  // namespace elecvuln
