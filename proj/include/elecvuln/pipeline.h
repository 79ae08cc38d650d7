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

#ifndef ELECVULN_PIPELINE_H_
#define ELECVULN_PIPELINE_H_

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "elecvuln/activity_model.h"
#include "elecvuln/building_mapping.h"
#include "elecvuln/config.h"
#include "elecvuln/geo_layers.h"
#include "elecvuln/raster.h"
#include "elecvuln/vri.h"

namespace elecvuln {

enum class Stage { kFit, kSimulate, kMap, kAssess, kRender };
inline constexpr std::array<Stage, 5> kAllStages = {Stage::kFit, Stage::kSimulate, Stage::kMap,
                                                    Stage::kAssess, Stage::kRender};

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);
// Comma separated list, or "all". Throws Error(kInvalidArgument).
std::set<Stage> parse_stages(std::string_view list);

struct RunOptions {
  std::set<Stage> stages = {kAllStages.begin(), kAllStages.end()};
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;      // overrides the config
  std::optional<VRIWeights> weights;      // overrides the config defaults
  std::optional<int> timestep;            // frame exported as GeoJSON by render
};

// Everything the service needs, frozen after construction. Stage outputs are
// optional because a run may stop early.
struct ScenarioSnapshot {
  GridSpec grid;
  std::vector<Building> buildings;
  double population = 0.0;
  ActivityVulnerabilityTable vulnerability = ActivityVulnerabilityTable::defaults();
  CombineMode combine_mode = CombineMode::kGeometric;
  VRIWeights default_weights = VRIWeights::defaults();
  std::string ramp = "reds";
  int cell_px = kDefaultCellPixels;

  std::optional<MarkovActivityModel> model;
  std::optional<TrajectoryMatrix> trajectory;
  std::optional<OccupancyField> occupancy;

  // Filled by assess.
  std::optional<RawLayer> demographic_raw;
  std::optional<RawLayer> building_env_raw;
  std::vector<RawLayer> activity_raw;  // one per step
  std::optional<AspectLayer> demographic;
  std::optional<AspectLayer> building_env;
  std::vector<AspectLayer> activity;  // one per step
  std::vector<double> building_env_scores;

  // sha256 over the artifact digests.
  std::string content_hash;

  bool assessed() const {
    return demographic && building_env && occupancy &&
           activity.size() == static_cast<std::size_t>(kStepsPerDay);
  }
  // Layers for step t in aspect order. Requires assessed().
  std::array<AspectLayer, 3> layers_at(int t) const;
};

// Artifact file names relative to the output directory.
namespace artifacts {
inline constexpr std::string_view kModel = "model.json";
inline constexpr std::string_view kTrajectory = "trajectory.csv";
inline constexpr std::string_view kOccupancy = "occupancy.csv";
inline constexpr std::string_view kUnplaced = "unplaced.csv";
inline constexpr std::string_view kGpsAssignments = "gps_assignments.csv";
inline constexpr std::string_view kProvenance = "provenance.json";
std::string activity_layer(int t, bool raw);  // layers/activity_tNN[_raw].csv
std::string static_layer(Aspect a, bool raw);  // layers/<aspect>[_raw].csv
std::string frame_csv(int t);                  // frames/vri_tNN.csv
std::string frame_png(int t);                  // frames/vri_tNN.png
}  // namespace artifacts

// "t,c01,...,c08" with one row per step.
void write_trajectory_csv(std::ostream& out, const TrajectoryMatrix& traj);
TrajectoryMatrix read_trajectory_csv(std::istream& in);

// Runs the requested stages in pipeline order, loading earlier outputs from
// out_dir when their stage is not requested. Throws Error(kFailedPrecondition)
// naming the stage to run first when such an output is missing.
std::shared_ptr<const ScenarioSnapshot> run_pipeline(const ProjectConfig& config,
                                                     const RunOptions& options);

// Rebuilds a snapshot from the artifacts of an earlier run (through assess).
std::shared_ptr<const ScenarioSnapshot> load_snapshot(const ProjectConfig& config,
                                                      const std::filesystem::path& out_dir);

}  // namespace elecvuln

#endif  // ELECVULN_PIPELINE_H_
