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

#ifndef ELECVULN_CONFIG_H_
#define ELECVULN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "elecvuln/activity_model.h"
#include "elecvuln/building_mapping.h"
#include "elecvuln/ingest.h"
#include "elecvuln/raster.h"
#include "elecvuln/vri.h"

namespace elecvuln {

struct InputPaths {
  std::filesystem::path diaries;
  std::filesystem::path buildings;
  std::filesystem::path demographics;
  std::filesystem::path zones;
  std::optional<std::filesystem::path> gps;
};

enum class TrajectorySource { kPropagate, kSample };
enum class ActivityRanking { kPooled, kPerStep };

struct ProjectConfig {
  InputPaths inputs;  // resolved against the config file's directory

  ActivityCodeMap code_map = ActivityCodeMap::atus_default();
  ActivityPlacementTable placement = ActivityPlacementTable::defaults();
  ActivityVulnerabilityTable activity_vulnerability = ActivityVulnerabilityTable::defaults();
  CombineMode combine_mode = CombineMode::kGeometric;
  VariableWeights variable_weights = default_variable_weights();
  EnvWeights env_weights = default_env_weights();
  VRIWeights weights = VRIWeights::defaults();
  GridSpec grid;

  FitOptions fit;
  std::uint64_t seed = 42;
  std::size_t samples = 10000;
  TrajectorySource trajectory_source = TrajectorySource::kPropagate;

  double snap_radius = kDefaultSnapRadius;
  AllocationOptions allocation;

  ActivityRanking activity_ranking = ActivityRanking::kPooled;

  std::string ramp = "reds";
  int cell_px = 8;

  // sha256 of the config file bytes.
  std::string hash;

};

// Parses and validates a config document. Relative input paths resolve
// against base_dir. Unknown keys are rejected. Throws Error(kParse) or
// Error(kInvalidArgument).
ProjectConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

// Reads the file, parses it and checks that every referenced input exists
// (Error(kNotFound) otherwise).
ProjectConfig load_config(const std::filesystem::path& path);

}  // namespace elecvuln

#endif  // ELECVULN_CONFIG_H_
