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

#include "elecvuln/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/hashing.h"

namespace elecvuln {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, fmt::format("config: {}", what));
}

void allow_keys(const json& obj, std::string_view where, std::set<std::string_view> allowed) {
  if (!obj.is_object()) bad(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) bad(fmt::format("unknown key '{}' in {}", key, where));
  }
}

double number(const json& obj, std::string_view key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) bad(fmt::format("'{}' must be a number", key));
  return obj[key].get<double>();
}

std::string text(const json& obj, std::string_view key, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) bad(fmt::format("'{}' must be a string", key));
  return obj[key].get<std::string>();
}

std::map<std::string, double> number_map(const json& obj, std::string_view where) {
  if (!obj.is_object()) bad(fmt::format("{} must be an object", where));
  std::map<std::string, double> out;
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_number()) bad(fmt::format("{}.{} must be a number", where, key));
    out[key] = value.get<double>();
  }
  return out;
}

ActivityClass class_key(const std::string& key, std::string_view where) {
  auto c = parse_class_label(key);
  if (!c) bad(fmt::format("{}: '{}' is not an activity class (c01..c08)", where, key));
  return *c;
}

}  // namespace

ProjectConfig parse_config(std::string_view text_in, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, fmt::format("config: invalid JSON: {}", e.what()));
  }
  allow_keys(doc, "config",
             {"version", "inputs", "time_grid", "activity_codes", "placement",
              "activity_vulnerability", "combine", "variable_weights", "env_weights", "weights",
              "grid", "model", "simulate", "mapping", "assess", "render"});
  if (doc.contains("version") && doc["version"] != 1) bad("unsupported version");

  ProjectConfig cfg;
  cfg.hash = sha256_hex(text_in);

  if (!doc.contains("inputs")) bad("missing 'inputs'");
  const json& inputs = doc["inputs"];
  allow_keys(inputs, "inputs", {"diaries", "buildings", "demographics", "zones", "gps"});
  auto path_of = [&](std::string_view key) {
    std::string p = text(inputs, key, "");
    if (p.empty()) bad(fmt::format("inputs.{} is required", key));
    return (base_dir / p).lexically_normal();
  };
  cfg.inputs.diaries = path_of("diaries");
  cfg.inputs.buildings = path_of("buildings");
  cfg.inputs.demographics = path_of("demographics");
  cfg.inputs.zones = path_of("zones");
  if (inputs.contains("gps")) cfg.inputs.gps = path_of("gps");

  if (doc.contains("time_grid")) {
    const json& tg = doc["time_grid"];
    allow_keys(tg, "time_grid", {"steps", "step_minutes"});
    if (number(tg, "steps", kStepsPerDay) != kStepsPerDay ||
        number(tg, "step_minutes", kStepMinutes) != kStepMinutes) {
      bad("time_grid must be 96 steps of 15 minutes");
    }
  }

  if (doc.contains("activity_codes")) {
    const json& rules = doc["activity_codes"];
    if (!rules.is_array()) bad("activity_codes must be an array");
    std::vector<ActivityCodeMap::Rule> out;
    for (const json& r : rules) {
      allow_keys(r, "activity_codes[]", {"prefix", "class"});
      out.push_back({text(r, "prefix", ""), class_key(text(r, "class", ""), "activity_codes")});
    }
    cfg.code_map = ActivityCodeMap::create(std::move(out));
  }

  if (doc.contains("placement")) {
    const json& p = doc["placement"];
    if (!p.is_object()) bad("placement must be an object");
    ActivityPlacementTable::Rows rows;
    for (const auto& [label, targets] : p.items()) {
      const ActivityClass c = class_key(label, "placement");
      for (const auto& [type_name, share] : number_map(targets, "placement." + label)) {
        auto type = parse_building_type(type_name);
        if (!type) bad(fmt::format("placement.{}: unknown building type '{}'", label, type_name));
        rows[index_of(c)].push_back({*type, share});
      }
    }
    cfg.placement = ActivityPlacementTable::create(std::move(rows));
  }

  if (doc.contains("activity_vulnerability")) {
    const json& av = doc["activity_vulnerability"];
    if (!av.is_object()) bad("activity_vulnerability must be an object");
    std::array<ActivityVulnerability, kNumClasses> rows;
    std::array<bool, kNumClasses> seen{};
    for (const auto& [label, entry] : av.items()) {
      const ActivityClass c = class_key(label, "activity_vulnerability");
      allow_keys(entry, "activity_vulnerability." + label, {"criticality", "relevance"});
      const double crit = number(entry, "criticality", 0);
      const double rel = number(entry, "relevance", 0);
      if (crit != static_cast<int>(crit) || rel != static_cast<int>(rel)) {
        bad(fmt::format("activity_vulnerability.{} values must be integers", label));
      }
      rows[index_of(c)] = {static_cast<int>(crit), static_cast<int>(rel)};
      seen[index_of(c)] = true;
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (!seen[c]) bad(fmt::format("activity_vulnerability lacks {}", class_label(class_at(c))));
    }
    cfg.activity_vulnerability = ActivityVulnerabilityTable::create(rows);
  }

  const std::string combine = text(doc, "combine", "geometric");
  if (combine == "geometric") {
    cfg.combine_mode = CombineMode::kGeometric;
  } else if (combine == "arithmetic") {
    cfg.combine_mode = CombineMode::kArithmetic;
  } else {
    bad("combine must be 'geometric' or 'arithmetic'");
  }

  if (doc.contains("variable_weights")) {
    cfg.variable_weights = number_map(doc["variable_weights"], "variable_weights");
  }
  if (doc.contains("env_weights")) {
    cfg.env_weights = number_map(doc["env_weights"], "env_weights");
    score_building_env({}, cfg.env_weights);  // validates keys and signs
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    allow_keys(w, "weights", {"demographic", "activity", "building_env"});
    cfg.weights = VRIWeights::from_raw(number(w, "demographic", 0), number(w, "activity", 0),
                                       number(w, "building_env", 0));
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    allow_keys(g, "grid", {"x0", "y0", "cell_size", "rows", "cols"});
    cfg.grid.x0 = number(g, "x0", 0);
    cfg.grid.y0 = number(g, "y0", 0);
    cfg.grid.cell_size = number(g, "cell_size", 100);
    const double rows = number(g, "rows", 1);
    const double cols = number(g, "cols", 1);
    if (rows < 1 || cols < 1 || rows != static_cast<std::size_t>(rows) ||
        cols != static_cast<std::size_t>(cols)) {
      bad("grid rows/cols must be positive integers");
    }
    cfg.grid.rows = static_cast<std::size_t>(rows);
    cfg.grid.cols = static_cast<std::size_t>(cols);
  }
  cfg.grid.validate();

  if (doc.contains("model")) {
    const json& m = doc["model"];
    allow_keys(m, "model", {"smoothing", "stationary"});
    cfg.fit.smoothing = number(m, "smoothing", 0.0);
    if (!(cfg.fit.smoothing >= 0)) bad("model.smoothing must be nonnegative");
    if (m.contains("stationary")) {
      if (!m["stationary"].is_boolean()) bad("model.stationary must be a boolean");
      cfg.fit.stationary = m["stationary"].get<bool>();
    }
  }

  if (doc.contains("simulate")) {
    const json& s = doc["simulate"];
    allow_keys(s, "simulate", {"seed", "samples", "trajectory"});
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) bad("simulate.seed must be a nonnegative integer");
      cfg.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("samples")) {
      if (!s["samples"].is_number_unsigned()) bad("simulate.samples must be a nonnegative integer");
      cfg.samples = s["samples"].get<std::size_t>();
    }
    const std::string source = text(s, "trajectory", "propagate");
    if (source == "propagate") {
      cfg.trajectory_source = TrajectorySource::kPropagate;
    } else if (source == "sample") {
      cfg.trajectory_source = TrajectorySource::kSample;
      if (cfg.samples == 0) bad("simulate.trajectory 'sample' needs samples > 0");
    } else {
      bad("simulate.trajectory must be 'propagate' or 'sample'");
    }
  }

  if (doc.contains("mapping")) {
    const json& m = doc["mapping"];
    allow_keys(m, "mapping", {"snap_radius", "capped_split"});
    cfg.snap_radius = number(m, "snap_radius", kDefaultSnapRadius);
    if (!(cfg.snap_radius >= 0)) bad("mapping.snap_radius must be nonnegative");
    const std::string split = text(m, "capped_split", "count");
    if (split == "count") {
      cfg.allocation.capped_split = CappedSplit::kByCount;
    } else if (split == "capacity") {
      cfg.allocation.capped_split = CappedSplit::kByCapacity;
    } else {
      bad("mapping.capped_split must be 'count' or 'capacity'");
    }
  }

  if (doc.contains("assess")) {
    const json& a = doc["assess"];
    allow_keys(a, "assess", {"activity_ranking"});
    const std::string ranking = text(a, "activity_ranking", "pooled");
    if (ranking == "pooled") {
      cfg.activity_ranking = ActivityRanking::kPooled;
    } else if (ranking == "per_step") {
      cfg.activity_ranking = ActivityRanking::kPerStep;
    } else {
      bad("assess.activity_ranking must be 'pooled' or 'per_step'");
    }
  }

  if (doc.contains("render")) {
    const json& r = doc["render"];
    allow_keys(r, "render", {"ramp", "cell_px"});
    cfg.ramp = text(r, "ramp", cfg.ramp);
    const double px = number(r, "cell_px", cfg.cell_px);
    if (px < 1 || px > 256 || px != static_cast<int>(px)) bad("render.cell_px must be in 1..256");
    cfg.cell_px = static_cast<int>(px);
  }
  return cfg;
}

ProjectConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, fmt::format("cannot open config {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ProjectConfig cfg = parse_config(buffer.str(), path.parent_path());
  std::vector<fs::path> required = {cfg.inputs.diaries, cfg.inputs.buildings,
                                    cfg.inputs.demographics, cfg.inputs.zones};
  if (cfg.inputs.gps) required.push_back(*cfg.inputs.gps);
  for (const fs::path& p : required) {
    if (!fs::is_regular_file(p)) {
      throw Error(ErrorCode::kNotFound, fmt::format("config: input file {} does not exist", p.string()));
    }
  }
  return cfg;
}

}  // namespace elecvuln
