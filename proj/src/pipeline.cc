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

#include "elecvuln/pipeline.h"

#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/csv.h"
#include "elecvuln/hashing.h"

namespace elecvuln {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 5> kStageNames = {"fit", "simulate", "map", "assess",
                                                        "render"};
// Bumped whenever a stage's output format or semantics change.
constexpr std::array<int, 5> kStageVersions = {1, 1, 1, 1, 1};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
}

json report_json(const ParseReport& r) {
  json issues = json::array();
  for (const ParseIssue& i : r.issues) {
    issues.push_back({{"line", i.line}, {"subject", i.subject}, {"reason", i.reason}});
  }
  return {{"rows_read", r.rows_read},         {"rows_dropped", r.rows_dropped},
          {"records_kept", r.records_kept},   {"records_dropped", r.records_dropped},
          {"issues", std::move(issues)}};
}

json weights_json(const VRIWeights& w) {
  return {{"demographic", w.demographic()},
          {"activity", w.activity()},
          {"building_env", w.building_env()}};
}

std::vector<double> ranks_as_values(const AspectLayer& layer) {
  std::vector<double> out(layer.ranks.size(), kNoData);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (layer.ranks[i] != kNoRank) out[i] = layer.ranks[i];
  }
  return out;
}

AspectLayer ranks_from_values(const GridSpec& grid, const std::vector<double>& values,
                              Aspect aspect, std::optional<int> timestep) {
  AspectLayer layer{grid, std::vector<std::uint8_t>(values.size(), kNoRank), aspect, timestep};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (is_nodata(values[i])) continue;
    if (values[i] < 1 || values[i] > 5 || values[i] != static_cast<int>(values[i])) {
      throw Error(ErrorCode::kParse, fmt::format("{} rank layer holds non-rank value {}",
                                                 aspect_name(aspect), values[i]));
    }
    layer.ranks[i] = static_cast<std::uint8_t>(values[i]);
  }
  return layer;
}

class Runner {
 public:
  Runner(const ProjectConfig& config, RunOptions options)
      : config_(config), options_(std::move(options)) {
    snap_.grid = config.grid;
    snap_.vulnerability = config.activity_vulnerability;
    snap_.combine_mode = config.combine_mode;
    snap_.default_weights = options_.weights.value_or(config.weights);
    snap_.ramp = config.ramp;
    snap_.cell_px = config.cell_px;
    const fs::path prov = options_.out_dir / artifacts::kProvenance;
    if (fs::exists(prov)) {
      try {
        provenance_ = json::parse(read_file(prov));
      } catch (const json::exception&) {
        provenance_ = json::object();
      }
    }
    if (!provenance_.is_object()) provenance_ = json::object();
  }

  void run() {
    for (Stage s : kAllStages) {
      if (!options_.stages.count(s)) continue;
      current_ = s;
      begin_stage(s);
      switch (s) {
        case Stage::kFit: fit_stage(); break;
        case Stage::kSimulate: simulate_stage(); break;
        case Stage::kMap: map_stage(); break;
        case Stage::kAssess: assess_stage(); break;
        case Stage::kRender: render_stage(); break;
      }
    }
    if (!options_.stages.empty()) write_provenance();
    snap_.content_hash = content_hash();
  }

  void load_assessed() {
    ensure_assessed(Stage::kAssess);
    snap_.content_hash = content_hash();
  }

  std::shared_ptr<const ScenarioSnapshot> snapshot() {
    return std::make_shared<const ScenarioSnapshot>(std::move(snap_));
  }

 private:
  // ---- inputs --------------------------------------------------------------

  std::string input_bytes(std::string_view role, const fs::path& path) {
    std::string bytes = read_file(path);
    inputs_[std::string(role)] = {{"file", path.filename().string()},
                                  {"sha256", sha256_hex(bytes)}};
    return bytes;
  }

  const std::vector<Building>& buildings() {
    if (!buildings_loaded_) {
      std::istringstream in(input_bytes("buildings", config_.inputs.buildings));
      auto parsed = parse_buildings(in);
      snap_.buildings = std::move(parsed.items);
      building_report_ = std::move(parsed.report);
      buildings_loaded_ = true;
    }
    return snap_.buildings;
  }

  const std::vector<ZoneDemographics>& demographics() {
    if (!demographics_) {
      std::istringstream in(input_bytes("demographics", config_.inputs.demographics));
      auto parsed = parse_demographics(in);
      demographics_ = std::move(parsed.items);
      demographic_report_ = std::move(parsed.report);
      snap_.population = 0.0;
      for (const ZoneDemographics& z : *demographics_) {
        snap_.population += static_cast<double>(z.population);
      }
    }
    return *demographics_;
  }

  const std::vector<ZoneGeometry>& zones() {
    if (!zones_) {
      std::istringstream in(input_bytes("zones", config_.inputs.zones));
      zones_ = parse_zones(in).items;
    }
    return *zones_;
  }

  // ---- artifacts -----------------------------------------------------------

  void begin_stage(Stage s) {
    json& arts = provenance_["artifacts"];
    if (!arts.is_object()) arts = json::object();
    for (auto it = arts.begin(); it != arts.end();) {
      if (it->is_object() && it->value("stage", "") == stage_name(s)) {
        it = arts.erase(it);
      } else {
        ++it;
      }
    }
  }

  void emit(const std::string& name, std::string_view bytes) {
    write_file(options_.out_dir / name, bytes);
    provenance_["artifacts"][name] = {{"stage", stage_name(current_)},
                                      {"sha256", sha256_hex(bytes)}};
  }

  std::string load_artifact(std::string_view name, Stage producer, Stage consumer) {
    const fs::path path = options_.out_dir / name;
    if (!fs::exists(path)) {
      throw Error(ErrorCode::kFailedPrecondition,
                  fmt::format("stage '{}' needs {} from stage '{}'; run stage '{}' first",
                              stage_name(consumer), name, stage_name(producer),
                              stage_name(producer)));
    }
    std::string bytes = read_file(path);
    loaded_[std::string(name)] = sha256_hex(bytes);
    return bytes;
  }

  void write_provenance() {
    provenance_["format"] = "elecvuln.provenance";
    provenance_["version"] = 1;
    provenance_["config_hash"] = config_.hash;
    json& stages = provenance_["stages"];
    if (!stages.is_object()) stages = json::object();
    for (Stage s : options_.stages) {
      stages[std::string(stage_name(s))] = {
          {"version", kStageVersions[static_cast<std::size_t>(s)]},
          {"config_hash", config_.hash},
          {"seed", seed()},
          {"weights", weights_json(snap_.default_weights)}};
    }
    json& inputs = provenance_["inputs"];
    if (!inputs.is_object()) inputs = json::object();
    for (const auto& [role, entry] : inputs_) inputs[role] = entry;
    write_file(options_.out_dir / artifacts::kProvenance, provenance_.dump(1) + "\n");
  }

  std::string content_hash() const {
    std::map<std::string, std::string> digests = loaded_;
    if (provenance_.contains("artifacts") && provenance_["artifacts"].is_object()) {
      for (const auto& [name, entry] : provenance_["artifacts"].items()) {
        if (entry.is_object() && entry.contains("sha256") && entry["sha256"].is_string()) {
          digests[name] = entry["sha256"].get<std::string>();
        }
      }
    }
    std::string joined;
    for (const auto& [name, digest] : digests) joined += name + " " + digest + "\n";
    return sha256_hex(joined);
  }

  std::uint64_t seed() const { return options_.seed.value_or(config_.seed); }

  // ---- prerequisites -------------------------------------------------------

  const MarkovActivityModel& ensure_model(Stage consumer) {
    if (!snap_.model) {
      std::istringstream in(load_artifact(artifacts::kModel, Stage::kFit, consumer));
      snap_.model = read_model(in);
    }
    return *snap_.model;
  }

  const TrajectoryMatrix& ensure_trajectory(Stage consumer) {
    if (!snap_.trajectory) {
      std::istringstream in(load_artifact(artifacts::kTrajectory, Stage::kSimulate, consumer));
      snap_.trajectory = read_trajectory_csv(in);
    }
    return *snap_.trajectory;
  }

  const OccupancyField& ensure_occupancy(Stage consumer) {
    if (!snap_.occupancy) {
      std::istringstream occ(load_artifact(artifacts::kOccupancy, Stage::kMap, consumer));
      std::istringstream unp(load_artifact(artifacts::kUnplaced, Stage::kMap, consumer));
      demographics();
      snap_.occupancy = read_occupancy_csv(occ, unp, buildings(), snap_.population);
    }
    return *snap_.occupancy;
  }

  void ensure_assessed(Stage consumer) {
    if (snap_.assessed()) return;
    ensure_occupancy(consumer);
    if (snap_.building_env_scores.empty()) {
      snap_.building_env_scores = score_building_env(buildings(), config_.env_weights);
    }
    auto load_layer = [&](const std::string& name) {
      std::istringstream in(load_artifact(name, Stage::kAssess, consumer));
      return read_values_csv(in, config_.grid);
    };
    auto raw = [&](const std::string& name, Aspect a, std::optional<int> t) {
      return RawLayer{config_.grid, load_layer(name),
                      LayerProvenance{std::string(aspect_name(a)), t, {}}};
    };
    snap_.demographic_raw = raw(artifacts::static_layer(Aspect::kDemographic, true),
                                Aspect::kDemographic, std::nullopt);
    snap_.building_env_raw = raw(artifacts::static_layer(Aspect::kBuildingEnv, true),
                                 Aspect::kBuildingEnv, std::nullopt);
    snap_.demographic =
        ranks_from_values(config_.grid, load_layer(artifacts::static_layer(Aspect::kDemographic, false)),
                          Aspect::kDemographic, std::nullopt);
    snap_.building_env =
        ranks_from_values(config_.grid, load_layer(artifacts::static_layer(Aspect::kBuildingEnv, false)),
                          Aspect::kBuildingEnv, std::nullopt);
    snap_.activity_raw.clear();
    snap_.activity.clear();
    for (int t = 0; t < kStepsPerDay; ++t) {
      snap_.activity_raw.push_back(raw(artifacts::activity_layer(t, true), Aspect::kActivity, t));
      snap_.activity.push_back(ranks_from_values(
          config_.grid, load_layer(artifacts::activity_layer(t, false)), Aspect::kActivity, t));
    }
  }

  // ---- stages --------------------------------------------------------------

  void fit_stage() {
    std::string bytes = input_bytes("diaries", config_.inputs.diaries);
    std::istringstream in(bytes);
    auto parsed = parse_diaries(in, config_.code_map);
    emit("reports/diaries.json", report_json(parsed.report).dump(1) + "\n");
    if (parsed.items.empty()) {
      throw Error(ErrorCode::kFailedPrecondition, "fit: no usable diary records");
    }
    MarkovActivityModel model = fit(parsed.items, config_.fit);
    std::vector<std::string> labels;
    for (ActivityClass c : kAllClasses) labels.emplace_back(class_label(c));
    snap_.model = MarkovActivityModel::create(
        model.alpha(), model.transitions(),
        ModelProvenance{labels, sha256_hex(bytes), config_.fit.smoothing, config_.fit.stationary});
    std::ostringstream out;
    write_model(out, *snap_.model);
    emit(std::string(artifacts::kModel), out.str());
  }

  void simulate_stage() {
    const MarkovActivityModel& model = ensure_model(Stage::kSimulate);
    if (model.num_states() != kNumClasses ||
        model.num_steps() != static_cast<std::size_t>(kStepsPerDay)) {
      throw Error(ErrorCode::kFailedPrecondition,
                  fmt::format("simulate: model has {} states and {} steps, expected {} and {}",
                              model.num_states(), model.num_steps(), kNumClasses, kStepsPerDay));
    }
    if (config_.trajectory_source == TrajectorySource::kSample) {
      auto sequences = sample(model, config_.samples, seed());
      snap_.trajectory = aggregate(sequences, kNumClasses);
    } else {
      snap_.trajectory = propagate(model);
    }
    std::ostringstream out;
    write_trajectory_csv(out, *snap_.trajectory);
    emit(std::string(artifacts::kTrajectory), out.str());
  }

  void map_stage() {
    const TrajectoryMatrix& traj = ensure_trajectory(Stage::kMap);
    const auto& blds = buildings();
    const auto& demo = demographics();
    json reports = {{"buildings", report_json(building_report_)},
                    {"demographics", report_json(demographic_report_)},
                    {"population", snap_.population}};
    snap_.occupancy =
        allocate(traj, snap_.population, blds, config_.placement, demo, config_.allocation);
    std::ostringstream occ;
    write_occupancy_csv(occ, *snap_.occupancy);
    emit(std::string(artifacts::kOccupancy), occ.str());
    std::ostringstream unp;
    write_unplaced_csv(unp, *snap_.occupancy);
    emit(std::string(artifacts::kUnplaced), unp.str());

    if (config_.inputs.gps) {
      std::istringstream in(input_bytes("gps", *config_.inputs.gps));
      auto paths = parse_gps(in);
      reports["gps"] = report_json(paths.report);
      auto assignments =
          join_gps(paths.items, traj, blds, config_.placement, config_.snap_radius);
      std::ostringstream out;
      out << "person_id,t,building_id,class\n";
      for (const PersonAssignment& p : assignments) {
        for (std::size_t t = 0; t < p.steps.size(); ++t) {
          const StepAssignment& s = p.steps[t];
          const std::array<std::string, 4> row = {p.person_id, std::to_string(t),
                                                  s.building_id.value_or(""),
                                                  std::string(class_label(s.activity))};
          csv::write_row(out, row);
        }
      }
      emit(std::string(artifacts::kGpsAssignments), out.str());
    }
    emit("reports/map.json", reports.dump(1) + "\n");
  }

  void assess_stage() {
    const OccupancyField& field = ensure_occupancy(Stage::kAssess);
    const auto& blds = buildings();
    const GridSpec& grid = config_.grid;

    // Demographic: zone scores painted onto cell centers.
    const auto& demo = demographics();
    const std::vector<double> zone_scores = score_demographic(demo, config_.variable_weights);
    std::map<std::string, double> by_zone;
    for (std::size_t i = 0; i < demo.size(); ++i) by_zone[demo[i].zone_id] = zone_scores[i];
    RawLayer demo_raw = paint_zones(zones(), by_zone, grid);
    demo_raw.provenance = {"demographic", std::nullopt, {inputs_["demographics"]["sha256"],
                                                         inputs_["zones"]["sha256"]}};

    snap_.building_env_scores = score_building_env(blds, config_.env_weights);
    std::vector<PointValue> env_points;
    env_points.reserve(blds.size());
    for (std::size_t b = 0; b < blds.size(); ++b) {
      env_points.push_back({blds[b].centroid, snap_.building_env_scores[b]});
    }
    RasterizeResult env = rasterize(env_points, grid, Reducer::kMean);
    env.layer.provenance = {"building_env", std::nullopt, {inputs_["buildings"]["sha256"]}};

    std::vector<RawLayer> act_raw;
    act_raw.reserve(kStepsPerDay);
    for (int t = 0; t < kStepsPerDay; ++t) {
      const std::vector<double> scores =
          score_activity(field, config_.activity_vulnerability, static_cast<std::size_t>(t),
                         config_.combine_mode);
      std::vector<PointValue> pts;
      pts.reserve(blds.size());
      for (std::size_t b = 0; b < blds.size(); ++b) pts.push_back({blds[b].centroid, scores[b]});
      RasterizeResult r = rasterize(pts, grid, Reducer::kSum);
      r.layer.provenance = {"activity", t, {}};
      act_raw.push_back(std::move(r.layer));
    }

    snap_.demographic = rank_quintiles(demo_raw, Aspect::kDemographic);
    snap_.building_env = rank_quintiles(env.layer, Aspect::kBuildingEnv);
    if (config_.activity_ranking == ActivityRanking::kPooled) {
      snap_.activity = rank_quintiles_pooled(act_raw, Aspect::kActivity);
    } else {
      snap_.activity.clear();
      for (int t = 0; t < kStepsPerDay; ++t) {
        snap_.activity.push_back(rank_quintiles(act_raw[t], Aspect::kActivity, t));
      }
    }
    snap_.demographic_raw = std::move(demo_raw);
    snap_.building_env_raw = std::move(env.layer);
    snap_.activity_raw = std::move(act_raw);

    auto values_csv = [&](std::span<const double> values) {
      std::ostringstream out;
      write_values_csv(out, grid, values);
      return out.str();
    };
    emit(artifacts::static_layer(Aspect::kDemographic, true),
         values_csv(snap_.demographic_raw->values));
    emit(artifacts::static_layer(Aspect::kDemographic, false),
         values_csv(ranks_as_values(*snap_.demographic)));
    emit(artifacts::static_layer(Aspect::kBuildingEnv, true),
         values_csv(snap_.building_env_raw->values));
    emit(artifacts::static_layer(Aspect::kBuildingEnv, false),
         values_csv(ranks_as_values(*snap_.building_env)));
    for (int t = 0; t < kStepsPerDay; ++t) {
      emit(artifacts::activity_layer(t, true), values_csv(snap_.activity_raw[t].values));
      emit(artifacts::activity_layer(t, false), values_csv(ranks_as_values(snap_.activity[t])));
      const auto layers = snap_.layers_at(t);
      emit(artifacts::frame_csv(t), values_csv(compose(layers, snap_.default_weights).values));
    }
    json report = {{"buildings_outside_grid", env.out_of_bounds},
                   {"weights", weights_json(snap_.default_weights)},
                   {"activity_ranking", config_.activity_ranking == ActivityRanking::kPooled
                                            ? "pooled"
                                            : "per_step"}};
    emit("reports/assess.json", report.dump(1) + "\n");
  }

  void render_stage() {
    ensure_assessed(Stage::kRender);
    const ColorRamp& ramp = find_ramp(snap_.ramp);
    std::map<int, AspectLayer> by_step;
    for (const AspectLayer& l : snap_.activity) by_step.emplace(*l.timestep, l);
    std::vector<int> steps(kStepsPerDay);
    std::iota(steps.begin(), steps.end(), 0);
    const auto frames = temporal_sweep(*snap_.demographic, *snap_.building_env, by_step,
                                       snap_.default_weights, steps,
                                       SweepOptions{snap_.ramp, snap_.cell_px});
    std::map<int, std::vector<std::string>> files;
    for (const SweepFrame& f : frames) {
      emit(artifacts::frame_png(f.timestep), encode_png(*f.image));
      files[f.timestep] = {artifacts::frame_csv(f.timestep), artifacts::frame_png(f.timestep)};
    }
    emit("frames/sweep_manifest.json", sweep_manifest_json(frames, files));
    emit("legend.json", legend_json(ramp));

    for (const AspectLayer* layer : {&*snap_.demographic, &*snap_.building_env}) {
      const std::string base = fmt::format("layers/{}", aspect_name(layer->aspect));
      emit(base + ".png", encode_png(render(*layer, snap_.ramp, snap_.cell_px)));
      std::ostringstream gj;
      write_cells_geojson(gj, layer->grid, ranks_as_values(*layer), "rank");
      emit(base + ".geojson", gj.str());
    }
    if (options_.timestep) {
      const int t = *options_.timestep;
      if (t < 0 || t >= kStepsPerDay) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("timestep {} outside 0..{}", t, kStepsPerDay - 1));
      }
      const SweepFrame& f = frames[static_cast<std::size_t>(t)];
      std::ostringstream gj;
      write_cells_geojson(gj, f.map.grid, f.map.values, "V");
      emit(fmt::format("frames/vri_t{:02}.geojson", t), gj.str());
    }
  }

  const ProjectConfig& config_;
  RunOptions options_;
  ScenarioSnapshot snap_;
  Stage current_ = Stage::kFit;
  json provenance_ = json::object();
  std::map<std::string, json> inputs_;
  std::map<std::string, std::string> loaded_;

  bool buildings_loaded_ = false;
  ParseReport building_report_;
  std::optional<std::vector<ZoneDemographics>> demographics_;
  ParseReport demographic_report_;
  std::optional<std::vector<ZoneGeometry>> zones_;
};

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::set<Stage> parse_stages(std::string_view list) {
  if (list == "all") return {kAllStages.begin(), kAllStages.end()};
  std::set<Stage> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    auto s = parse_stage(item);
    if (!s) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("unknown stage '{}' (expected fit, simulate, map, assess, render)",
                              item));
    }
    out.insert(*s);
    pos = comma + 1;
  }
  return out;
}

std::array<AspectLayer, 3> ScenarioSnapshot::layers_at(int t) const {
  if (!assessed()) {
    throw Error(ErrorCode::kFailedPrecondition, "snapshot has no assessed layers");
  }
  if (t < 0 || t >= kStepsPerDay) {
    throw Error(ErrorCode::kNotFound, fmt::format("no timestep {}", t));
  }
  return {*demographic, activity[static_cast<std::size_t>(t)], *building_env};
}

namespace artifacts {
std::string activity_layer(int t, bool raw) {
  return fmt::format("layers/activity_t{:02}{}.csv", t, raw ? "_raw" : "");
}
std::string static_layer(Aspect a, bool raw) {
  return fmt::format("layers/{}{}.csv", aspect_name(a), raw ? "_raw" : "");
}
std::string frame_csv(int t) { return fmt::format("frames/vri_t{:02}.csv", t); }
std::string frame_png(int t) { return fmt::format("frames/vri_t{:02}.png", t); }
}  // namespace artifacts

void write_trajectory_csv(std::ostream& out, const TrajectoryMatrix& traj) {
  out << "t";
  for (std::size_t k = 0; k < traj.num_states(); ++k) {
    out << ',' << (k < kNumClasses ? std::string(class_label(class_at(k))) : fmt::format("s{}", k));
  }
  out << '\n';
  for (std::size_t t = 0; t < traj.num_steps(); ++t) {
    out << t;
    for (std::size_t k = 0; k < traj.num_states(); ++k) out << ',' << format_double(traj(t, k));
    out << '\n';
  }
}

TrajectoryMatrix read_trajectory_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields.size() < 2 || header->fields[0] != "t") {
    throw Error(ErrorCode::kParse, "trajectory file: expected header t,c01,...");
  }
  const std::size_t k = header->fields.size() - 1;
  std::vector<std::vector<double>> rows;
  while (auto row = reader.next()) {
    if (row->fields.size() != k + 1 || parse_int(row->fields[0]) != static_cast<long long>(rows.size())) {
      throw Error(ErrorCode::kParse, fmt::format("trajectory file line {}: bad row", row->line));
    }
    std::vector<double> values;
    for (std::size_t j = 1; j <= k; ++j) {
      auto v = parse_double(row->fields[j]);
      if (!v) throw Error(ErrorCode::kParse, fmt::format("trajectory file line {}: bad value", row->line));
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  Matrix m(rows.size(), k);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < k; ++j) m(t, j) = rows[t][j];
  }
  return TrajectoryMatrix::create(std::move(m));
}

std::shared_ptr<const ScenarioSnapshot> run_pipeline(const ProjectConfig& config,
                                                     const RunOptions& options) {
  Runner runner(config, options);
  runner.run();
  return runner.snapshot();
}

std::shared_ptr<const ScenarioSnapshot> load_snapshot(const ProjectConfig& config,
                                                      const fs::path& out_dir) {
  RunOptions options;
  options.stages.clear();
  options.out_dir = out_dir;
  Runner runner(config, options);
  runner.load_assessed();
  return runner.snapshot();
}

}  // namespace elecvuln
