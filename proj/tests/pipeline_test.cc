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

#include <fstream>
#include <sstream>

#include <json.hpp>
#include <gtest/gtest.h>

#include "elecvuln/pipeline.h"
#include "test_util.h"

namespace elecvuln {
namespace {

namespace fs = std::filesystem;

ProjectConfig county() { return load_config(fs::path(ELECVULN_DATA_DIR) / "config.json"); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

TEST(Stages, ParseList) {
  EXPECT_EQ(parse_stages("all").size(), 5u);
  EXPECT_EQ(parse_stages("fit,map"), (std::set<Stage>{Stage::kFit, Stage::kMap}));
  EXPECT_THROW(parse_stages("fit,paint"), Error);
  EXPECT_THROW(parse_stages(""), Error);
  for (Stage s : kAllStages) EXPECT_EQ(parse_stage(stage_name(s)), s);
}

TEST(Trajectory, CsvRoundTrip) {
  std::mt19937_64 rng(8);
  const auto traj = propagate(testing::random_model(rng));
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  std::istringstream in(out.str());
  EXPECT_EQ(read_trajectory_csv(in), traj);
}

TEST(Pipeline, FitOnlyWritesModel) {
  const auto dir = testing::temp_dir("fit_only");
  RunOptions opt;
  opt.stages = {Stage::kFit};
  opt.out_dir = dir;
  const auto snap = run_pipeline(county(), opt);
  EXPECT_TRUE(snap->model);
  EXPECT_FALSE(snap->assessed());
  const auto files = tree(dir);
  std::set<std::string> names;
  for (const auto& [k, v] : files) names.insert(k);
  EXPECT_EQ(names, (std::set<std::string>{"model.json", "provenance.json", "reports/diaries.json"}));
  fs::remove_all(dir);
}

TEST(Pipeline, MissingPrerequisiteNamesStage) {
  const auto dir = testing::temp_dir("missing");
  RunOptions opt;
  opt.stages = {Stage::kMap};
  opt.out_dir = dir;
  try {
    run_pipeline(county(), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFailedPrecondition);
    EXPECT_NE(std::string(e.what()).find("simulate"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(Pipeline, StagewiseEqualsAllAtOnce) {
  const auto a = testing::temp_dir("whole");
  const auto b = testing::temp_dir("staged");
  RunOptions opt;
  opt.out_dir = a;
  run_pipeline(county(), opt);
  opt.out_dir = b;
  for (Stage s : kAllStages) {
    opt.stages = {s};
    run_pipeline(county(), opt);
  }
  EXPECT_EQ(tree(a), tree(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, SeedChangesSampledTrajectoryOnly) {
  auto cfg = county();
  cfg.trajectory_source = TrajectorySource::kSample;
  cfg.samples = 500;
  const auto dir = testing::temp_dir("seeded");
  RunOptions opt;
  opt.stages = {Stage::kFit, Stage::kSimulate};
  opt.out_dir = dir;
  opt.seed = 1;
  const auto s1 = run_pipeline(cfg, opt);
  const std::string t1 = slurp(dir / artifacts::kTrajectory);
  run_pipeline(cfg, opt);
  EXPECT_EQ(slurp(dir / artifacts::kTrajectory), t1);
  opt.seed = 2;
  run_pipeline(cfg, opt);
  EXPECT_NE(slurp(dir / artifacts::kTrajectory), t1);
  const auto prov = nlohmann::json::parse(slurp(dir / artifacts::kProvenance));
  EXPECT_EQ(prov["stages"]["simulate"]["seed"], 2);
  fs::remove_all(dir);
}

struct CountyRun : ::testing::Test {
  static void SetUpTestSuite() {
    dir = new fs::path(testing::temp_dir("county"));
    RunOptions opt;
    opt.out_dir = *dir;
    opt.timestep = 40;
    snap = new std::shared_ptr<const ScenarioSnapshot>(run_pipeline(county(), opt));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir);
    delete dir;
    delete snap;
  }
  static fs::path* dir;
  static std::shared_ptr<const ScenarioSnapshot>* snap;
};
fs::path* CountyRun::dir = nullptr;
std::shared_ptr<const ScenarioSnapshot>* CountyRun::snap = nullptr;

std::vector<double> read_layer(const fs::path& p, const GridSpec& g) {
  std::ifstream in(p);
  return read_values_csv(in, g);
}

TEST_F(CountyRun, FramesRecomposeFromExportedLayers) {
  const ScenarioSnapshot& s = **snap;
  ASSERT_TRUE(s.assessed());
  const auto demo = read_layer(*dir / artifacts::static_layer(Aspect::kDemographic, false), s.grid);
  const auto env = read_layer(*dir / artifacts::static_layer(Aspect::kBuildingEnv, false), s.grid);
  const auto w = s.default_weights;
  for (int t = 0; t < kStepsPerDay; ++t) {
    ASSERT_TRUE(fs::exists(*dir / artifacts::frame_png(t))) << t;
    const auto act = read_layer(*dir / artifacts::activity_layer(t, false), s.grid);
    const auto frame = read_layer(*dir / artifacts::frame_csv(t), s.grid);
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const double expected = w.demographic() * demo[i] + w.activity() * act[i] +
                              w.building_env() * env[i];
      if (is_nodata(expected)) {
        ASSERT_TRUE(is_nodata(frame[i]));
      } else {
        ASSERT_NEAR(frame[i], expected, 1e-12);
      }
    }
  }
  EXPECT_TRUE(fs::exists(*dir / "frames/vri_t40.geojson"));
  EXPECT_TRUE(fs::exists(*dir / "layers/demographic.png"));
  EXPECT_TRUE(fs::exists(*dir / "legend.json"));
}

TEST_F(CountyRun, OccupancyConservesPopulation) {
  const ScenarioSnapshot& s = **snap;
  for (std::size_t t = 0; t < 96; ++t) {
    EXPECT_NEAR(s.occupancy->placed_total(t) + s.occupancy->unplaced_total(t), s.population,
                1e-6 * s.population);
  }
}

TEST_F(CountyRun, LoadSnapshotMatchesRun) {
  const ScenarioSnapshot& s = **snap;
  const auto loaded = load_snapshot(county(), *dir);
  ASSERT_TRUE(loaded->assessed());
  EXPECT_EQ(*loaded->demographic, *s.demographic);
  EXPECT_EQ(*loaded->building_env, *s.building_env);
  EXPECT_EQ(loaded->activity, s.activity);
  EXPECT_EQ(*loaded->occupancy, *s.occupancy);
  EXPECT_EQ(loaded->content_hash, s.content_hash);
  EXPECT_THROW(loaded->layers_at(96), Error);
}

TEST_F(CountyRun, ProvenanceRecordsEveryArtifact) {
  const auto prov = nlohmann::json::parse(slurp(*dir / artifacts::kProvenance));
  for (const auto& [name, body] : tree(*dir)) {
    if (name == artifacts::kProvenance) continue;
    ASSERT_TRUE(prov["artifacts"].contains(name)) << name;
  }
  for (Stage st : kAllStages) EXPECT_TRUE(prov["stages"].contains(std::string(stage_name(st))));
  EXPECT_EQ(slurp(*dir / artifacts::kProvenance).find(fs::path(ELECVULN_DATA_DIR).string()),
            std::string::npos);
}

TEST(Pipeline, RerunIsByteIdentical) {
  const auto a = testing::temp_dir("det_a");
  const auto b = testing::temp_dir("det_b");
  RunOptions opt;
  opt.out_dir = a;
  run_pipeline(county(), opt);
  opt.out_dir = b;
  run_pipeline(county(), opt);
  EXPECT_EQ(tree(a), tree(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // namespace
}  // namespace elecvuln
