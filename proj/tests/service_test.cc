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
#include <future>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#include <gtest/gtest.h>

#include "elecvuln/service.h"
#include "test_util.h"

namespace elecvuln {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ServiceTest : ::testing::Test {
  static void SetUpTestSuite() {
    dir = new fs::path(testing::temp_dir("service"));
    RunOptions opt;
    opt.out_dir = *dir;
    opt.stages = {Stage::kFit, Stage::kSimulate, Stage::kMap, Stage::kAssess};
    const auto snap = run_pipeline(load_config(fs::path(ELECVULN_DATA_DIR) / "config.json"), opt);
    service = new std::shared_ptr<const Service>(std::make_shared<Service>(snap));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir);
    delete dir;
    delete service;
  }
  static const Service& svc() { return **service; }
  static json get(std::string_view path, const QueryParams& q = {}, int status = 200) {
    const HttpResponse r = svc().handle(path, q);
    EXPECT_EQ(r.status, status) << path << " " << r.body;
    return r.content_type == "application/json" ? json::parse(r.body) : json();
  }
  static fs::path* dir;
  static std::shared_ptr<const Service>* service;
};
fs::path* ServiceTest::dir = nullptr;
std::shared_ptr<const Service>* ServiceTest::service = nullptr;

TEST_F(ServiceTest, Meta) {
  const json m = get("/meta");
  EXPECT_EQ(m["timesteps"], 96);
  EXPECT_EQ(m["step_minutes"], 15);
  EXPECT_EQ(m["grid"]["rows"], 20);
  EXPECT_EQ(m["classes"].size(), 8u);
  EXPECT_EQ(m["classes"][0]["label"], "c01");
  EXPECT_NEAR(m["default_weights"]["demographic"].get<double>(), 0.4, 1e-15);
  EXPECT_EQ(m["buildings"], svc().snapshot().buildings.size());
}

TEST_F(ServiceTest, LayersMatchSnapshot) {
  const ScenarioSnapshot& s = svc().snapshot();
  const json d = get("/layers/demographic");
  EXPECT_TRUE(d["static"].get<bool>());
  const json a = get("/layers/activity", {{"t", "12"}});
  EXPECT_FALSE(a["static"].get<bool>());
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const auto dr = s.demographic->ranks[i];
    if (dr == kNoRank) {
      EXPECT_TRUE(d["ranks"][i].is_null());
    } else {
      EXPECT_EQ(d["ranks"][i], dr);
    }
    const auto ar = s.activity[12].ranks[i];
    if (ar == kNoRank) {
      EXPECT_TRUE(a["ranks"][i].is_null());
    } else {
      EXPECT_EQ(a["ranks"][i], ar);
    }
  }
  get("/layers/activity", {}, 400);
  get("/layers/weather", {}, 404);
}

TEST_F(ServiceTest, UnitWeightReturnsDemographicRanks) {
  const json v = get("/vri", {{"t", "30"}, {"qd", "1"}});
  const auto& ranks = svc().snapshot().demographic->ranks;
  const auto& env = svc().snapshot().building_env->ranks;
  const auto& act = svc().snapshot().activity[30].ranks;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] == kNoRank || env[i] == kNoRank || act[i] == kNoRank) {
      EXPECT_TRUE(v["values"][i].is_null());
    } else {
      EXPECT_EQ(v["values"][i].get<double>(), ranks[i]);
    }
  }
}

TEST_F(ServiceTest, RawWeightsAreNormalized) {
  const HttpResponse a = svc().handle("/vri", {{"t", "5"}, {"qd", "2"}, {"qa", "2"}, {"qb", "1"}});
  const HttpResponse b = svc().handle("/vri", {{"t", "5"}, {"qd", "4"}, {"qa", "4"}, {"qb", "2"}});
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(a.body, b.body);
}

TEST_F(ServiceTest, CsvMatchesExportedFrame) {
  const HttpResponse r = svc().handle("/vri", {{"t", "40"}, {"format", "csv"}});
  ASSERT_EQ(r.status, 200);
  std::ifstream in(*dir / artifacts::frame_csv(40), std::ios::binary);
  std::ostringstream file;
  file << in.rdbuf();
  EXPECT_EQ(r.body, file.str());
}

TEST_F(ServiceTest, BuildingsAtStep) {
  const json all = get("/buildings", {{"t", "60"}});
  EXPECT_EQ(all["buildings"].size(), svc().snapshot().buildings.size());
  double total = 0;
  for (const json& b : all["buildings"]) total += b["total"].get<double>();
  EXPECT_NEAR(total, svc().snapshot().occupancy->placed_total(60), 1e-6);
  const json& first = all["buildings"][0];
  ASSERT_FALSE(first["cell"].is_null());
  const json cell = get("/buildings", {{"t", "60"}, {"row", first["cell"]["row"].dump()},
                                       {"col", first["cell"]["col"].dump()}});
  EXPECT_GE(cell["buildings"].size(), 1u);
  EXPECT_LT(cell["buildings"].size(), all["buildings"].size());
  get("/buildings", {{"t", "60"}, {"row", "3"}}, 400);
}

TEST_F(ServiceTest, FramePng) {
  const HttpResponse r = svc().handle("/frames.png", {{"t", "0"}, {"ramp", "greys"}, {"cell_px", "2"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "image/png");
  EXPECT_EQ(r.body.substr(1, 3), "PNG");
  EXPECT_EQ(svc().handle("/frames.png", {{"t", "0"}, {"ramp", "rainbow"}}).status, 400);
}

TEST_F(ServiceTest, ErrorStatuses) {
  EXPECT_EQ(get("/vri", {}, 400)["error"]["code"], "invalid_argument");
  get("/vri", {{"t", "abc"}}, 400);
  EXPECT_EQ(get("/vri", {{"t", "96"}}, 404)["error"]["code"], "not_found");
  get("/vri", {{"t", "-1"}}, 404);
  get("/vri", {{"t", "1"}, {"qd", "-1"}}, 400);
  get("/vri", {{"t", "1"}, {"qd", "0"}, {"qa", "0"}, {"qb", "0"}}, 400);
  get("/vri", {{"t", "1"}, {"qd", "x"}}, 400);
  get("/nowhere", {}, 404);
}

TEST_F(ServiceTest, RejectsUnassessedSnapshot) {
  EXPECT_THROW(Service(std::make_shared<ScenarioSnapshot>()), Error);
}

TEST_F(ServiceTest, OverHttp) {
  HttpServer server(*service);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  server.start();
  httplib::Client client("127.0.0.1", port);
  auto meta = client.Get("/meta");
  ASSERT_TRUE(meta);
  EXPECT_EQ(meta->status, 200);
  EXPECT_EQ(meta->get_header_value("Access-Control-Allow-Origin"), "*");
  auto missing = client.Get("/vri?t=200");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  const std::string expected = svc().handle("/vri", {{"t", "17"}, {"qa", "1"}}).body;
  std::vector<std::future<std::string>> calls;
  for (int i = 0; i < 8; ++i) {
    calls.push_back(std::async(std::launch::async, [port] {
      httplib::Client c("127.0.0.1", port);
      auto r = c.Get("/vri?t=17&qa=1");
      return r && r->status == 200 ? r->body : std::string();
    }));
  }
  for (auto& f : calls) EXPECT_EQ(f.get(), expected);
  server.stop();
}

}  // namespace
}  // namespace elecvuln
