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

// Generates the bundled synthetic county: a 2 km square of about 500
// buildings, 16 census-style zones, ATUS-coded diaries and a few GPS traces.
// Output is a pure function of --seed.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/common.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kX0 = 500000.0;
constexpr double kY0 = 4100000.0;
constexpr double kExtent = 2000.0;
constexpr int kZoneSide = 4;  // 4 x 4 zones of 500 m

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 64>(gen_);
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(std::floor(uniform(0, 1) * (hi - lo + 1)));
  }
  bool chance(double p) { return uniform(0, 1) < p; }
  double normal(double mean, double sd) {
    // Box-Muller, one value per call.
    const double u1 = std::max(uniform(0, 1), 1e-12);
    const double u2 = uniform(0, 1);
    return mean + sd * std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
  }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

 private:
  std::mt19937_64 gen_;
};

std::string zone_of(double x, double y) {
  const int col = std::min(kZoneSide - 1, static_cast<int>((x - kX0) / 500.0));
  const int row = std::min(kZoneSide - 1, static_cast<int>((y - kY0) / 500.0));
  return fmt::format("Z{:02}", row * kZoneSide + col + 1);
}

json square(double cx, double cy, double half) {
  return {{"type", "Polygon"},
          {"coordinates",
           {{{cx - half, cy - half},
             {cx + half, cy - half},
             {cx + half, cy + half},
             {cx - half, cy + half},
             {cx - half, cy - half}}}}};
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// ---- zones and demographics ------------------------------------------------

void write_zones(const fs::path& dir) {
  json features = json::array();
  for (int r = 0; r < kZoneSide; ++r) {
    for (int c = 0; c < kZoneSide; ++c) {
      const double x = kX0 + c * 500.0, y = kY0 + r * 500.0;
      features.push_back(
          {{"type", "Feature"},
           {"properties", {{"zone_id", fmt::format("Z{:02}", r * kZoneSide + c + 1)}}},
           {"geometry",
            {{"type", "Polygon"},
             {"coordinates",
              {{{x, y}, {x + 500, y}, {x + 500, y + 500}, {x, y + 500}, {x, y}}}}}}});
    }
  }
  std::ofstream(dir / "zones.geojson") << json{{"type", "FeatureCollection"},
                                               {"features", features}}
                                              .dump(1)
                                       << "\n";
}

void write_demographics(const fs::path& dir, Rng& rng) {
  std::ofstream out(dir / "demographics.csv");
  out << "zone_id,population,share_over_65,share_under_5,share_below_poverty,share_disability,"
         "share_no_vehicle,share_no_high_school,share_school_primary,share_school_middle,"
         "share_school_high,share_school_college\n";
  for (int z = 1; z <= kZoneSide * kZoneSide; ++z) {
    // Older, poorer zones towards the south-west corner.
    const int row = (z - 1) / kZoneSide, col = (z - 1) % kZoneSide;
    const double tilt = 1.0 - (row + col) / 6.0;
    const int population = rng.integer(350, 900);
    auto share = [&](double base, double spread) {
      return round_to(std::clamp(base + spread * tilt + rng.uniform(-0.03, 0.03), 0.0, 1.0),
                      0.001);
    };
    out << fmt::format("Z{:02},{},{},{},{},{},{},{},{},{},{},{}\n", z, population,
                       share(0.10, 0.15), share(0.05, 0.02), share(0.08, 0.15),
                       share(0.09, 0.08), share(0.04, 0.10), share(0.08, 0.10),
                       share(0.08, 0.01), share(0.04, 0.01), share(0.05, 0.0),
                       share(0.04, -0.02));
  }
}

// ---- buildings -------------------------------------------------------------

struct Site {
  std::string id;
  std::string type;
  double x, y;
};

std::vector<Site> write_buildings(const fs::path& dir, Rng& rng) {
  json features = json::array();
  std::vector<Site> sites;
  const double cx = kX0 + 1150, cy = kY0 + 1050;  // downtown
  auto place = [&](bool central) {
    if (central) {
      return std::pair{std::clamp(rng.normal(cx, 260), kX0 + 5, kX0 + kExtent - 5),
                       std::clamp(rng.normal(cy, 260), kY0 + 5, kY0 + kExtent - 5)};
    }
    return std::pair{rng.uniform(kX0 + 5, kX0 + kExtent - 5),
                     rng.uniform(kY0 + 5, kY0 + kExtent - 5)};
  };
  const std::vector<std::pair<std::string, int>> counts = {
      {"residential", 350}, {"business", 62},  {"mercantile", 34},
      {"public_service", 16}, {"assembly", 22}, {"education", 12}};
  const std::vector<std::string> levels = {"primary", "primary", "primary", "primary", "primary",
                                           "middle",  "middle",  "middle",  "high",    "high",
                                           "college", "college"};
  int n = 0;
  for (const auto& [type, count] : counts) {
    for (int i = 0; i < count; ++i) {
      const auto [x, y] = place(type != "residential");
      const std::string id = fmt::format("B{:04}", ++n);
      json props = {{"building_id", id}, {"type", type}, {"zone_id", zone_of(x, y)}};
      double area = 0;
      if (type == "residential") {
        props["bedrooms"] = rng.integer(1, 5);
        props["vacancy_rate"] = round_to(rng.uniform(0.0, 0.2), 0.01);
        area = round_to(rng.uniform(70, 260), 1);
      } else if (type == "business") {
        area = round_to(rng.uniform(300, 4000), 10);
        props["gross_floor_area"] = area;
        props["worker_density"] = round_to(rng.uniform(0.02, 0.07), 0.001);
      } else {
        const std::map<std::string, std::pair<int, int>> caps = {
            {"mercantile", {60, 400}}, {"public_service", {40, 220}},
            {"assembly", {120, 600}},  {"education", {250, 1200}}};
        props["capacity"] = rng.integer(caps.at(type).first, caps.at(type).second);
        area = round_to(rng.uniform(400, 6000), 10);
        if (type == "education") props["school_level"] = levels[static_cast<std::size_t>(i)];
      }
      // Environment attributes, each missing now and then like real assessor data.
      if (!rng.chance(0.05)) props["year_built"] = rng.integer(1935, 2022);
      if (!rng.chance(0.05)) props["floor_area_m2"] = area;
      const std::vector<std::string> construction = {"light", "medium", "heavy"};
      const std::vector<std::string> glazing = {"single", "double", "triple"};
      const std::vector<std::string> energy = {"all_electric", "mixed", "non_electric"};
      if (!rng.chance(0.08)) props["construction"] = rng.pick(construction);
      if (!rng.chance(0.08)) props["glazing"] = rng.pick(glazing);
      if (!rng.chance(0.08)) props["energy_structure"] = rng.pick(energy);
      const double half = std::sqrt(area) / 2;
      features.push_back({{"type", "Feature"},
                          {"properties", props},
                          {"geometry", square(round_to(x, 0.1), round_to(y, 0.1), half)}});
      sites.push_back({id, type, x, y});
    }
  }
  std::ofstream(dir / "buildings.geojson") << json{{"type", "FeatureCollection"},
                                                   {"features", features}}
                                                  .dump()
                                           << "\n";
  return sites;
}

// ---- diaries ---------------------------------------------------------------

struct Day {
  std::vector<std::pair<int, std::string>> entries;  // (duration, code)
  int used = 0;
  void add(int minutes, std::string code) {
    minutes = std::min(minutes, elecvuln::kMinutesPerDay - used);
    if (minutes <= 0) return;
    entries.emplace_back(minutes, std::move(code));
    used += minutes;
  }
  void until(int minute, std::string code) { add(minute - used, std::move(code)); }
};

Day make_day(const std::string& role, Rng& rng) {
  Day d;
  // Some respondents are still up after midnight.
  if (rng.chance(0.06)) d.add(rng.integer(15, 75), "120303");
  if (role == "night_worker") {
    d.until(rng.integer(360, 390), "050101");
    d.add(rng.integer(20, 40), "180501");
    d.add(rng.integer(360, 450), "010101");
    d.add(30, "110101");
    d.add(rng.integer(60, 150), "020101");
    d.add(rng.integer(60, 120), "070101");
    d.add(rng.integer(90, 180), "120303");
    d.add(30, "110101");
    d.until(rng.integer(1290, 1320), "120101");
    d.add(20, "180501");
    d.until(1440, "050101");
    return d;
  }
  const int wake = rng.integer(330, 480);
  d.until(wake, "010101");
  d.add(rng.integer(20, 50), "010201");
  d.add(rng.integer(15, 30), "110101");
  if (role == "worker") {
    d.add(rng.integer(15, 45), "180501");
    d.until(rng.integer(700, 740), "050101");
    d.add(rng.integer(30, 60), "110101");
    d.until(rng.integer(1000, 1080), "050101");
    d.add(rng.integer(15, 45), "180501");
    if (rng.chance(0.3)) d.add(rng.integer(20, 60), "070101");
    if (rng.chance(0.05)) d.add(rng.integer(30, 90), "080401");
  } else if (role == "student") {
    d.add(rng.integer(10, 30), "180601");
    d.until(rng.integer(720, 750), "060101");
    d.add(rng.integer(30, 45), "110101");
    d.until(rng.integer(900, 960), "060101");
    d.add(rng.integer(10, 30), "180601");
    d.add(rng.integer(60, 120), "060301");
    d.add(rng.integer(30, 90), "130101");
  } else if (role == "retiree") {
    d.add(rng.integer(60, 120), "020101");
    if (rng.chance(0.15)) d.add(rng.integer(45, 120), "080401");
    if (rng.chance(0.1)) d.add(rng.integer(20, 60), "010301");
    d.add(rng.integer(45, 120), "070101");
    d.add(rng.integer(30, 60), "110101");
    d.add(rng.integer(60, 180), "120101");
    d.add(rng.integer(60, 120), "020201");
  } else {  // homemaker
    d.add(rng.integer(90, 180), "020101");
    d.add(rng.integer(60, 150), "030101");
    d.add(rng.integer(30, 60), "110101");
    d.add(rng.integer(45, 120), "070101");
    d.add(rng.integer(60, 120), "030101");
    d.add(rng.integer(30, 90), "140101");
  }
  d.add(rng.integer(45, 90), "020101");
  d.add(rng.integer(20, 40), "110101");
  const int bedtime = rng.integer(1290, 1435);
  d.until(bedtime, "120303");
  d.until(1440, "010101");
  return d;
}

void write_diaries(const fs::path& dir, Rng& rng, int people) {
  std::ofstream out(dir / "diaries.csv");
  out << "person_id,weight,start_min,duration_min,code,attr:role\n";
  for (int p = 1; p <= people; ++p) {
    const double u = rng.uniform(0, 1);
    const std::string role = u < 0.42   ? "worker"
                             : u < 0.47 ? "night_worker"
                             : u < 0.65 ? "student"
                             : u < 0.85 ? "retiree"
                                        : "homemaker";
    const double weight = round_to(rng.uniform(0.5, 2.0), 0.01);
    const Day d = make_day(role, rng);
    int start = 0;
    for (const auto& [duration, code] : d.entries) {
      out << fmt::format("P{:05},{},{},{},{},{}\n", p, weight, start, duration, code, role);
      start += duration;
    }
  }
}

// ---- GPS -------------------------------------------------------------------

void write_gps(const fs::path& dir, Rng& rng, const std::vector<Site>& sites, int people) {
  std::vector<Site> homes, jobs;
  for (const Site& s : sites) {
    if (s.type == "residential") homes.push_back(s);
    if (s.type == "business" || s.type == "education") jobs.push_back(s);
  }
  std::ofstream out(dir / "gps.csv");
  out << "person_id,t_min,x,y\n";
  for (int p = 1; p <= people; ++p) {
    const Site& home = rng.pick(homes);
    const Site& job = rng.pick(jobs);
    const int leave = rng.integer(450, 510), back = rng.integer(1000, 1100);
    for (int t = rng.integer(0, 20); t < 1440; t += rng.integer(20, 40)) {
      const Site& at = (t >= leave && t < back) ? job : home;
      out << fmt::format("G{:03},{},{:.1f},{:.1f}\n", p, t, at.x + rng.normal(0, 12),
                         at.y + rng.normal(0, 12));
    }
  }
}

void write_config(const fs::path& dir) {
  json cfg = {
      {"version", 1},
      {"inputs",
       {{"diaries", "diaries.csv"},
        {"buildings", "buildings.geojson"},
        {"demographics", "demographics.csv"},
        {"zones", "zones.geojson"},
        {"gps", "gps.csv"}}},
      {"grid", {{"x0", kX0}, {"y0", kY0}, {"cell_size", 100}, {"rows", 20}, {"cols", 20}}},
      {"weights", {{"demographic", 0.4}, {"activity", 0.35}, {"building_env", 0.25}}},
      {"model", {{"smoothing", 0}}},
      {"simulate", {{"seed", 42}, {"samples", 10000}, {"trajectory", "propagate"}}},
      {"mapping", {{"snap_radius", 100}}},
      {"render", {{"ramp", "reds"}, {"cell_px", 8}}}};
  std::ofstream(dir / "config.json") << cfg.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Writes the bundled synthetic county"};
  std::string out = "data/synthetic_county";
  std::uint64_t seed = 20240611;
  int diaries = 2000;
  app.add_option("--out", out)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--diaries", diaries)->capture_default_str()->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(out);
  fs::create_directories(dir);
  Rng rng(seed);
  write_zones(dir);
  write_demographics(dir, rng);
  const auto sites = write_buildings(dir, rng);
  write_diaries(dir, rng, diaries);
  write_gps(dir, rng, sites, 40);
  write_config(dir);
  std::cout << fmt::format("wrote {} buildings and {} diaries to {}\n", sites.size(), diaries,
                           dir.string());
  return 0;
}
