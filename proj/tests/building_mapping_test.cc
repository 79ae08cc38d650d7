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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "elecvuln/building_mapping.h"
#include "test_util.h"

namespace elecvuln {
namespace {

using AC = ActivityClass;
using BT = BuildingType;
constexpr double kInf = std::numeric_limits<double>::infinity();

Building residential(std::string id, int bedrooms, double vacancy = 0.0, Point2 at = {}) {
  return {std::move(id), BT::kResidential, at, "z", ResidentialAttrs{bedrooms, vacancy}, {}};
}
Building business(std::string id, double area, double density, Point2 at = {}) {
  return {std::move(id), BT::kBusiness, at, "z", BusinessAttrs{area, density}, {}};
}
Building capped(std::string id, BT type, double capacity, Point2 at = {}) {
  return {std::move(id), type, at, "z", CapacityAttrs{capacity}, {}};
}
Building school(std::string id, double capacity, SchoolLevel level) {
  return {std::move(id), BT::kEducation, {}, "z", EducationAttrs{capacity, level}, {}};
}

TrajectoryMatrix one_hot(AC c, std::size_t steps = 96) {
  Matrix m(steps, 8);
  for (std::size_t t = 0; t < steps; ++t) m(t, index_of(c)) = 1.0;
  return TrajectoryMatrix::create(std::move(m));
}

ActivityPlacementTable single(AC c, BT type) {
  ActivityPlacementTable::Rows rows;
  rows[index_of(c)] = {{type, 1.0}};
  return ActivityPlacementTable::create(rows);
}

// ---- allocation_weight ------------------------------------------------------

TEST(AllocationWeight, PerType) {
  EXPECT_EQ(allocation_weight(residential("a", 3, 0.0)), 3.0);
  EXPECT_EQ(allocation_weight(residential("a", 3, 1.0)), 0.0);
  EXPECT_DOUBLE_EQ(allocation_weight(residential("a", 4, 0.25)), 3.0);
  EXPECT_DOUBLE_EQ(allocation_weight(business("b", 2000, 0.05)), 100.0);
  EXPECT_EQ(allocation_weight(capped("m", BT::kMercantile, 40)), 40.0);
  EXPECT_EQ(allocation_weight(school("s", 300, SchoolLevel::kHigh)), 300.0);
}

// ---- placement table --------------------------------------------------------

TEST(PlacementTable, DefaultsAndValidation) {
  const auto t = ActivityPlacementTable::defaults();
  EXPECT_EQ(t.share(AC::kBiologicalNeeds, BT::kResidential), 1.0);
  EXPECT_EQ(t.share(AC::kPersonalObligations, BT::kMercantile), 0.6);
  EXPECT_EQ(t.share(AC::kPersonalObligations, BT::kPublicService), 0.4);
  EXPECT_EQ(t.share(AC::kPersonalPreference, BT::kAssembly), 0.5);
  EXPECT_EQ(t.share(AC::kEssentialHealth, BT::kPublicService), 1.0);
  EXPECT_TRUE(t.targets(AC::kOthers).empty());

  ActivityPlacementTable::Rows bad;
  bad[0] = {{BT::kResidential, 0.5}};
  EXPECT_THROW(ActivityPlacementTable::create(bad), Error);
  bad[0] = {{BT::kResidential, 1.5}, {BT::kBusiness, -0.5}};
  EXPECT_THROW(ActivityPlacementTable::create(bad), Error);
}

// ---- water_fill -------------------------------------------------------------

TEST(WaterFill, TwoBuildingCapByHand) {
  // Equal split first: 30/30; the first caps at 10, the second takes 50.
  double residual = -1;
  const std::vector<double> w = {1, 1}, caps = {10, 100};
  const auto a = water_fill(w, caps, 60, &residual);
  EXPECT_DOUBLE_EQ(a[0], 10);
  EXPECT_DOUBLE_EQ(a[1], 50);
  EXPECT_EQ(residual, 0.0);
}

TEST(WaterFill, CascadingCaps) {
  // Weights 1:2:3:4 over 100. Hand: caps 5 and 12 bind in turn.
  //   round 1: 10,20,30,40 -> #0 (cap 5) binds; 95 left over weights 2:3:4
  //   round 2: 21.1,31.7,42.2 -> #1 (cap 12) binds; 83 left over 3:4
  //   round 3: 35.571..., 47.428...
  double residual = 0;
  const std::vector<double> w = {1, 2, 3, 4}, caps = {5, 12, kInf, kInf};
  const auto a = water_fill(w, caps, 100, &residual);
  EXPECT_DOUBLE_EQ(a[0], 5);
  EXPECT_DOUBLE_EQ(a[1], 12);
  EXPECT_NEAR(a[2], 83.0 * 3 / 7, 1e-12);
  EXPECT_NEAR(a[3], 83.0 * 4 / 7, 1e-12);
}

TEST(WaterFill, ResidualWhenEverythingCaps) {
  double residual = 0;
  const std::vector<double> w = {1, 1, 0}, caps = {3, 4, 100};
  const auto a = water_fill(w, caps, 20, &residual);
  EXPECT_EQ(a[0], 3);
  EXPECT_EQ(a[1], 4);
  EXPECT_EQ(a[2], 0);  // zero weight receives nothing
  EXPECT_DOUBLE_EQ(residual, 13);
}

TEST(WaterFill, RandomConservationAndCaps) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> w(n), caps(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = u(rng) < 0.1 ? 0.0 : u(rng) * 10;
      caps[i] = u(rng) < 0.2 ? kInf : u(rng) * 50;
    }
    const double mass = u(rng) * 300;
    double residual = 0;
    const auto a = water_fill(w, caps, mass, &residual);
    double placed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_LE(a[i], caps[i] + 1e-9);
      ASSERT_GE(a[i], 0.0);
      placed += a[i];
    }
    ASSERT_NEAR(placed + residual, mass, 1e-9 * std::max(1.0, mass));
    // Residual only when every weighted candidate is full.
    if (residual > 1e-9) {
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0) {
          ASSERT_NEAR(a[i], caps[i], 1e-9);
        }
      }
    }
  }
}

// ---- allocate -----------------------------------------------------------------

TEST(Allocate, SingleSink) {
  const std::vector<Building> b = {residential("r", 2)};
  const auto f = allocate(one_hot(AC::kBiologicalNeeds), 100, b,
                          single(AC::kBiologicalNeeds, BT::kResidential), {});
  for (std::size_t t = 0; t < 96; ++t) {
    EXPECT_DOUBLE_EQ(f.count(t, 0, AC::kBiologicalNeeds), 100);
    EXPECT_DOUBLE_EQ(f.building_total(t, 0), 100);
  }
}

TEST(Allocate, ProportionalResidentialSplit) {
  const std::vector<Building> b = {residential("a", 3), residential("b", 1)};
  const auto f = allocate(one_hot(AC::kBiologicalNeeds), 100, b,
                          ActivityPlacementTable::defaults(), {});
  EXPECT_DOUBLE_EQ(f.count(0, 0, AC::kBiologicalNeeds), 75);
  EXPECT_DOUBLE_EQ(f.count(0, 1, AC::kBiologicalNeeds), 25);
}

TEST(Allocate, AssemblyCapOracle) {
  const std::vector<Building> b = {capped("a", BT::kAssembly, 10), capped("b", BT::kAssembly, 100)};
  const auto f = allocate(one_hot(AC::kPersonalPreference), 60, b,
                          single(AC::kPersonalPreference, BT::kAssembly), {});
  EXPECT_DOUBLE_EQ(f.building_total(5, 0), 10);
  EXPECT_DOUBLE_EQ(f.building_total(5, 1), 50);
  EXPECT_EQ(f.unplaced_total(5), 0.0);
}

TEST(Allocate, CapacityProportionalOption) {
  const std::vector<Building> b = {capped("a", BT::kAssembly, 10), capped("b", BT::kAssembly, 100)};
  const auto f = allocate(one_hot(AC::kPersonalPreference), 55, b,
                          single(AC::kPersonalPreference, BT::kAssembly), {},
                          {CappedSplit::kByCapacity});
  EXPECT_DOUBLE_EQ(f.building_total(0, 0), 5);
  EXPECT_DOUBLE_EQ(f.building_total(0, 1), 50);
}

TEST(Allocate, OverflowIsReported) {
  const std::vector<Building> b = {capped("a", BT::kAssembly, 10)};
  const auto f = allocate(one_hot(AC::kPersonalPreference), 25, b,
                          single(AC::kPersonalPreference, BT::kAssembly), {});
  EXPECT_DOUBLE_EQ(f.building_total(0, 0), 10);
  EXPECT_DOUBLE_EQ(f.overflow(0, AC::kPersonalPreference), 15);
  EXPECT_DOUBLE_EQ(f.placed_total(0) + f.unplaced_total(0), 25);
}

TEST(Allocate, UnhostedClassIsUntracked) {
  const std::vector<Building> b = {residential("a", 1)};
  const auto f = allocate(one_hot(AC::kOthers), 40, b, ActivityPlacementTable::defaults(), {});
  EXPECT_EQ(f.placed_total(0), 0.0);
  EXPECT_DOUBLE_EQ(f.untracked(0, AC::kOthers), 40);
}

TEST(Allocate, MissingTypeNamesClassAndType) {
  const std::vector<Building> b = {residential("a", 1)};
  try {
    allocate(one_hot(AC::kWorking), 10, b, ActivityPlacementTable::defaults(), {});
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_EQ(e.code(), ErrorCode::kFailedPrecondition);
    EXPECT_NE(msg.find("c03"), std::string::npos) << msg;
    EXPECT_NE(msg.find("business"), std::string::npos) << msg;
  }
}

TEST(Allocate, EducationSplitsBySchoolLevel) {
  const std::vector<Building> b = {school("p1", 1000, SchoolLevel::kPrimary),
                                   school("p2", 1000, SchoolLevel::kPrimary),
                                   school("h", 1000, SchoolLevel::kHigh)};
  // Community shares: primary (100*0.2 + 300*0.1) = 50, high (100*0.1 + 300*0.05) = 25.
  // The middle level has no building and is dropped before renormalizing.
  const std::vector<ZoneDemographics> demo = {
      {"z1", 100, {{"share_school_primary", 0.2}, {"share_school_high", 0.1},
                   {"share_school_middle", 0.3}}},
      {"z2", 300, {{"share_school_primary", 0.1}, {"share_school_high", 0.05}}}};
  const auto f = allocate(one_hot(AC::kEducation), 90, b, ActivityPlacementTable::defaults(), demo);
  EXPECT_NEAR(f.building_total(0, 0), 30, 1e-12);
  EXPECT_NEAR(f.building_total(0, 1), 30, 1e-12);
  EXPECT_NEAR(f.building_total(0, 2), 30, 1e-12);
  // Without any demographic signal the schools form one pool.
  const auto g = allocate(one_hot(AC::kEducation), 90, b, ActivityPlacementTable::defaults(), {});
  EXPECT_NEAR(g.building_total(0, 2), 30, 1e-12);
}

TEST(Allocate, EducationLevelWeightsByHand) {
  const std::vector<Building> b = {school("p", 1000, SchoolLevel::kPrimary),
                                   school("c", 1000, SchoolLevel::kCollege)};
  const std::vector<ZoneDemographics> demo = {
      {"z", 200, {{"share_school_primary", 0.3}, {"share_school_college", 0.1}}}};
  const auto f = allocate(one_hot(AC::kEducation), 80, b, ActivityPlacementTable::defaults(), demo);
  EXPECT_NEAR(f.building_total(0, 0), 60, 1e-12);  // 3/4 of the mass
  EXPECT_NEAR(f.building_total(0, 1), 20, 1e-12);
}

std::vector<Building> random_inventory(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Building> b;
  int n = 0;
  auto id = [&] { return fmt::format("b{:03}", n++); };
  const int res = 1 + static_cast<int>(rng() % 10);
  for (int i = 0; i < res; ++i) b.push_back(residential(id(), 1 + static_cast<int>(rng() % 5), u(rng) * 0.5));
  const int bus = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < bus; ++i) b.push_back(business(id(), 100 + u(rng) * 2000, 0.01 + u(rng) * 0.05));
  for (BT t : {BT::kMercantile, BT::kPublicService, BT::kAssembly}) {
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < k; ++i) b.push_back(capped(id(), t, 1 + u(rng) * 80));
  }
  const int schools = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < schools; ++i) {
    b.push_back(school(id(), 1 + u(rng) * 200, static_cast<SchoolLevel>(rng() % 4)));
  }
  std::shuffle(b.begin(), b.end(), rng);
  return b;
}

TrajectoryMatrix random_trajectory(std::mt19937_64& rng) {
  Matrix m(96, 8);
  for (std::size_t t = 0; t < 96; ++t) {
    auto row = testing::random_simplex(rng, 8);
    for (std::size_t k = 0; k < 8; ++k) m(t, k) = row[k];
  }
  return TrajectoryMatrix::create(std::move(m));
}

TEST(Allocate, ConservationAndCapsOnRandomInventories) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = random_inventory(rng);
    const auto traj = random_trajectory(rng);
    const double n = 100 + (rng() % 5000);
    const std::vector<ZoneDemographics> demo = {
        {"z", 1000, {{"share_school_primary", 0.1}, {"share_school_middle", 0.05},
                     {"share_school_high", 0.05}, {"share_school_college", 0.02}}}};
    const auto f = allocate(traj, n, b, ActivityPlacementTable::defaults(), demo);
    for (std::size_t t = 0; t < 96; ++t) {
      ASSERT_NEAR(f.placed_total(t) + f.unplaced_total(t), n, 1e-6);
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (auto cap = b[i].capacity()) {
          ASSERT_LE(f.building_total(t, i), *cap + 1e-9);
        }
      }
    }
  }
}

TEST(Allocate, ScaleEquivarianceWithoutCaps) {
  std::mt19937_64 rng(32);
  std::vector<Building> b;
  for (int i = 0; i < 6; ++i) b.push_back(residential(fmt::format("r{}", i), 1 + i % 3));
  for (int i = 0; i < 4; ++i) b.push_back(business(fmt::format("w{}", i), 500 + 100 * i, 0.03));
  ActivityPlacementTable::Rows rows;
  rows[index_of(AC::kBiologicalNeeds)] = {{BT::kResidential, 1.0}};
  rows[index_of(AC::kWorking)] = {{BT::kBusiness, 1.0}};
  const auto table = ActivityPlacementTable::create(rows);
  const auto traj = random_trajectory(rng);
  const auto f1 = allocate(traj, 1000, b, table, {});
  const auto f2 = allocate(traj, 2000, b, table, {});
  for (std::size_t t = 0; t < 96; ++t) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (AC c : kAllClasses) EXPECT_DOUBLE_EQ(f2.count(t, i, c), 2 * f1.count(t, i, c));
    }
  }
}

TEST(Allocate, PermutationInvariance) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto b = random_inventory(rng);
    const auto traj = random_trajectory(rng);
    const auto f1 = allocate(traj, 3000, b, ActivityPlacementTable::defaults(), {});
    auto shuffled = b;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto f2 = allocate(traj, 3000, shuffled, ActivityPlacementTable::defaults(), {});
    for (std::size_t j = 0; j < shuffled.size(); ++j) {
      const std::size_t i = static_cast<std::size_t>(
          std::find(f1.building_ids().begin(), f1.building_ids().end(), shuffled[j].id) -
          f1.building_ids().begin());
      for (std::size_t t = 0; t < 96; t += 7) {
        for (AC c : kAllClasses) ASSERT_NEAR(f1.count(t, i, c), f2.count(t, j, c), 1e-9);
      }
    }
  }
}

TEST(Allocate, MonotoneInOwnWeight) {
  std::vector<Building> b = {residential("a", 2), residential("b", 3), residential("c", 1)};
  const auto traj = one_hot(AC::kBiologicalNeeds, 1);
  double last = 0;
  for (int bedrooms = 0; bedrooms <= 8; ++bedrooms) {
    b[0] = residential("a", bedrooms);
    const auto f = allocate(traj, 100, b, ActivityPlacementTable::defaults(), {});
    EXPECT_GE(f.building_total(0, 0), last);
    last = f.building_total(0, 0);
  }
}

// ---- GPS join ---------------------------------------------------------------

TrajectoryMatrix day_night() {
  // c02 dominant at night, c03 during 09:00-17:00.
  Matrix m(96, 8);
  for (std::size_t t = 0; t < 96; ++t) {
    const bool work = t >= 36 && t < 68;
    m(t, index_of(AC::kBiologicalNeeds)) = work ? 0.2 : 0.7;
    m(t, index_of(AC::kWorking)) = work ? 0.5 : 0.1;
    m(t, index_of(AC::kOthers)) = work ? 0.3 : 0.2;
  }
  return TrajectoryMatrix::create(std::move(m));
}

TEST(JoinGps, StationaryAtHome) {
  const std::vector<Building> b = {residential("home", 2, 0, {0, 0}), business("w", 100, 0.1, {500, 0})};
  const std::vector<TimeLocationPath> p = {{"x", {{0, {3, 4}}, {900, {0, 1}}}}};
  const auto a = join_gps(p, day_night(), b, ActivityPlacementTable::defaults());
  ASSERT_EQ(a.size(), 1u);
  for (const StepAssignment& s : a[0].steps) {
    EXPECT_EQ(s.building_id, "home");
    EXPECT_EQ(s.activity, AC::kBiologicalNeeds);  // c05 ties at 0 lose to c02
  }
}

TEST(JoinGps, EquidistantTieGoesToLowerId) {
  const std::vector<Building> b = {residential("b2", 1, 0, {10, 0}), residential("b1", 1, 0, {-10, 0})};
  const std::vector<TimeLocationPath> p = {{"x", {{0, {0, 0}}}}};
  const auto a = join_gps(p, day_night(), b, ActivityPlacementTable::defaults());
  EXPECT_EQ(a[0].steps[10].building_id, "b1");
}

TEST(JoinGps, CrossingAtNoon) {
  const std::vector<Building> b = {residential("r", 2, 0, {0, 0}), business("w", 100, 0.1, {1000, 0})};
  const std::vector<TimeLocationPath> p = {{"x", {{0, {5, 0}}, {720, {995, 3}}, {1000, {996, 0}}}}};
  const auto a = join_gps(p, day_night(), b, ActivityPlacementTable::defaults());
  for (std::size_t t = 0; t < 96; ++t) {
    // Hand table: step midpoint 15t+7.5 is before noon for t < 48.
    const bool morning = 15 * t + 7.5 < 720;
    EXPECT_EQ(a[0].steps[t].building_id, morning ? "r" : "w") << t;
    // A business hosts only c03, so afternoon steps are working.
    if (!morning) {
      EXPECT_EQ(a[0].steps[t].activity, AC::kWorking);
    }
  }
}

TEST(JoinGps, OutsideRadiusIsUnassigned) {
  const std::vector<Building> b = {residential("r", 2, 0, {0, 0})};
  const std::vector<TimeLocationPath> p = {{"x", {{0, {0, 150}}, {600, {0, 50}}}}};
  const auto a = join_gps(p, day_night(), b, ActivityPlacementTable::defaults(), 100.0);
  EXPECT_FALSE(a[0].steps[0].building_id);
  EXPECT_EQ(a[0].steps[0].activity, AC::kBiologicalNeeds);  // row argmax
  EXPECT_EQ(a[0].steps[40].building_id, "r");
}

TEST(JoinGps, FirstFixUsedBeforeAnyFix) {
  const std::vector<Building> b = {residential("r", 2, 0, {0, 0}), business("w", 100, 0.1, {1000, 0})};
  const std::vector<TimeLocationPath> p = {{"x", {{600, {1000, 0}}}}};
  const auto a = join_gps(p, day_night(), b, ActivityPlacementTable::defaults());
  EXPECT_EQ(a[0].steps[0].building_id, "w");
}

// ---- rounding and files -----------------------------------------------------

TEST(Rounding, LargestRemainder) {
  EXPECT_EQ(round_largest_remainder(std::vector{0.5, 0.5, 1.0}), (std::vector<long long>{1, 0, 1}));
  EXPECT_EQ(round_largest_remainder(std::vector{1.2, 2.7, 3.1}), (std::vector<long long>{1, 3, 3}));
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + rng() % 20);
    double total = 0;
    for (double& x : v) total += (x = (rng() % 10000) / 100.0);
    const auto r = round_largest_remainder(v);
    long long sum = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_LE(std::abs(static_cast<double>(r[k]) - v[k]), 1.0);
      sum += r[k];
    }
    EXPECT_EQ(sum, std::llround(total));
  }
}

TEST(OccupancyFiles, RoundTrip) {
  std::mt19937_64 rng(42);
  const auto b = random_inventory(rng);
  const auto f = allocate(random_trajectory(rng), 2500, b, ActivityPlacementTable::defaults(), {});
  std::ostringstream occ, unp;
  write_occupancy_csv(occ, f);
  write_unplaced_csv(unp, f);
  std::istringstream occ_in(occ.str()), unp_in(unp.str());
  EXPECT_EQ(read_occupancy_csv(occ_in, unp_in, b, 2500), f);
}

}  // namespace
}  // namespace elecvuln
