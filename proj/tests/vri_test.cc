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

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "elecvuln/vri.h"

namespace elecvuln {
namespace {

using AC = ActivityClass;

TEST(Demographic, WeightedSum) {
  const std::vector<ZoneDemographics> z = {
      {"a", 10, {{"share_over_65", 0.5}, {"share_under_5", 0.2}}},
      {"b", 10, {{"share_over_65", 0.0}, {"share_under_5", 1.0}}}};
  const auto s = score_demographic(z, {{"share_over_65", 0.6}, {"share_under_5", 0.4}});
  EXPECT_NEAR(s[0], 0.38, 1e-12);
  EXPECT_NEAR(s[1], 0.4, 1e-12);
}

TEST(Demographic, MissingVariableNamed) {
  const std::vector<ZoneDemographics> z = {{"a", 10, {{"share_over_65", 0.5}}}};
  try {
    score_demographic(z, default_variable_weights());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("share_"), std::string::npos);
  }
}

TEST(Demographic, AgeWeightIsLargest) {
  const auto w = default_variable_weights();
  double sum = 0, age = w.at("share_over_65");
  for (const auto& [k, v] : w) {
    sum += v;
    EXPECT_LE(v, age);
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Activity, CombineAndScore) {
  EXPECT_EQ(combine({5, 5}), 5.0);
  EXPECT_DOUBLE_EQ(combine({1, 5}), std::sqrt(5.0));
  EXPECT_EQ(combine({1, 5}, CombineMode::kArithmetic), 3.0);

  OccupancyField f(2, {"a", "b"}, 100);
  f.count(1, 0, AC::kEssentialHealth) = 10;
  f.count(1, 0, AC::kPersonalPreference) = 10;
  const auto table = ActivityVulnerabilityTable::defaults();
  const auto s0 = score_activity(f, table, 0);
  EXPECT_EQ(s0[0], 0.0);
  EXPECT_EQ(s0[1], 0.0);
  const auto s1 = score_activity(f, table, 1);
  EXPECT_NEAR(s1[0], 10 * 5 + 10 * std::sqrt(5.0), 1e-12);
  EXPECT_THROW(score_activity(f, table, 2), Error);
}

TEST(Activity, SingleClassScalesWithScore) {
  std::array<ActivityVulnerability, kNumClasses> rows;
  for (std::size_t i = 0; i < kNumClasses; ++i) rows[i] = {static_cast<int>(i % 5) + 1, 1};
  const auto table = ActivityVulnerabilityTable::create(rows);
  OccupancyField f(1, {"a"}, 8);
  for (AC c : kAllClasses) {
    f.count(0, 0, c) = 1;
  }
  double expected = 0;
  for (const auto& r : rows) expected += std::sqrt(static_cast<double>(r.criticality));
  EXPECT_NEAR(score_activity(f, table, 0)[0], expected, 1e-12);
}

TEST(Activity, TableValidation) {
  std::array<ActivityVulnerability, kNumClasses> rows;
  rows.fill({3, 3});
  rows[2] = {0, 3};
  EXPECT_THROW(ActivityVulnerabilityTable::create(rows), Error);
  rows[2] = {3, 6};
  EXPECT_THROW(ActivityVulnerabilityTable::create(rows), Error);
}

Building with_env(BuildingEnvironment env) {
  return {"b", BuildingType::kResidential, {}, "z", ResidentialAttrs{1, 0}, env};
}

TEST(Environment, AttributeScores) {
  const std::vector<Building> b = {
      with_env({1940, 100.0, ConstructionClass::kLight, GlazingClass::kSingle,
                EnergyStructure::kAllElectric}),
      with_env({2020, 300.0, ConstructionClass::kHeavy, GlazingClass::kTriple,
                EnergyStructure::kNonElectric}),
      with_env({1980, 200.0, ConstructionClass::kMedium, GlazingClass::kDouble,
                EnergyStructure::kMixed}),
      with_env({})};
  const auto s = score_building_env(b, default_env_weights());
  // Floor area is min-max scaled, so the first building scores 0 on it.
  EXPECT_NEAR(s[0], 0.9, 1e-12);
  EXPECT_NEAR(s[1], 0.1, 1e-12);
  EXPECT_NEAR(s[2], 0.5, 1e-12);
  EXPECT_EQ(s[3], 0.0);
}

TEST(Environment, MissingAttributesRenormalize) {
  BuildingEnvironment electric, glazed;
  electric.energy_structure = EnergyStructure::kAllElectric;
  glazed.glazing = GlazingClass::kDouble;
  const std::vector<Building> b = {with_env(electric), with_env(glazed)};
  const auto s = score_building_env(b, default_env_weights());
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[1], 0.5);
  EXPECT_THROW(score_building_env(b, {{"roof", 1.0}}), Error);
  EXPECT_THROW(score_building_env(b, {{"glazing", -1.0}}), Error);
}

TEST(Quintiles, FiveDistinct) {
  const std::vector<double> v = {50, 10, 40, 20, 30};
  EXPECT_EQ(quintile_ranks(v), (std::vector<std::uint8_t>{5, 1, 4, 2, 3}));
}

TEST(Quintiles, AllEqualShareLowestBucket) {
  const std::vector<double> v(17, 3.0);
  for (auto r : quintile_ranks(v)) EXPECT_EQ(r, 1);
}

TEST(Quintiles, NodataAndAllNan) {
  const std::vector<double> v = {kNoData, 1, 2};
  const auto r = quintile_ranks(v);
  EXPECT_EQ(r[0], kNoRank);
  EXPECT_LT(r[1], r[2]);
  const std::vector<double> nan = {kNoData, kNoData};
  EXPECT_THROW(quintile_ranks(nan), Error);
}

TEST(Quintiles, EqualBucketsForDistinctValues) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 0.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
  std::array<int, 6> counts{};
  for (auto r : quintile_ranks(v)) ++counts[r];
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(counts[k], 200);
}

TEST(Quintiles, MonotoneAndTransformInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng() % 300);
    for (double& x : v) x = std::round(u(rng) * 4) / 4;  // force ties
    const auto r = quintile_ranks(v);
    std::vector<double> cubed = v;
    for (double& x : cubed) x = x * x * x;
    EXPECT_EQ(quintile_ranks(cubed), r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[i] < v[j]) {
          ASSERT_LE(r[i], r[j]);
        }
        if (v[i] == v[j]) {
          ASSERT_EQ(r[i], r[j]);
        }
      }
    }
  }
}

TEST(Quintiles, PooledAcrossSteps) {
  const GridSpec g{0, 0, 1, 1, 5};
  std::vector<RawLayer> layers(2);
  layers[0] = {g, {1, 2, 3, 4, 5}, {}};
  layers[1] = {g, {6, 7, 8, 9, 10}, {}};
  const auto ranked = rank_quintiles_pooled(layers, Aspect::kActivity);
  EXPECT_EQ(ranked[0].ranks, (std::vector<std::uint8_t>{1, 1, 2, 2, 3}));
  EXPECT_EQ(ranked[1].ranks, (std::vector<std::uint8_t>{3, 4, 4, 5, 5}));
  EXPECT_EQ(ranked[1].timestep, 1);
}

AspectLayer layer(Aspect a, std::vector<std::uint8_t> ranks, GridSpec g = {0, 0, 1, 1, 3}) {
  return {g, std::move(ranks), a, a == Aspect::kActivity ? std::optional<int>(0) : std::nullopt};
}

TEST(Compose, ByHand) {
  const std::vector<AspectLayer> l = {layer(Aspect::kDemographic, {1, 5, 3}),
                                      layer(Aspect::kActivity, {2, 5, kNoRank}),
                                      layer(Aspect::kBuildingEnv, {4, 5, 3})};
  const auto m = compose(l, VRIWeights::defaults());
  EXPECT_NEAR(m.values[0], 0.4 * 1 + 0.35 * 2 + 0.25 * 4, 1e-12);
  EXPECT_NEAR(m.values[1], 5.0, 1e-12);
  EXPECT_TRUE(is_nodata(m.values[2]));
}

TEST(Compose, UnitWeightSelectsLayer) {
  const std::vector<AspectLayer> l = {layer(Aspect::kDemographic, {1, 4, 2}),
                                      layer(Aspect::kActivity, {5, 5, 5}),
                                      layer(Aspect::kBuildingEnv, {3, 1, 2})};
  const auto m = compose(l, VRIWeights::create({1, 0, 0}));
  EXPECT_EQ(m.values, (std::vector<double>{1, 4, 2}));
}

TEST(Compose, RangeAndConstantInput) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint8_t> a(3), b(3), c(3);
    for (std::size_t i = 0; i < 3; ++i) {
      a[i] = 1 + rng() % 5;
      b[i] = 1 + rng() % 5;
      c[i] = 1 + rng() % 5;
    }
    const auto w = VRIWeights::from_raw(rng() % 10 + 1, rng() % 10, rng() % 10);
    const std::vector<AspectLayer> l = {layer(Aspect::kDemographic, a),
                                        layer(Aspect::kActivity, b),
                                        layer(Aspect::kBuildingEnv, c)};
    for (double v : compose(l, w).values) {
      ASSERT_GE(v, 1.0 - 1e-12);
      ASSERT_LE(v, 5.0 + 1e-12);
    }
    const std::uint8_t k = 1 + rng() % 5;
    const std::vector<AspectLayer> flat = {layer(Aspect::kDemographic, {k, k, k}),
                                           layer(Aspect::kActivity, {k, k, k}),
                                           layer(Aspect::kBuildingEnv, {k, k, k})};
    for (double v : compose(flat, w).values) ASSERT_NEAR(v, k, 1e-12);
  }
}

TEST(Compose, RejectsMismatch) {
  const std::vector<AspectLayer> wrong_grid = {
      layer(Aspect::kDemographic, {1, 1, 1}), layer(Aspect::kActivity, {1, 1, 1}),
      layer(Aspect::kBuildingEnv, {1, 1, 1, 1}, {0, 0, 1, 2, 2})};
  EXPECT_THROW(compose(wrong_grid, VRIWeights::defaults()), Error);
  const std::vector<AspectLayer> duplicate = {layer(Aspect::kDemographic, {1, 1, 1}),
                                              layer(Aspect::kDemographic, {1, 1, 1}),
                                              layer(Aspect::kBuildingEnv, {1, 1, 1})};
  EXPECT_THROW(compose(duplicate, VRIWeights::defaults()), Error);
}

TEST(Weights, Validation) {
  EXPECT_THROW(VRIWeights::create({0.5, 0.5, 0.5}), Error);
  EXPECT_THROW(VRIWeights::create({1.5, -0.5, 0}), Error);
  EXPECT_THROW(VRIWeights::from_raw(0, 0, 0), Error);
  EXPECT_THROW(VRIWeights::from_raw(-1, 1, 1), Error);
  EXPECT_THROW(VRIWeights::from_raw(std::nan(""), 1, 1), Error);
  EXPECT_EQ(VRIWeights::from_raw(2, 2, 1), VRIWeights::from_raw(4, 4, 2));
  EXPECT_NEAR(VRIWeights::from_raw(2, 2, 1).demographic(), 0.4, 1e-15);
}

}  // namespace
}  // namespace elecvuln
