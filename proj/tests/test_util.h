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

#ifndef ELECVULN_TESTS_TEST_UTIL_H_
#define ELECVULN_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "elecvuln/activity_model.h"
#include "elecvuln/common.h"

namespace elecvuln::testing {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  double sum = 0;
  for (double& x : v) sum += (x = e(rng));
  for (double& x : v) x /= sum;
  return v;
}

// Rows are a mix of uniform and a random simplex, so every state stays
// reachable and no row is degenerate.
inline MarkovActivityModel random_model(std::mt19937_64& rng, std::size_t k = kNumClasses,
                                        double uniform_mix = 0.0) {
  auto mix = [&](std::vector<double> v) {
    for (double& x : v) x = uniform_mix / k + (1 - uniform_mix) * x;
    return v;
  };
  std::vector<Matrix> xi;
  for (int t = 0; t + 1 < kStepsPerDay; ++t) {
    Matrix m(k, k);
    for (std::size_t p = 0; p < k; ++p) {
      auto row = mix(random_simplex(rng, k));
      for (std::size_t q = 0; q < k; ++q) m(p, q) = row[q];
    }
    xi.push_back(std::move(m));
  }
  return MarkovActivityModel::create(mix(random_simplex(rng, k)), std::move(xi));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             fmt::format("elecvuln_{}_{}", name, std::random_device{}());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace elecvuln::testing

#endif  // ELECVULN_TESTS_TEST_UTIL_H_
