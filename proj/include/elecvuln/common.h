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

#ifndef ELECVULN_COMMON_H_
#define ELECVULN_COMMON_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace elecvuln {

// Machine-readable failure category. The service maps these onto HTTP status
// codes and the CLI onto exit codes.
enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kNotFound,
  kFailedPrecondition,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// The day grid: 96 slots of 15 minutes. Slot t covers [15t, 15(t+1)).
inline constexpr int kStepsPerDay = 96;
inline constexpr int kStepMinutes = 15;
inline constexpr int kMinutesPerDay = 1440;
static_assert(kStepsPerDay * kStepMinutes == kMinutesPerDay);

inline constexpr std::size_t kNumClasses = 8;

// Canonical activity classes in index order c01..c08.
enum class ActivityClass : std::uint8_t {
  kEssentialHealth = 0,
  kBiologicalNeeds = 1,
  kWorking = 2,
  kEducation = 3,
  kHouseholdManagement = 4,
  kPersonalObligations = 5,
  kPersonalPreference = 6,
  kOthers = 7,
};

inline constexpr std::array<ActivityClass, kNumClasses> kAllClasses = {
    ActivityClass::kEssentialHealth,     ActivityClass::kBiologicalNeeds,
    ActivityClass::kWorking,             ActivityClass::kEducation,
    ActivityClass::kHouseholdManagement, ActivityClass::kPersonalObligations,
    ActivityClass::kPersonalPreference,  ActivityClass::kOthers,
};

constexpr std::size_t index_of(ActivityClass c) {
  return static_cast<std::size_t>(c);
}
ActivityClass class_at(std::size_t index);

// "c01".."c08".
std::string_view class_label(ActivityClass c);
// Human-readable name, e.g. "biological_needs".
std::string_view class_name(ActivityClass c);
std::optional<ActivityClass> parse_class_label(std::string_view label);

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict numeric parsing of a whole field; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

}  // namespace elecvuln

#endif  // ELECVULN_COMMON_H_
