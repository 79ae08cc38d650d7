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

#include "elecvuln/common.h"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace elecvuln {
namespace {

constexpr std::array<std::string_view, kNumClasses> kLabels = {
    "c01", "c02", "c03", "c04", "c05", "c06", "c07", "c08"};

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "essential_health",     "biological_needs",     "working",
    "education",            "household_management", "personal_obligations",
    "personal_preference",  "others"};

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kParse:
      return "parse_error";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kFailedPrecondition:
      return "failed_precondition";
    case ErrorCode::kIo:
      return "io_error";
  }
  return "unknown";
}

ActivityClass class_at(std::size_t index) {
  if (index >= kNumClasses) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("activity class index {} out of range", index));
  }
  return static_cast<ActivityClass>(index);
}

std::string_view class_label(ActivityClass c) { return kLabels[index_of(c)]; }

std::string_view class_name(ActivityClass c) { return kNames[index_of(c)]; }

std::optional<ActivityClass> parse_class_label(std::string_view label) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kLabels[i] == label) return static_cast<ActivityClass>(i);
  }
  return std::nullopt;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  return fmt::format("{}", value);
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace elecvuln
