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

#ifndef ELECVULN_ACTIVITY_MODEL_H_
#define ELECVULN_ACTIVITY_MODEL_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "elecvuln/common.h"
#include "elecvuln/ingest.h"

namespace elecvuln {

// One state index per time step. For the canonical model the index is the
// ActivityClass index (0..7).
using StateSequence = std::vector<std::uint8_t>;

struct ModelProvenance {
  std::vector<std::string> labels;  // one per state
  std::string inputs_hash;          // sha256 over the fit inputs
  double smoothing = 0.0;
  bool stationary = false;

  bool operator==(const ModelProvenance&) const = default;
};

// First-order, time-indexed Markov chain: an initial distribution over K
// states at step 0 and one KxK row-stochastic matrix per step boundary
// (transition(t) maps step t onto step t+1). Immutable once created.
class MarkovActivityModel {
 public:
  static constexpr double kTolerance = 1e-12;

  // Validates that alpha and every transition row are probability vectors
  // within kTolerance. Throws Error(kInvalidArgument) otherwise.
  static MarkovActivityModel create(std::vector<double> alpha,
                                    std::vector<Matrix> transitions,
                                    ModelProvenance provenance = {});

  std::size_t num_states() const { return alpha_.size(); }
  std::size_t num_steps() const { return transitions_.size() + 1; }

  const std::vector<double>& alpha() const { return alpha_; }
  const Matrix& transition(std::size_t t) const { return transitions_.at(t); }
  const std::vector<Matrix>& transitions() const { return transitions_; }
  const ModelProvenance& provenance() const { return provenance_; }

  bool operator==(const MarkovActivityModel&) const = default;

 private:
  MarkovActivityModel() = default;

  std::vector<double> alpha_;
  std::vector<Matrix> transitions_;
  ModelProvenance provenance_;
};

// T x K matrix whose rows are probability distributions (sum 1 within 1e-9).
class TrajectoryMatrix {
 public:
  static constexpr double kTolerance = 1e-9;

  static TrajectoryMatrix create(Matrix values);

  std::size_t num_steps() const { return values_.rows(); }
  std::size_t num_states() const { return values_.cols(); }
  double operator()(std::size_t t, std::size_t k) const { return values_(t, k); }
  std::span<const double> row(std::size_t t) const { return values_.row(t); }
  const Matrix& values() const { return values_; }

  bool operator==(const TrajectoryMatrix&) const = default;

 private:
  explicit TrajectoryMatrix(Matrix values) : values_(std::move(values)) {}
  Matrix values_;
};

// 96-slot class sequence. Each slot holds the class with the most minutes
// inside it; ties go to the class whose entry starts earliest in the slot.
// Uncovered minutes count towards c08.
StateSequence discretize(const DiaryRecord& record);

// Inverse of discretize for slot-aligned days: one entry per run of equal
// classes, coded with the class label (see ActivityCodeMap::canonical()).
DiaryRecord diary_from_sequence(std::string person_id, double weight,
                                const StateSequence& sequence);

struct FitOptions {
  // Additive (Laplace) pseudo-count per transition cell. Rows with no
  // observed transitions stay self-loops regardless of smoothing.
  double smoothing = 0.0;
  // Pool all step boundaries into a single transition matrix.
  bool stationary = false;
};

// Weighted maximum-likelihood fit over diaries (discretized first). Throws
// Error(kInvalidArgument, "no data") for an empty list or zero total weight.
MarkovActivityModel fit(std::span<const DiaryRecord> diaries, const FitOptions& options = {});

MarkovActivityModel fit_sequences(std::span<const StateSequence> sequences,
                                  std::span<const double> weights, std::size_t num_states,
                                  const FitOptions& options = {});

// Row 0 = alpha, row t+1 = row t * transition(t).
TrajectoryMatrix propagate(const MarkovActivityModel& model);

// Draws n independent sequences. Sequence i uses its own generator derived
// from (seed, i), so the output does not depend on the number of workers.
// workers == 0 picks the hardware concurrency.
std::vector<StateSequence> sample(const MarkovActivityModel& model, std::size_t n,
                                  std::uint64_t seed, unsigned workers = 0);

// Weighted per-step class frequencies. weights may be empty (all 1). Throws
// on an empty input, mismatched lengths or all-zero weights.
TrajectoryMatrix aggregate(std::span<const StateSequence> sequences, std::size_t num_states,
                           std::span<const double> weights = {});

// Divides each row of a nonnegative occurrence matrix by its sum. Throws
// Error(kInvalidArgument) naming the first step whose total is zero.
TrajectoryMatrix normalize_occurrence(const Matrix& occurrence);

// Versioned JSON model file (format "elecvuln.markov_model", version 1).
void write_model(std::ostream& out, const MarkovActivityModel& model);
MarkovActivityModel read_model(std::istream& in);

}  // namespace elecvuln

#endif  // ELECVULN_ACTIVITY_MODEL_H_
