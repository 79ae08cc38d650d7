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

#include "elecvuln/activity_model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "elecvuln/hashing.h"

namespace elecvuln {
namespace {

void check_distribution(std::span<const double> p, double tolerance, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{} has a negative or non-finite entry", what));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} sums to {} instead of 1", what, format_double(sum)));
  }
}

std::vector<std::string> default_labels(std::size_t num_states) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < num_states; ++k) {
    labels.push_back(num_states == kNumClasses ? std::string(class_label(class_at(k)))
                                               : fmt::format("s{}", k));
  }
  return labels;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint8_t draw(std::span<const double> p, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    cumulative += p[k];
    last_positive = k;
    if (u < cumulative) return static_cast<std::uint8_t>(k);
  }
  // Rounding left u above the final cumulative sum.
  return static_cast<std::uint8_t>(last_positive);
}

}  // namespace

MarkovActivityModel MarkovActivityModel::create(std::vector<double> alpha,
                                                std::vector<Matrix> transitions,
                                                ModelProvenance provenance) {
  const std::size_t k = alpha.size();
  if (k == 0 || k > 256) {
    throw Error(ErrorCode::kInvalidArgument, "model needs between 1 and 256 states");
  }
  check_distribution(alpha, kTolerance, "alpha");
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const Matrix& m = transitions[t];
    if (m.rows() != k || m.cols() != k) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("transition {} is {}x{}, expected {}x{}", t, m.rows(),
                              m.cols(), k, k));
    }
    for (std::size_t p = 0; p < k; ++p) {
      check_distribution(m.row(p), kTolerance, fmt::format("transition {} row {}", t, p));
    }
  }
  if (provenance.labels.empty()) provenance.labels = default_labels(k);
  if (provenance.labels.size() != k) {
    throw Error(ErrorCode::kInvalidArgument, "one label per state required");
  }
  MarkovActivityModel model;
  model.alpha_ = std::move(alpha);
  model.transitions_ = std::move(transitions);
  model.provenance_ = std::move(provenance);
  return model;
}

TrajectoryMatrix TrajectoryMatrix::create(Matrix values) {
  for (std::size_t t = 0; t < values.rows(); ++t) {
    check_distribution(values.row(t), kTolerance, fmt::format("trajectory row {}", t));
  }
  return TrajectoryMatrix(std::move(values));
}

StateSequence discretize(const DiaryRecord& record) {
  constexpr auto kOthers = static_cast<std::uint8_t>(ActivityClass::kOthers);
  std::array<std::uint8_t, kMinutesPerDay> minute_class;
  std::array<int, kMinutesPerDay> minute_owner_start;
  minute_class.fill(kOthers);
  minute_owner_start.fill(-1);
  for (const DiaryEntry& e : record.entries) {
    const int begin = std::clamp(e.start_min, 0, kMinutesPerDay);
    const int end = std::clamp(e.end_min(), 0, kMinutesPerDay);
    for (int m = begin; m < end; ++m) {
      minute_class[m] = static_cast<std::uint8_t>(index_of(e.activity));
      minute_owner_start[m] = e.start_min;
    }
  }
  // An uncovered run behaves like a c08 entry starting where the run starts.
  for (int m = 0, run = 0; m < kMinutesPerDay; ++m) {
    if (minute_owner_start[m] >= 0) {
      run = m + 1;
    } else {
      minute_owner_start[m] = run;
    }
  }

  StateSequence slots(kStepsPerDay);
  for (int t = 0; t < kStepsPerDay; ++t) {
    std::array<int, kNumClasses> minutes{};
    std::array<int, kNumClasses> earliest;
    earliest.fill(kMinutesPerDay);
    for (int m = t * kStepMinutes; m < (t + 1) * kStepMinutes; ++m) {
      const auto c = minute_class[m];
      ++minutes[c];
      earliest[c] = std::min(earliest[c], minute_owner_start[m]);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (minutes[c] > minutes[best] ||
          (minutes[c] == minutes[best] && minutes[c] > 0 && earliest[c] < earliest[best])) {
        best = c;
      }
    }
    slots[t] = static_cast<std::uint8_t>(best);
  }
  return slots;
}

DiaryRecord diary_from_sequence(std::string person_id, double weight,
                                const StateSequence& sequence) {
  if (sequence.size() != static_cast<std::size_t>(kStepsPerDay)) {
    throw Error(ErrorCode::kInvalidArgument, "sequence must have 96 steps");
  }
  DiaryRecord record;
  record.person_id = std::move(person_id);
  record.sample_weight = weight;
  std::size_t begin = 0;
  for (std::size_t t = 1; t <= sequence.size(); ++t) {
    if (t == sequence.size() || sequence[t] != sequence[begin]) {
      ActivityClass c = class_at(sequence[begin]);
      record.entries.push_back({static_cast<int>(begin) * kStepMinutes,
                                static_cast<int>(t - begin) * kStepMinutes,
                                std::string(class_label(c)), c});
      begin = t;
    }
  }
  return record;
}

MarkovActivityModel fit_sequences(std::span<const StateSequence> sequences,
                                  std::span<const double> weights, std::size_t num_states,
                                  const FitOptions& options) {
  if (sequences.empty()) throw Error(ErrorCode::kInvalidArgument, "no data");
  if (!weights.empty() && weights.size() != sequences.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one weight per sequence required");
  }
  if (!(options.smoothing >= 0.0) || !std::isfinite(options.smoothing)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be nonnegative");
  }
  if (num_states == 0 || num_states > 256) {
    throw Error(ErrorCode::kInvalidArgument, "model needs between 1 and 256 states");
  }
  const std::size_t steps = sequences.front().size();
  if (steps == 0) throw Error(ErrorCode::kInvalidArgument, "sequences must be nonempty");

  const std::size_t k = num_states;
  std::vector<double> alpha(k, 0.0);
  const std::size_t boundaries = steps - 1;
  const std::size_t count_mats = options.stationary ? (boundaries ? 1 : 0) : boundaries;
  std::vector<Matrix> counts(count_mats, Matrix(k, k));

  std::string hash_input = fmt::format("{} {} {}\n", sequences.size(), steps, k);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const StateSequence& seq = sequences[i];
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("sequence {} has a negative weight", i));
    }
    if (seq.size() != steps) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("sequence {} has {} steps, expected {}", i, seq.size(), steps));
    }
    for (std::uint8_t s : seq) {
      if (s >= k) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("sequence {} holds state {} >= {}", i, s, k));
      }
    }
    hash_input += format_double(w);
    hash_input += ' ';
    hash_input.append(seq.begin(), seq.end());
    hash_input += '\n';

    total_weight += w;
    alpha[seq[0]] += w;
    for (std::size_t t = 0; t < boundaries; ++t) {
      counts[options.stationary ? 0 : t](seq[t], seq[t + 1]) += w;
    }
  }
  if (total_weight <= 0.0) throw Error(ErrorCode::kInvalidArgument, "no data");
  for (double& a : alpha) a /= total_weight;

  std::vector<Matrix> transitions;
  transitions.reserve(boundaries);
  for (const Matrix& c : counts) {
    Matrix xi(k, k);
    for (std::size_t p = 0; p < k; ++p) {
      double row_total = 0.0;
      for (double v : c.row(p)) row_total += v;
      if (row_total <= 0.0) {
        xi(p, p) = 1.0;
        continue;
      }
      const double denom = row_total + static_cast<double>(k) * options.smoothing;
      for (std::size_t q = 0; q < k; ++q) xi(p, q) = (c(p, q) + options.smoothing) / denom;
    }
    transitions.push_back(std::move(xi));
  }
  if (options.stationary && boundaries > 1) {
    transitions.resize(boundaries, transitions.front());
  }

  ModelProvenance provenance;
  provenance.inputs_hash = sha256_hex(hash_input);
  provenance.smoothing = options.smoothing;
  provenance.stationary = options.stationary;
  return MarkovActivityModel::create(std::move(alpha), std::move(transitions),
                                     std::move(provenance));
}

MarkovActivityModel fit(std::span<const DiaryRecord> diaries, const FitOptions& options) {
  if (diaries.empty()) throw Error(ErrorCode::kInvalidArgument, "no data");
  std::vector<StateSequence> sequences;
  std::vector<double> weights;
  sequences.reserve(diaries.size());
  weights.reserve(diaries.size());
  for (const DiaryRecord& d : diaries) {
    sequences.push_back(discretize(d));
    weights.push_back(d.sample_weight);
  }
  return fit_sequences(sequences, weights, kNumClasses, options);
}

TrajectoryMatrix propagate(const MarkovActivityModel& model) {
  const std::size_t k = model.num_states();
  Matrix rows(model.num_steps(), k);
  std::copy(model.alpha().begin(), model.alpha().end(), rows.row(0).begin());
  for (std::size_t t = 0; t + 1 < model.num_steps(); ++t) {
    const Matrix& xi = model.transition(t);
    auto current = rows.row(t);
    auto next = rows.row(t + 1);
    for (std::size_t p = 0; p < k; ++p) {
      if (current[p] == 0.0) continue;
      for (std::size_t q = 0; q < k; ++q) next[q] += current[p] * xi(p, q);
    }
  }
  return TrajectoryMatrix::create(std::move(rows));
}

std::vector<StateSequence> sample(const MarkovActivityModel& model, std::size_t n,
                                  std::uint64_t seed, unsigned workers) {
  std::vector<StateSequence> out(n);
  if (n == 0) return out;
  const std::size_t steps = model.num_steps();

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 gen(splitmix64(seed ^ splitmix64(i)));
      StateSequence& seq = out[i];
      seq.resize(steps);
      seq[0] = draw(model.alpha(), std::generate_canonical<double, 64>(gen));
      for (std::size_t t = 0; t + 1 < steps; ++t) {
        seq[t + 1] = draw(model.transition(t).row(seq[t]),
                          std::generate_canonical<double, 64>(gen));
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    run(0, n);
    return out;
  }
  std::vector<std::jthread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    threads.emplace_back(run, begin, std::min(n, begin + chunk));
  }
  threads.clear();  // joins
  return out;
}

TrajectoryMatrix aggregate(std::span<const StateSequence> sequences, std::size_t num_states,
                           std::span<const double> weights) {
  if (sequences.empty()) throw Error(ErrorCode::kInvalidArgument, "no sequences to aggregate");
  if (!weights.empty() && weights.size() != sequences.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one weight per sequence required");
  }
  const std::size_t steps = sequences.front().size();
  Matrix freq(steps, num_states);
  double total = 0.0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("sequence {} has a negative weight", i));
    }
    if (sequences[i].size() != steps) {
      throw Error(ErrorCode::kInvalidArgument, "sequences differ in length");
    }
    total += w;
    for (std::size_t t = 0; t < steps; ++t) {
      const std::uint8_t s = sequences[i][t];
      if (s >= num_states) throw Error(ErrorCode::kInvalidArgument, "state out of range");
      freq(t, s) += w;
    }
  }
  if (total <= 0.0) throw Error(ErrorCode::kInvalidArgument, "all sequence weights are zero");
  for (std::size_t t = 0; t < steps; ++t) {
    for (double& v : freq.row(t)) v /= total;
  }
  return TrajectoryMatrix::create(std::move(freq));
}

TrajectoryMatrix normalize_occurrence(const Matrix& occurrence) {
  Matrix out = occurrence;
  for (std::size_t t = 0; t < out.rows(); ++t) {
    double total = 0.0;
    for (double v : out.row(t)) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("time step {} has a negative occurrence", t));
      }
      total += v;
    }
    if (total <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("time step {} has zero total occurrence", t));
    }
    for (double& v : out.row(t)) v /= total;
  }
  return TrajectoryMatrix::create(std::move(out));
}

}  // namespace elecvuln
