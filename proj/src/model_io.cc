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

#include <fmt/format.h>
#include <json.hpp>

#include "elecvuln/activity_model.h"

namespace elecvuln {

using json = nlohmann::json;

namespace {

constexpr std::string_view kFormat = "elecvuln.markov_model";
constexpr int kVersion = 1;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::kParse, fmt::format("model file: {}", what));
}

std::vector<double> read_vector(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) schema_error(fmt::format("{} must have {} entries", what, n));
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) schema_error(fmt::format("{} holds a non-number", what));
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void write_model(std::ostream& out, const MarkovActivityModel& model) {
  const std::size_t k = model.num_states();
  json transitions = json::array();
  for (const Matrix& m : model.transitions()) {
    json rows = json::array();
    for (std::size_t p = 0; p < k; ++p) {
      auto r = m.row(p);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    transitions.push_back(std::move(rows));
  }
  const ModelProvenance& prov = model.provenance();
  json doc = {
      {"format", kFormat},
      {"version", kVersion},
      {"states", k},
      {"steps", model.num_steps()},
      {"labels", prov.labels},
      {"provenance",
       {{"inputs_hash", prov.inputs_hash},
        {"smoothing", prov.smoothing},
        {"stationary", prov.stationary}}},
      {"alpha", model.alpha()},
      {"transitions", std::move(transitions)},
  };
  out << doc.dump(1) << '\n';
}

MarkovActivityModel read_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    schema_error(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object()) schema_error("top level must be an object");
  if (doc.value("format", "") != kFormat) schema_error("unexpected format tag");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kVersion) {
    schema_error(fmt::format("unsupported version (expected {})", kVersion));
  }
  for (const char* key : {"states", "steps"}) {
    if (!doc.contains(key) || !doc[key].is_number_unsigned()) {
      schema_error(fmt::format("'{}' must be a positive integer", key));
    }
  }
  const auto k = doc["states"].get<std::size_t>();
  const auto steps = doc["steps"].get<std::size_t>();
  if (k == 0 || steps == 0) schema_error("states and steps must be positive");

  ModelProvenance prov;
  if (!doc.contains("labels") || !doc["labels"].is_array() || doc["labels"].size() != k) {
    schema_error("labels must list one label per state");
  }
  for (const json& l : doc["labels"]) {
    if (!l.is_string()) schema_error("labels must be strings");
    prov.labels.push_back(l.get<std::string>());
  }
  if (!doc.contains("provenance") || !doc["provenance"].is_object()) {
    schema_error("missing provenance");
  }
  const json& p = doc["provenance"];
  if (!p.contains("inputs_hash") || !p["inputs_hash"].is_string() ||
      !p.contains("smoothing") || !p["smoothing"].is_number() ||
      !p.contains("stationary") || !p["stationary"].is_boolean()) {
    schema_error("provenance needs inputs_hash, smoothing and stationary");
  }
  prov.inputs_hash = p["inputs_hash"].get<std::string>();
  prov.smoothing = p["smoothing"].get<double>();
  prov.stationary = p["stationary"].get<bool>();

  std::vector<double> alpha = read_vector(doc.value("alpha", json()), k, "alpha");
  const json& tj = doc.contains("transitions") ? doc["transitions"] : json();
  if (!tj.is_array() || tj.size() != steps - 1) {
    schema_error(fmt::format("transitions must hold {} matrices", steps - 1));
  }
  std::vector<Matrix> transitions;
  for (std::size_t t = 0; t < tj.size(); ++t) {
    if (!tj[t].is_array() || tj[t].size() != k) {
      schema_error(fmt::format("transition {} must have {} rows", t, k));
    }
    Matrix m(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      auto row = read_vector(tj[t][r], k, fmt::format("transition {} row {}", t, r));
      std::copy(row.begin(), row.end(), m.row(r).begin());
    }
    transitions.push_back(std::move(m));
  }
  try {
    return MarkovActivityModel::create(std::move(alpha), std::move(transitions),
                                       std::move(prov));
  } catch (const Error& e) {
    schema_error(e.what());
  }
}

}  // namespace elecvuln
