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

#include "elecvuln/service.h"

#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace elecvuln {

using json = nlohmann::json;

namespace {

HttpResponse json_response(const json& body, int status = 200) {
  return {status, "application/json", body.dump() + "\n"};
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return json_response({{"error", {{"code", code}, {"message", message}}}}, status);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kFailedPrecondition:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

json grid_json(const GridSpec& g) {
  return {{"x0", g.x0}, {"y0", g.y0}, {"cell_size", g.cell_size}, {"rows", g.rows},
          {"cols", g.cols}, {"origin", "south-west"}, {"order", "row-major, row 0 south"}};
}

json weights_json(const VRIWeights& w) {
  return {{"demographic", w.demographic()},
          {"activity", w.activity()},
          {"building_env", w.building_env()}};
}

json values_json(std::span<const double> values) {
  json out = json::array();
  for (double v : values) {
    if (is_nodata(v)) {
      out.push_back(nullptr);
    } else {
      out.push_back(v);
    }
  }
  return out;
}

const std::string* find(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  return it == q.end() ? nullptr : &it->second;
}

// t must be present and name a step the snapshot covers.
int timestep_from(const QueryParams& q) {
  const std::string* raw = find(q, "t");
  if (!raw) throw Error(ErrorCode::kInvalidArgument, "missing query parameter t");
  auto t = parse_int(*raw);
  if (!t) throw Error(ErrorCode::kInvalidArgument, fmt::format("t='{}' is not an integer", *raw));
  if (*t < 0 || *t >= kStepsPerDay) {
    throw Error(ErrorCode::kNotFound,
                fmt::format("unknown timestep {}; valid steps are 0..{}", *t, kStepsPerDay - 1));
  }
  return static_cast<int>(*t);
}

}  // namespace

Service::Service(std::shared_ptr<const ScenarioSnapshot> snapshot)
    : snapshot_(std::move(snapshot)) {
  if (!snapshot_ || !snapshot_->assessed()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "serve needs a snapshot complete through assess; run stage 'assess' first");
  }
}

VRIWeights Service::weights_from_query(const QueryParams& query) const {
  const std::array<const char*, 3> keys = {"qd", "qa", "qb"};
  std::array<double, 3> raw{};
  bool any = false;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string* v = find(query, keys[i]);
    if (!v) continue;
    any = true;
    auto parsed = parse_double(*v);
    if (!parsed) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{}='{}' is not a number", keys[i], *v));
    }
    raw[i] = *parsed;
  }
  if (!any) return snapshot_->default_weights;
  return VRIWeights::from_raw(raw[0], raw[1], raw[2]);
}

HttpResponse Service::handle(std::string_view path, const QueryParams& query) const {
  try {
    if (path == "/meta") return meta();
    if (path == "/vri") return vri(query);
    if (path == "/buildings") return buildings(query);
    if (path == "/frames.png") return frame_png(query);
    constexpr std::string_view kLayers = "/layers/";
    if (path.starts_with(kLayers)) return layer(path.substr(kLayers.size()), query);
    return error_response(404, "not_found", fmt::format("no route {}", path));
  } catch (const Error& e) {
    return error_response(status_for(e.code()), error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::meta() const {
  const ScenarioSnapshot& s = *snapshot_;
  json classes = json::array();
  for (ActivityClass c : kAllClasses) {
    const ActivityVulnerability& v = s.vulnerability.at(c);
    classes.push_back({{"label", class_label(c)},
                       {"name", class_name(c)},
                       {"criticality", v.criticality},
                       {"relevance", v.relevance}});
  }
  json ramps = json::array();
  for (const ColorRamp& r : color_ramps()) ramps.push_back(r.id);
  return json_response({{"grid", grid_json(s.grid)},
                        {"timesteps", kStepsPerDay},
                        {"step_minutes", kStepMinutes},
                        {"default_weights", weights_json(s.default_weights)},
                        {"aspects", {"demographic", "activity", "building_env"}},
                        {"classes", std::move(classes)},
                        {"buildings", s.buildings.size()},
                        {"population", s.population},
                        {"ramp", s.ramp},
                        {"ramps", std::move(ramps)},
                        {"content_hash", s.content_hash}});
}

HttpResponse Service::layer(std::string_view aspect_text, const QueryParams& query) const {
  auto aspect = parse_aspect(aspect_text);
  if (!aspect) {
    return error_response(404, "not_found",
                          fmt::format("unknown aspect '{}'; expected demographic, activity or "
                                      "building_env",
                                      aspect_text));
  }
  const ScenarioSnapshot& s = *snapshot_;
  const AspectLayer* layer = nullptr;
  std::optional<int> t;
  if (*aspect == Aspect::kActivity || find(query, "t")) t = timestep_from(query);
  switch (*aspect) {
    case Aspect::kDemographic: layer = &*s.demographic; break;
    case Aspect::kBuildingEnv: layer = &*s.building_env; break;
    case Aspect::kActivity: layer = &s.activity[static_cast<std::size_t>(*t)]; break;
  }
  json ranks = json::array();
  for (std::uint8_t r : layer->ranks) {
    if (r == kNoRank) {
      ranks.push_back(nullptr);
    } else {
      ranks.push_back(r);
    }
  }
  json body = {{"aspect", aspect_name(*aspect)},
               {"static", *aspect != Aspect::kActivity},
               {"grid", grid_json(layer->grid)},
               {"ranks", std::move(ranks)}};
  body["timestep"] = t ? json(*t) : json(nullptr);
  return json_response(body);
}

HttpResponse Service::vri(const QueryParams& query) const {
  const int t = timestep_from(query);
  const VRIWeights weights = weights_from_query(query);
  const auto layers = snapshot_->layers_at(t);
  const VulnerabilityMap map = compose(layers, weights);
  const std::string* format = find(query, "format");
  if (format && *format == "csv") {
    std::ostringstream out;
    write_values_csv(out, map.grid, map.values);
    return {200, "text/csv", out.str()};
  }
  if (format && *format != "json") {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown format '{}'", *format));
  }
  return json_response({{"timestep", t},
                        {"weights", weights_json(weights)},
                        {"grid", grid_json(map.grid)},
                        {"values", values_json(map.values)}});
}

HttpResponse Service::buildings(const QueryParams& query) const {
  const ScenarioSnapshot& s = *snapshot_;
  const int t = timestep_from(query);
  std::optional<CellIndex> only;
  const std::string* row = find(query, "row");
  const std::string* col = find(query, "col");
  if (row || col) {
    const long long r = row ? parse_int(*row).value_or(-1) : -1;
    const long long c = col ? parse_int(*col).value_or(-1) : -1;
    if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= s.grid.rows ||
        static_cast<std::size_t>(c) >= s.grid.cols) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("row and col must both be given and lie inside the {}x{} grid",
                              s.grid.rows, s.grid.cols));
    }
    only = CellIndex{static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
  }
  const OccupancyField& field = *s.occupancy;
  const std::vector<double> activity =
      score_activity(field, s.vulnerability, static_cast<std::size_t>(t), s.combine_mode);
  json list = json::array();
  for (std::size_t b = 0; b < s.buildings.size(); ++b) {
    const Building& bld = s.buildings[b];
    const auto cell = s.grid.cell_of(bld.centroid);
    if (only && !(cell && *cell == *only)) continue;
    json occupancy = json::object();
    for (ActivityClass c : kAllClasses) {
      occupancy[std::string(class_label(c))] = field.count(static_cast<std::size_t>(t), b, c);
    }
    json entry = {{"id", bld.id},
                  {"type", building_type_name(bld.type)},
                  {"zone_id", bld.zone_id},
                  {"x", bld.centroid.x},
                  {"y", bld.centroid.y},
                  {"occupancy", std::move(occupancy)},
                  {"total", field.building_total(static_cast<std::size_t>(t), b)},
                  {"activity_score", activity[b]},
                  {"building_env_score", s.building_env_scores.at(b)}};
    entry["cell"] = cell ? json{{"row", cell->row}, {"col", cell->col}} : json(nullptr);
    list.push_back(std::move(entry));
  }
  return json_response({{"timestep", t}, {"buildings", std::move(list)}});
}

HttpResponse Service::frame_png(const QueryParams& query) const {
  const ScenarioSnapshot& s = *snapshot_;
  const int t = timestep_from(query);
  const VRIWeights weights = weights_from_query(query);
  std::string ramp = s.ramp;
  if (const std::string* r = find(query, "ramp")) ramp = *r;
  int cell_px = s.cell_px;
  if (const std::string* px = find(query, "cell_px")) {
    auto v = parse_int(*px);
    if (!v || *v < 1 || *v > 64) {
      throw Error(ErrorCode::kInvalidArgument, "cell_px must be an integer in 1..64");
    }
    cell_px = static_cast<int>(*v);
  }
  const VulnerabilityMap map = compose(s.layers_at(t), weights);
  return {200, "image/png", encode_png(render(map, ramp, cell_px))};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  std::shared_ptr<const Service> service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(std::shared_ptr<const Service> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  impl_->server.Get(".*", [svc = impl_->service](const httplib::Request& req,
                                                  httplib::Response& res) {
    QueryParams query;
    for (const auto& [key, value] : req.params) query[key] = value;  // last one wins
    const HttpResponse out = svc->handle(req.path, query);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, fmt::format("cannot bind {}", host));
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", host, port));
  }
  return port;
}

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace elecvuln
