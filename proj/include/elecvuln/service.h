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

#ifndef ELECVULN_SERVICE_H_
#define ELECVULN_SERVICE_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "elecvuln/pipeline.h"

namespace elecvuln {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using QueryParams = std::map<std::string, std::string>;

// Stateless request handling over an immutable snapshot. Safe to call from
// many threads at once.
class Service {
 public:
  // Throws Error(kFailedPrecondition) unless the snapshot went through assess.
  explicit Service(std::shared_ptr<const ScenarioSnapshot> snapshot);

  HttpResponse handle(std::string_view path, const QueryParams& query) const;

  // Weights from qd/qa/qb. Without any of them the snapshot defaults apply;
  // otherwise a missing one counts as 0. Throws Error(kInvalidArgument).
  VRIWeights weights_from_query(const QueryParams& query) const;

  const ScenarioSnapshot& snapshot() const { return *snapshot_; }

 private:
  HttpResponse meta() const;
  HttpResponse layer(std::string_view aspect, const QueryParams& query) const;
  HttpResponse vri(const QueryParams& query) const;
  HttpResponse buildings(const QueryParams& query) const;
  HttpResponse frame_png(const QueryParams& query) const;

  std::shared_ptr<const ScenarioSnapshot> snapshot_;
};

// Thin HTTP front end. GET only; every response carries a permissive CORS
// header so a browser client on another origin can call it.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const Service> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop() on a background thread.
  void start();
  // Serves on the calling thread until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace elecvuln

#endif  // ELECVULN_SERVICE_H_
