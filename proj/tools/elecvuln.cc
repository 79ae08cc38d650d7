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

// Command-line driver: one subcommand per pipeline stage, "run" for several
// at once and "serve" for the HTTP API over a finished run.

#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "elecvuln/config.h"
#include "elecvuln/pipeline.h"
#include "elecvuln/service.h"

namespace {

using namespace elecvuln;

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string weights;
  std::optional<int> timestep;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "project config JSON")->required()->check(
      CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "overrides the config seed");
  cmd->add_option("--weights", args.weights, "aspect weights qd,qa,qb (normalized)");
  cmd->add_option("--timestep", args.timestep, "step 0..95 exported as GeoJSON by render")
      ->check(CLI::Range(0, kStepsPerDay - 1));
}

std::optional<VRIWeights> parse_weights(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::array<double, 3> q{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t comma = text.find(',', pos);
    const bool last = i == 2;
    if (last != (comma == std::string::npos)) {
      throw Error(ErrorCode::kInvalidArgument, "--weights expects three numbers qd,qa,qb");
    }
    const std::string item = text.substr(pos, last ? std::string::npos : comma - pos);
    auto v = parse_double(item);
    if (!v) throw Error(ErrorCode::kInvalidArgument, fmt::format("--weights: '{}' is not a number", item));
    q[i] = *v;
    pos = comma + 1;
  }
  return VRIWeights::from_raw(q[0], q[1], q[2]);
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kParse: return 3;
    case ErrorCode::kNotFound: return 4;
    case ErrorCode::kFailedPrecondition: return 5;
    case ErrorCode::kIo: return 6;
  }
  return 1;
}

HttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community electricity vulnerability pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string stages = "all";
  std::string host = "127.0.0.1";
  int port = 8080;

  std::vector<std::pair<CLI::App*, std::optional<Stage>>> stage_cmds;
  for (Stage s : kAllStages) {
    auto* cmd = app.add_subcommand(std::string(stage_name(s)),
                                   fmt::format("run the {} stage", stage_name(s)));
    add_common(cmd, args);
    stage_cmds.emplace_back(cmd, s);
  }
  auto* run = app.add_subcommand("run", "run several stages in pipeline order");
  add_common(run, args);
  run->add_option("--stages", stages, "comma separated stages or 'all'")->capture_default_str();
  stage_cmds.emplace_back(run, std::nullopt);

  auto* serve = app.add_subcommand("serve", "serve the HTTP API over an assessed run");
  add_common(serve, args);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str()->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    const ProjectConfig config = load_config(args.config);
    if (serve->parsed()) {
      auto snapshot = load_snapshot(config, args.out);
      if (auto w = parse_weights(args.weights)) {
        auto copy = std::make_shared<ScenarioSnapshot>(*snapshot);
        copy->default_weights = *w;
        snapshot = copy;
      }
      HttpServer server(std::make_shared<const Service>(snapshot));
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << fmt::format("serving {} on http://{}:{}\n", args.out, host, bound);
      server.serve();
      g_server = nullptr;
      return 0;
    }
    RunOptions options;
    options.out_dir = args.out;
    options.seed = args.seed;
    options.weights = parse_weights(args.weights);
    options.timestep = args.timestep;
    for (const auto& [cmd, stage] : stage_cmds) {
      if (!cmd->parsed()) continue;
      options.stages = stage ? std::set<Stage>{*stage} : parse_stages(stages);
    }
    auto snapshot = run_pipeline(config, options);
    std::cout << fmt::format("wrote {} (content {})\n", args.out, snapshot->content_hash);
    return 0;
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", error_code_name(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
