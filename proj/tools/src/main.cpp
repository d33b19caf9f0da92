// Copyright 2026 The crackres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crackres/cli/commands.hpp"
#include "crackres/cli/run_config.hpp"

namespace {

constexpr const char* kLogEnv = "CRACKRES_LOG";

void configure_logging() {
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  const char* level = std::getenv(kLogEnv);
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace crackres::cli;
  configure_logging();

  CLI::App app{"Crack image classification and super-resolution toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;

  for (Command command : {Command::kPrepare, Command::kTrainClassifier, Command::kTrainSr,
                          Command::kEvalClassifier, Command::kEvalSr, Command::kInfer}) {
    auto* sub = app.add_subcommand(to_string(command));
    sub->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out, "Override the output directory");
    sub->add_option("--set", overrides, "Override a config value, e.g. train.max_epochs=50");
  }
  CLI11_PARSE(app, argc, argv);

  const Command command = *parse_command(app.get_subcommands().front()->get_name());
  RunConfig config;
  try {
    nlohmann::ordered_json doc = config_to_json(RunConfig{});
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      doc = nlohmann::ordered_json::parse(in);
    }
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    if (out) doc["out"] = *out;
    config = config_from_json(doc);
  } catch (const std::exception& e) {
    spdlog::error("config: {}", e.what());
    return kExitUsage;
  }
  return run_command(command, config);
}
