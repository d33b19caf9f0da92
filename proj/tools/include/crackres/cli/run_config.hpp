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

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crackres::cli {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command {
  kPrepare,
  kTrainClassifier,
  kTrainSr,
  kEvalClassifier,
  kEvalSr,
  kInfer,
};

const char* to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

struct DataSection {
  std::string manifest;
  std::string sr_manifest;
};

struct PrepareSection {
  std::string mode = "synthetic";  // synthetic | directory
  std::string source;
  std::size_t count = 1000;
  double positive_fraction = 0.5;
  std::size_t lr_size = 32;
  std::size_t hr_size = 128;
  std::string resize_filter = "bicubic";
  std::vector<double> classifier_split{0.49, 0.21, 0.30};
  std::vector<double> sr_split{0.64, 0.16, 0.20};
};

struct SyntheticSection {
  std::size_t size = 227;
  double background = 0.55;
  double texture_scale = 24.0;
  double texture_amplitude = 0.08;
  int crack_count_min = 1;
  int crack_count_max = 2;
  double width_min = 6.0;
  double width_max = 12.0;
  double meander = 0.35;
  double contrast = 0.4;
};

struct TrainSection {
  std::int64_t max_epochs = 2000;
  std::int64_t patience = 20;
  std::size_t batch_size = 32;
  std::vector<std::int64_t> lr_boundaries{100};
  std::vector<double> lr_values{1e-4, 1e-5};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
};

struct ModelSection {
  std::size_t upscale = 4;
  std::size_t channels = 3;
  std::string final_activation = "none";  // none | relu
};

struct EvalSection {
  std::string checkpoint;
  /// Classifier checkpoint whose conv trunk drives LPIPS; empty selects a
  /// seeded, untrained trunk.
  std::string lpips_checkpoint;
  double threshold = 0.5;
  bool psnr_fixed_range = false;
  std::string ssim_mode = "global";  // global | windowed
  std::size_t ssim_window = 8;
  double ape_scale = 4.0;
  std::size_t panels = 4;
};

struct InferSection {
  std::string classifier_checkpoint;
  std::string sr_checkpoint;
  std::string manifest;
  std::string split = "test";  // train | val | test | all
  std::string sr_manifest;     // optional ground truth for APE maps
  double threshold = 0.5;
};

/// Document layout of a run config file. Every object is schema-strict.
struct RunConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  std::string out = "run";
  DataSection data;
  PrepareSection prepare;
  SyntheticSection synthetic;
  TrainSection train;
  ModelSection model;
  EvalSection eval;
  InferSection infer;
};

/// Throws ConfigError naming the offending key on unknown keys, wrong types
/// or a schema_version other than kSchemaVersion.
RunConfig config_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// Applies `section.key=value` to a config document. The value is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::ordered_json& doc, std::string_view assignment);

/// Value checks plus existence of the inputs `command` reads.
void validate_config(const RunConfig& config, Command command);

}  // namespace crackres::cli
