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

#include <filesystem>
#include <string>
#include <vector>

#include "crackres/cli/run_config.hpp"
#include "crackres/image.hpp"

namespace crackres::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kLockFile = ".lock";
inline constexpr const char* kIncompleteMarker = ".incomplete";
inline constexpr const char* kEffectiveConfig = "effective_config.json";

/// Validates `config`, then runs `command` inside config.out. While running,
/// the directory holds an exclusive lock file and an incomplete-run marker;
/// the marker is removed only on success. Returns an exit code.
int run_command(Command command, const RunConfig& config);

// The commands proper. They assume a validated config and throw on failure.
void cmd_prepare(const RunConfig& config);
void cmd_train_classifier(const RunConfig& config);
void cmd_train_sr(const RunConfig& config);
void cmd_eval_classifier(const RunConfig& config);
void cmd_eval_sr(const RunConfig& config);
/// Returns the number of inputs that ended in an error entry.
std::size_t cmd_infer(const RunConfig& config);

/// Fig.-style comparison strip: LR (nearest-neighbour upscaled), bicubic,
/// network output, ground truth and APE map, left to right.
ImageBuffer compose_panel(const ImageBuffer& lr, const ImageBuffer& bicubic,
                          const ImageBuffer& output, const ImageBuffer& truth,
                          const ImageBuffer& ape_gray);

/// Channel-mean APE scaled by `scale` and clipped, as 8-bit grayscale.
ImageBuffer ape_to_gray(const ImageBuffer& ape, double scale);

}  // namespace crackres::cli
