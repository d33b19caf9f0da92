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

// Checkpoint directory layout:
//
//   <dir>/manifest.json   architecture, metadata, weight array table
//   <dir>/weights.bin     little-endian float32, arrays concatenated in
//                         declared layer order (kernel then bias per layer)
//
// See docs/checkpoint_format.md for the manifest schema.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crackres/models.hpp"

namespace crackres {

inline constexpr int kCheckpointSchemaVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Code {
    kIo,
    kMalformed,
    kTruncated,
    kCountMismatch,
    kUnknownLayer,
  };

  CheckpointError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct CheckpointMetadata {
  std::uint64_t seed = 0;
  std::int64_t epoch = -1;
  std::optional<double> val_loss;
  std::string creator = "crackres";

  friend bool operator==(const CheckpointMetadata&, const CheckpointMetadata&) = default;
};

struct Checkpoint {
  ModelArchitecture arch;
  std::vector<Tensor> params;
  CheckpointMetadata metadata;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// JSON text of an architecture (the "architecture" object of the manifest).
std::string architecture_to_json(const ModelArchitecture& arch);
ModelArchitecture architecture_from_json(const std::string& text);

}  // namespace crackres
