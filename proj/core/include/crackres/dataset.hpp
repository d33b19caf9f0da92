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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crackres {

enum class Label { kNegative = 0, kPositive = 1 };
enum class Split { kTrain = 0, kVal = 1, kTest = 2 };

const char* to_string(Label label);
const char* to_string(Split split);
std::optional<Label> parse_label(std::string_view text);
std::optional<Split> parse_split(std::string_view text);

struct LabeledItem {
  std::string path;
  Label label;
};

struct ManifestEntry {
  std::string path;
  Label label;
  Split split;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct SplitRatios {
  double train = 0.49;
  double val = 0.21;
  double test = 0.30;
};

/// Classification split used for stage one (49/21/30).
inline constexpr SplitRatios kClassifierSplit{0.49, 0.21, 0.30};
/// Super-resolution split over positive images (64/16/20, i.e. 3200/800/1000
/// of 5000).
inline constexpr SplitRatios kSuperResolutionSplit{0.64, 0.16, 0.20};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;

  /// counts[split][label].
  std::array<std::array<std::size_t, 2>, 3> counts() const;
  std::size_t count(Split split) const;
  std::vector<ManifestEntry> select(Split split) const;
};

/// Deterministic class-stratified split.
///
/// Split totals are round(ratio * N) for val and test with the remainder in
/// train. Within those totals every (class, split) cell is the floor or ceil
/// of ratio * class_size, so each class is stratified to within one image.
/// Items are shuffled per class with `seed`; entries are emitted in input
/// order.
DatasetManifest split_dataset(const std::vector<LabeledItem>& items, SplitRatios ratios,
                              std::uint64_t seed);

/// `<root>/{positive,negative}/*.{png,jpg,jpeg}` (folder and extension
/// matching is case-insensitive), sorted by path.
std::vector<LabeledItem> ingest_directory(const std::filesystem::path& root);

/// JSON array of {"path", "label", "split"} objects.
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Low/high-resolution pair store entry.
struct SrPairEntry {
  std::string lr_path;
  std::string hr_path;
  Split split;

  friend bool operator==(const SrPairEntry&, const SrPairEntry&) = default;
};

/// JSON array of {"lr_path", "hr_path", "split"} objects.
void write_sr_manifest(const std::vector<SrPairEntry>& pairs, const std::filesystem::path& path);
std::vector<SrPairEntry> read_sr_manifest(const std::filesystem::path& path);

}  // namespace crackres
