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

#include "crackres/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "crackres/rng.hpp"

namespace crackres {

namespace {
using json = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}
}  // namespace

const char* to_string(Label label) {
  return label == Label::kPositive ? "positive" : "negative";
}

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
  const std::string l = lower(text);
  if (l == "positive") return Label::kPositive;
  if (l == "negative") return Label::kNegative;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  return std::nullopt;
}

std::array<std::array<std::size_t, 2>, 3> DatasetManifest::counts() const {
  std::array<std::array<std::size_t, 2>, 3> out{};
  for (const auto& e : entries) {
    ++out[static_cast<std::size_t>(e.split)][static_cast<std::size_t>(e.label)];
  }
  return out;
}

std::size_t DatasetManifest::count(Split split) const {
  const auto c = counts()[static_cast<std::size_t>(split)];
  return c[0] + c[1];
}

std::vector<ManifestEntry> DatasetManifest::select(Split split) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [split](const ManifestEntry& e) { return e.split == split; });
  return out;
}

namespace {

using Table = std::vector<std::array<std::size_t, 3>>;

// Rounds the (class x split) table ratio[s] * class_size[c] so that rows sum
// to the class sizes, columns sum to `targets`, and every cell stays within
// one of its real value.
Table controlled_round(const std::vector<std::size_t>& class_sizes,
                       const std::array<double, 3>& ratios,
                       std::array<std::size_t, 3> targets) {
  const std::size_t classes = class_sizes.size();
  Table cells(classes);
  std::vector<std::array<double, 3>> frac(classes);
  std::vector<long> row_need(classes);
  std::array<long, 3> col_need{};
  for (std::size_t s = 0; s < 3; ++s) col_need[s] = static_cast<long>(targets[s]);

  for (std::size_t c = 0; c < classes; ++c) {
    long used = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      const double v = ratios[s] * static_cast<double>(class_sizes[c]);
      const double f = std::floor(v + 1e-9);
      cells[c][s] = static_cast<std::size_t>(f);
      frac[c][s] = std::max(0.0, v - f);
      used += static_cast<long>(f);
      col_need[s] -= static_cast<long>(f);
    }
    row_need[c] = static_cast<long>(class_sizes[c]) - used;
  }

  // A column can be over-full only when both rounded totals went up on exact
  // halves; give the unit back from the cell with the smallest fraction.
  for (std::size_t s = 0; s < 3; ++s) {
    while (col_need[s] < 0) {
      std::size_t best = classes;
      for (std::size_t c = 0; c < classes; ++c) {
        if (cells[c][s] == 0) continue;
        if (best == classes || frac[c][s] < frac[best][s]) best = c;
      }
      if (best == classes) throw std::logic_error("split_dataset: infeasible rounding");
      --cells[best][s];
      frac[best][s] += 1.0;
      ++row_need[best];
      ++col_need[s];
    }
  }

  // Each cell takes at most one extra unit. The table is tiny, so search all
  // patterns and keep the feasible one with the largest total fraction.
  const std::size_t bits = classes * 3;
  long best_mask = -1;
  double best_score = -1.0;
  for (long mask = 0; mask < (1L << bits); ++mask) {
    std::vector<long> rows(classes, 0);
    std::array<long, 3> cols{};
    double score = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t s = 0; s < 3; ++s) {
        if (mask & (1L << (c * 3 + s))) {
          ++rows[c];
          ++cols[s];
          score += frac[c][s];
        }
      }
    }
    bool ok = cols == col_need;
    for (std::size_t c = 0; c < classes && ok; ++c) ok = rows[c] == row_need[c];
    if (ok && score > best_score) {
      best_score = score;
      best_mask = mask;
    }
  }
  if (best_mask < 0) throw std::logic_error("split_dataset: infeasible rounding");
  std::vector<std::array<bool, 3>> extra(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < 3; ++s) extra[c][s] = (best_mask & (1L << (c * 3 + s))) != 0;
  }

  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < 3; ++s) cells[c][s] += extra[c][s] ? 1 : 0;
  }
  return cells;
}

}  // namespace

DatasetManifest split_dataset(const std::vector<LabeledItem>& items, SplitRatios ratios,
                              std::uint64_t seed) {
  if (items.empty()) throw std::invalid_argument("split_dataset: no items to split");
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  if (std::any_of(r.begin(), r.end(), [](double v) { return !(v >= 0.0); }) ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split_dataset: ratios must be non-negative and sum to 1");
  }

  const std::size_t n = items.size();
  std::array<std::size_t, 3> targets{};
  targets[1] = static_cast<std::size_t>(std::llround(r[1] * static_cast<double>(n)));
  targets[2] = static_cast<std::size_t>(std::llround(r[2] * static_cast<double>(n)));
  if (targets[1] + targets[2] > n) targets[2] = n - targets[1];
  targets[0] = n - targets[1] - targets[2];

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(items[i].label)].push_back(i);
  }
  const Table cells = controlled_round({by_class[0].size(), by_class[1].size()}, r, targets);

  Rng rng(seed);
  std::vector<Split> assignment(n, Split::kTrain);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<std::size_t> members = by_class[c];
    rng.shuffle(members);
    std::size_t pos = 0;
    for (Split s : {Split::kVal, Split::kTest}) {
      for (std::size_t k = 0; k < cells[c][static_cast<std::size_t>(s)]; ++k) {
        assignment[members[pos++]] = s;
      }
    }
  }

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    manifest.entries.push_back({items[i].path, items[i].label, assignment[i]});
  }
  return manifest;
}

std::vector<LabeledItem> ingest_directory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw std::invalid_argument("dataset root " + root.string() + " is not a directory");
  }
  std::vector<LabeledItem> items;
  bool saw_class_dir = false;
  for (const auto& dir : fs::directory_iterator(root)) {
    if (!dir.is_directory()) continue;
    const auto label = parse_label(dir.path().filename().string());
    if (!label) continue;
    saw_class_dir = true;
    for (const auto& file : fs::directory_iterator(dir.path())) {
      if (!file.is_regular_file()) continue;
      const std::string ext = lower(file.path().extension().string());
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
        items.push_back({file.path().string(), *label});
      }
    }
  }
  if (!saw_class_dir) {
    throw std::invalid_argument(root.string() +
                                " has no positive/ or negative/ subdirectory");
  }
  std::sort(items.begin(), items.end(),
            [](const LabeledItem& a, const LabeledItem& b) { return a.path < b.path; });
  return items;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json list = json::array();
  for (const auto& e : manifest.entries) {
    list.push_back({{"path", e.path}, {"label", to_string(e.label)}, {"split", to_string(e.split)}});
  }
  return list.dump(2) + "\n";
}

namespace {

std::string string_field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_string()) {
    throw std::invalid_argument(std::string("manifest entry missing string field '") + key + "'");
  }
  return obj.at(key).get<std::string>();
}

Split split_field(const json& obj) {
  const auto text = string_field(obj, "split");
  const auto split = parse_split(text);
  if (!split) throw std::invalid_argument("manifest entry has unknown split '" + text + "'");
  return *split;
}

json parse_json_array(std::string_view text) {
  json list;
  try {
    list = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  if (!list.is_array()) throw std::invalid_argument("manifest must be a JSON array");
  return list;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

DatasetManifest manifest_from_json(std::string_view text) {
  DatasetManifest manifest;
  for (const json& obj : parse_json_array(text)) {
    const auto label_text = string_field(obj, "label");
    const auto label = parse_label(label_text);
    if (!label) throw std::invalid_argument("manifest entry has unknown label '" + label_text + "'");
    manifest.entries.push_back({string_field(obj, "path"), *label, split_field(obj)});
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  write_text(path, manifest_to_json(manifest));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_text(path));
}

void write_sr_manifest(const std::vector<SrPairEntry>& pairs,
                       const std::filesystem::path& path) {
  json list = json::array();
  for (const auto& p : pairs) {
    list.push_back({{"lr_path", p.lr_path}, {"hr_path", p.hr_path}, {"split", to_string(p.split)}});
  }
  write_text(path, list.dump(2) + "\n");
}

std::vector<SrPairEntry> read_sr_manifest(const std::filesystem::path& path) {
  std::vector<SrPairEntry> pairs;
  for (const json& obj : parse_json_array(read_text(path))) {
    pairs.push_back({string_field(obj, "lr_path"), string_field(obj, "hr_path"), split_field(obj)});
  }
  return pairs;
}

}  // namespace crackres
