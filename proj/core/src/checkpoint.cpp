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

#include "crackres/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

namespace crackres {
namespace {

using json = nlohmann::ordered_json;
using Code = CheckpointError::Code;

constexpr const char* kFormatName = "crackres-checkpoint";

json layer_to_json(const LayerSpec& layer) {
  json j;
  j["kind"] = to_string(layer.kind);
  switch (layer.kind) {
    case LayerKind::kConv2d:
      j["filters"] = layer.filters;
      j["kernel_size"] = layer.kernel_size;
      j["padding"] = to_string(layer.padding);
      break;
    case LayerKind::kActivation:
      j["activation"] = to_string(layer.activation);
      break;
    case LayerKind::kDense:
      j["units"] = layer.units;
      break;
    case LayerKind::kPixelShuffle:
      j["upscale"] = layer.upscale;
      break;
    case LayerKind::kGlobalAvgPool:
    case LayerKind::kFlatten:
      break;
  }
  return j;
}

json arch_to_json(const ModelArchitecture& arch) {
  json j;
  j["name"] = arch.name;
  j["input_shape"] = arch.input_shape;
  j["clip_output"] = arch.clip_output;
  j["layers"] = json::array();
  for (const LayerSpec& layer : arch.layers) j["layers"].push_back(layer_to_json(layer));
  return j;
}

template <typename V>
V field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw CheckpointError(Code::kMalformed, std::string("manifest: missing field '") +
                                                key + "'");
  }
  try {
    return j.at(key).get<V>();
  } catch (const json::exception& e) {
    throw CheckpointError(Code::kMalformed, std::string("manifest: field '") + key +
                                                "': " + e.what());
  }
}

LayerSpec layer_from_json(const json& j) {
  const auto kind = field<std::string>(j, "kind");
  if (kind == "conv2d") {
    const auto padding = field<std::string>(j, "padding");
    if (padding != "same" && padding != "valid") {
      throw CheckpointError(Code::kMalformed, "manifest: unknown padding '" + padding + "'");
    }
    return LayerSpec::conv2d(field<std::size_t>(j, "filters"),
                             field<std::size_t>(j, "kernel_size"),
                             padding == "same" ? Padding::kSame : Padding::kValid);
  }
  if (kind == "activation") {
    const auto act = field<std::string>(j, "activation");
    if (act == "relu") return LayerSpec::activation_layer(Activation::kRelu);
    if (act == "sigmoid") return LayerSpec::activation_layer(Activation::kSigmoid);
    throw CheckpointError(Code::kUnknownLayer, "manifest: unknown activation '" + act + "'");
  }
  if (kind == "global_avg_pool") return LayerSpec::global_avg_pool();
  if (kind == "flatten") return LayerSpec::flatten();
  if (kind == "dense") return LayerSpec::dense(field<std::size_t>(j, "units"));
  if (kind == "pixel_shuffle") {
    return LayerSpec::pixel_shuffle(field<std::size_t>(j, "upscale"));
  }
  throw CheckpointError(Code::kUnknownLayer, "manifest: unknown layer kind '" + kind + "'");
}

ModelArchitecture arch_from_json(const json& j) {
  ModelArchitecture arch;
  arch.name = field<std::string>(j, "name");
  arch.input_shape = field<Shape>(j, "input_shape");
  arch.clip_output = field<bool>(j, "clip_output");
  const json layers = field<json>(j, "layers");
  if (!layers.is_array()) {
    throw CheckpointError(Code::kMalformed, "manifest: 'layers' must be an array");
  }
  for (const json& layer : layers) arch.layers.push_back(layer_from_json(layer));
  try {
    infer_shapes(arch);
  } catch (const std::exception& e) {
    throw CheckpointError(Code::kMalformed,
                          std::string("manifest: architecture does not compose: ") + e.what());
  }
  return arch;
}

void write_le_floats(std::ofstream& out, const Tensor& t) {
  std::vector<char> bytes(t.size() * 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(t[i]);
    for (int b = 0; b < 4; ++b) {
      bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

float read_le_float(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::string architecture_to_json(const ModelArchitecture& arch) {
  return arch_to_json(arch).dump(2);
}

ModelArchitecture architecture_from_json(const std::string& text) {
  try {
    return arch_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw CheckpointError(Code::kMalformed, std::string("architecture JSON: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& dir) {
  check_params<float>(checkpoint.arch, checkpoint.params);

  json manifest;
  manifest["format"] = kFormatName;
  manifest["schema_version"] = kCheckpointSchemaVersion;
  manifest["architecture"] = arch_to_json(checkpoint.arch);
  json meta;
  meta["creator"] = checkpoint.metadata.creator;
  meta["seed"] = checkpoint.metadata.seed;
  meta["epoch"] = checkpoint.metadata.epoch;
  meta["val_loss"] = checkpoint.metadata.val_loss
                         ? json(*checkpoint.metadata.val_loss)
                         : json(nullptr);
  manifest["metadata"] = meta;

  json weights;
  weights["file"] = "weights.bin";
  weights["dtype"] = "float32";
  weights["byte_order"] = "little";
  weights["count"] = count_params(checkpoint.arch);
  weights["arrays"] = json::array();
  for (const Tensor& t : checkpoint.params) {
    weights["arrays"].push_back(json{{"shape", t.shape()}});
  }
  manifest["weights"] = weights;

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw CheckpointError(Code::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }
  {
    std::ofstream out(dir / "weights.bin", std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(Code::kIo, "cannot write " + (dir / "weights.bin").string());
    for (const Tensor& t : checkpoint.params) write_le_floats(out, t);
    if (!out) throw CheckpointError(Code::kIo, "short write to weights.bin");
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw CheckpointError(Code::kIo, "cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
  if (!out) throw CheckpointError(Code::kIo, "short write to manifest.json");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) {
    throw CheckpointError(Code::kIo, "cannot open " + (dir / "manifest.json").string());
  }
  json manifest;
  try {
    manifest = json::parse(manifest_in);
  } catch (const json::exception& e) {
    throw CheckpointError(Code::kMalformed, std::string("manifest.json: ") + e.what());
  }
  if (field<std::string>(manifest, "format") != kFormatName) {
    throw CheckpointError(Code::kMalformed, "manifest.json: not a crackres checkpoint");
  }
  if (field<int>(manifest, "schema_version") != kCheckpointSchemaVersion) {
    throw CheckpointError(Code::kMalformed, "manifest.json: unsupported schema version");
  }

  Checkpoint ckpt;
  ckpt.arch = arch_from_json(field<json>(manifest, "architecture"));
  const json meta = field<json>(manifest, "metadata");
  ckpt.metadata.creator = field<std::string>(meta, "creator");
  ckpt.metadata.seed = field<std::uint64_t>(meta, "seed");
  ckpt.metadata.epoch = field<std::int64_t>(meta, "epoch");
  if (meta.contains("val_loss") && !meta.at("val_loss").is_null()) {
    ckpt.metadata.val_loss = field<double>(meta, "val_loss");
  }

  const json weights = field<json>(manifest, "weights");
  if (field<std::string>(weights, "dtype") != "float32" ||
      field<std::string>(weights, "byte_order") != "little") {
    throw CheckpointError(Code::kMalformed, "manifest.json: weights must be little-endian float32");
  }
  const std::vector<Shape> expected = param_shapes(ckpt.arch);
  const auto declared = field<std::size_t>(weights, "count");
  const std::size_t arch_count = count_params(ckpt.arch);
  if (declared != arch_count) {
    throw CheckpointError(Code::kCountMismatch,
                          "checkpoint declares " + std::to_string(declared) +
                              " weights but the architecture has " +
                              std::to_string(arch_count));
  }
  const json arrays = field<json>(weights, "arrays");
  if (!arrays.is_array() || arrays.size() != expected.size()) {
    throw CheckpointError(Code::kCountMismatch,
                          "checkpoint weight table has the wrong number of arrays");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (field<Shape>(arrays[i], "shape") != expected[i]) {
      throw CheckpointError(Code::kCountMismatch,
                            "weight array " + std::to_string(i) + " has shape " +
                                to_string(field<Shape>(arrays[i], "shape")) +
                                ", architecture expects " + to_string(expected[i]));
    }
  }

  const auto file = dir / field<std::string>(weights, "file");
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError(Code::kIo, "cannot open " + file.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < arch_count * 4) {
    throw CheckpointError(Code::kTruncated,
                          file.string() + " is truncated: " + std::to_string(bytes.size()) +
                              " bytes, expected " + std::to_string(arch_count * 4));
  }
  if (bytes.size() != arch_count * 4) {
    throw CheckpointError(Code::kCountMismatch,
                          file.string() + " holds " + std::to_string(bytes.size()) +
                              " bytes, expected " + std::to_string(arch_count * 4));
  }
  std::size_t offset = 0;
  for (const Shape& shape : expected) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i, offset += 4) {
      t[i] = read_le_float(bytes.data() + offset);
    }
    ckpt.params.push_back(std::move(t));
  }
  return ckpt;
}

}  // namespace crackres
