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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "crackres/ops.hpp"
#include "crackres/tape.hpp"
#include "crackres/tensor.hpp"

namespace crackres {

enum class LayerKind {
  kConv2d,
  kActivation,
  kGlobalAvgPool,
  kFlatten,
  kDense,
  kPixelShuffle,
};

const char* to_string(LayerKind kind);

/// One entry of a layer stack. Only the fields relevant to `kind` are set;
/// validate() rejects anything else.
struct LayerSpec {
  LayerKind kind = LayerKind::kFlatten;
  std::size_t filters = 0;
  std::size_t kernel_size = 0;
  Padding padding = Padding::kSame;
  Activation activation = Activation::kNone;
  std::size_t units = 0;
  std::size_t upscale = 0;

  static LayerSpec conv2d(std::size_t filters, std::size_t kernel_size,
                          Padding padding = Padding::kSame);
  static LayerSpec activation_layer(Activation kind);
  static LayerSpec global_avg_pool();
  static LayerSpec flatten();
  static LayerSpec dense(std::size_t units);
  static LayerSpec pixel_shuffle(std::size_t r);

  bool has_params() const noexcept {
    return kind == LayerKind::kConv2d || kind == LayerKind::kDense;
  }
  void validate() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelArchitecture {
  std::string name;
  Shape input_shape;  // (H, W, C)
  std::vector<LayerSpec> layers;
  /// Clamp the network output to [0, 1] in forward(); used for image outputs.
  bool clip_output = false;

  friend bool operator==(const ModelArchitecture&, const ModelArchitecture&) = default;
};

/// 32x32x3 -> conv16(3x3) relu -> conv32(3x3) relu -> GAP -> flatten ->
/// dense32 relu -> dense1 sigmoid. 6177 trainable parameters.
ModelArchitecture build_crack_classifier();

/// 32x32x3 -> conv64(5x5) relu -> conv64(3x3) relu -> conv32(3x3) relu ->
/// conv32(3x3) relu -> conv(r*r*c, 3x3) [final_activation] -> pixel_shuffle(r).
/// 83376 trainable parameters at r = 4, c = 3.
ModelArchitecture build_espcnn(std::size_t r = 4, std::size_t c = 3,
                               Activation final_activation = Activation::kNone);

/// Output shape of every layer for an input of `input_shape` (defaults to the
/// architecture's own). Throws ShapeError when the stack does not compose.
std::vector<Shape> infer_shapes(const ModelArchitecture& arch);
std::vector<Shape> infer_shapes(const ModelArchitecture& arch, const Shape& input_shape);

/// Shapes of every trainable tensor in declared order: for each conv layer
/// (k, k, Cin, Cout) then (Cout); for each dense layer (n, m) then (m).
std::vector<Shape> param_shapes(const ModelArchitecture& arch);

/// Per trainable layer: (k*k*Cin + 1)*Cout for conv, (n + 1)*m for dense.
std::vector<std::size_t> layer_param_counts(const ModelArchitecture& arch);
std::size_t count_params(const ModelArchitecture& arch);

/// Orthogonal kernels and zero biases; deterministic in `seed`.
std::vector<Tensor> init_params(const ModelArchitecture& arch, std::uint64_t seed);

/// Throws ShapeError if `params` do not match param_shapes(arch).
template <typename T>
void check_params(const ModelArchitecture& arch, std::span<const BasicTensor<T>> params);

/// Network output before output clipping. Accepts (H, W, C) or (N, H, W, C).
template <typename T>
BasicTensor<T> forward_raw(
    const ModelArchitecture& arch,
    std::span<const BasicTensor<std::type_identity_t<T>>> params,
    const BasicTensor<T>& input);

/// forward_raw followed by the [0, 1] clamp when arch.clip_output is set.
template <typename T>
BasicTensor<T> forward(
    const ModelArchitecture& arch,
    std::span<const BasicTensor<std::type_identity_t<T>>> params,
    const BasicTensor<T>& input);

/// Records the same computation as forward_raw on `tape`.
template <typename T>
ad::Var forward_taped(ad::Tape<T>& tape, const ModelArchitecture& arch,
                      std::span<const ad::Var> params, ad::Var input);

/// Activations after each of the first `conv_layers` convolution blocks
/// (conv plus any directly following activation layer).
template <typename T>
std::vector<BasicTensor<T>> conv_trunk_features(
    const ModelArchitecture& arch,
    std::span<const BasicTensor<std::type_identity_t<T>>> params,
    const BasicTensor<T>& input, std::size_t conv_layers);

}  // namespace crackres
