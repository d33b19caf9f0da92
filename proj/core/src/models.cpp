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

#include "crackres/models.hpp"

#include <stdexcept>

#include "crackres/init.hpp"
#include "crackres/rng.hpp"

namespace crackres {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kActivation: return "activation";
    case LayerKind::kGlobalAvgPool: return "global_avg_pool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
    case LayerKind::kPixelShuffle: return "pixel_shuffle";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv2d(std::size_t filters, std::size_t kernel_size,
                            Padding padding) {
  LayerSpec spec;
  spec.kind = LayerKind::kConv2d;
  spec.filters = filters;
  spec.kernel_size = kernel_size;
  spec.padding = padding;
  return spec;
}

LayerSpec LayerSpec::activation_layer(Activation kind) {
  LayerSpec spec;
  spec.kind = LayerKind::kActivation;
  spec.activation = kind;
  return spec;
}

LayerSpec LayerSpec::global_avg_pool() {
  LayerSpec spec;
  spec.kind = LayerKind::kGlobalAvgPool;
  return spec;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec spec;
  spec.kind = LayerKind::kFlatten;
  return spec;
}

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec spec;
  spec.kind = LayerKind::kDense;
  spec.units = units;
  return spec;
}

LayerSpec LayerSpec::pixel_shuffle(std::size_t r) {
  LayerSpec spec;
  spec.kind = LayerKind::kPixelShuffle;
  spec.upscale = r;
  return spec;
}

void LayerSpec::validate() const {
  const bool conv = kind == LayerKind::kConv2d;
  const bool act = kind == LayerKind::kActivation;
  const bool fc = kind == LayerKind::kDense;
  const bool shuffle = kind == LayerKind::kPixelShuffle;
  const auto fail = [this](const std::string& what) {
    throw std::invalid_argument(std::string(to_string(kind)) + " layer: " + what);
  };
  if (conv != (filters > 0) || conv != (kernel_size > 0)) {
    fail("filters and kernel_size are required for conv2d and only conv2d");
  }
  if (conv && kernel_size % 2 == 0) fail("kernel size must be odd");
  if (!conv && padding != Padding::kSame) fail("padding applies to conv2d only");
  if (act != (activation != Activation::kNone)) {
    fail("activation kind is required for activation layers and only those");
  }
  if (fc != (units > 0)) fail("units are required for dense and only dense");
  if (shuffle != (upscale > 0)) {
    fail("upscale factor is required for pixel_shuffle and only pixel_shuffle");
  }
}

ModelArchitecture build_crack_classifier() {
  ModelArchitecture arch;
  arch.name = "crack_classifier";
  arch.input_shape = {32, 32, 3};
  arch.layers = {
      LayerSpec::conv2d(16, 3),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::conv2d(32, 3),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::global_avg_pool(),
      LayerSpec::flatten(),
      LayerSpec::dense(32),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::dense(1),
      LayerSpec::activation_layer(Activation::kSigmoid),
  };
  return arch;
}

ModelArchitecture build_espcnn(std::size_t r, std::size_t c,
                               Activation final_activation) {
  if (r < 1 || c < 1) {
    throw std::invalid_argument("build_espcnn: r and c must be at least 1");
  }
  ModelArchitecture arch;
  arch.name = "espcnn";
  arch.input_shape = {32, 32, c};
  arch.clip_output = true;
  arch.layers = {
      LayerSpec::conv2d(64, 5),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::conv2d(64, 3),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::conv2d(32, 3),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::conv2d(32, 3),
      LayerSpec::activation_layer(Activation::kRelu),
      LayerSpec::conv2d(r * r * c, 3),
  };
  if (final_activation != Activation::kNone) {
    arch.layers.push_back(LayerSpec::activation_layer(final_activation));
  }
  arch.layers.push_back(LayerSpec::pixel_shuffle(r));
  return arch;
}

std::vector<Shape> infer_shapes(const ModelArchitecture& arch) {
  return infer_shapes(arch, arch.input_shape);
}

std::vector<Shape> infer_shapes(const ModelArchitecture& arch,
                                const Shape& input_shape) {
  if (input_shape.size() != 3) {
    throw ShapeError(arch.name + ": input shape must be (H, W, C), got " +
                     to_string(input_shape));
  }
  std::vector<Shape> shapes;
  shapes.reserve(arch.layers.size());
  Shape shape = input_shape;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& layer = arch.layers[i];
    layer.validate();
    const auto fail = [&](const std::string& why) {
      throw ShapeError(arch.name + " layer " + std::to_string(i) + " (" +
                       to_string(layer.kind) + "): " + why + ", input " +
                       to_string(shape));
    };
    switch (layer.kind) {
      case LayerKind::kConv2d:
        if (shape.size() != 3) fail("needs an (H, W, C) input");
        if (layer.padding == Padding::kValid &&
            (shape[0] < layer.kernel_size || shape[1] < layer.kernel_size)) {
          fail("kernel larger than input");
        }
        shape = {ops::conv_output_extent(shape[0], layer.kernel_size, layer.padding),
                 ops::conv_output_extent(shape[1], layer.kernel_size, layer.padding),
                 layer.filters};
        break;
      case LayerKind::kActivation:
        break;
      case LayerKind::kGlobalAvgPool:
        if (shape.size() != 3) fail("needs an (H, W, C) input");
        shape = {shape[2]};
        break;
      case LayerKind::kFlatten:
        shape = {num_elements(shape)};
        break;
      case LayerKind::kDense:
        if (shape.size() != 1) fail("needs a vector input");
        shape = {layer.units};
        break;
      case LayerKind::kPixelShuffle: {
        const std::size_t r = layer.upscale;
        if (shape.size() != 3) fail("needs an (H, W, C) input");
        if (shape[2] % (r * r) != 0) fail("channels not divisible by r^2");
        shape = {shape[0] * r, shape[1] * r, shape[2] / (r * r)};
        break;
      }
    }
    shapes.push_back(shape);
  }
  return shapes;
}

std::vector<Shape> param_shapes(const ModelArchitecture& arch) {
  const std::vector<Shape> outputs = infer_shapes(arch);
  std::vector<Shape> shapes;
  Shape in = arch.input_shape;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& layer = arch.layers[i];
    if (layer.kind == LayerKind::kConv2d) {
      shapes.push_back({layer.kernel_size, layer.kernel_size, in[2], layer.filters});
      shapes.push_back({layer.filters});
    } else if (layer.kind == LayerKind::kDense) {
      shapes.push_back({in[0], layer.units});
      shapes.push_back({layer.units});
    }
    in = outputs[i];
  }
  return shapes;
}

std::vector<std::size_t> layer_param_counts(const ModelArchitecture& arch) {
  const std::vector<Shape> shapes = param_shapes(arch);
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i + 1 < shapes.size(); i += 2) {
    counts.push_back(num_elements(shapes[i]) + num_elements(shapes[i + 1]));
  }
  return counts;
}

std::size_t count_params(const ModelArchitecture& arch) {
  std::size_t total = 0;
  for (std::size_t n : layer_param_counts(arch)) total += n;
  return total;
}

std::vector<Tensor> init_params(const ModelArchitecture& arch, std::uint64_t seed) {
  Rng seeds(seed);
  std::vector<Tensor> params;
  const std::vector<Shape> shapes = param_shapes(arch);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    // Even slots are kernels/weight matrices, odd slots biases.
    const std::uint64_t tensor_seed = seeds.next();
    if (i % 2 == 0) {
      params.push_back(orthogonal_init(shapes[i], tensor_seed));
    } else {
      params.emplace_back(shapes[i]);
    }
  }
  return params;
}

template <typename T>
void check_params(const ModelArchitecture& arch, std::span<const BasicTensor<T>> params) {
  const std::vector<Shape> shapes = param_shapes(arch);
  if (params.size() != shapes.size()) {
    throw ShapeError(arch.name + ": expected " + std::to_string(shapes.size()) +
                     " parameter tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params[i].shape() != shapes[i]) {
      throw ShapeError(arch.name + ": parameter " + std::to_string(i) + " has shape " +
                       to_string(params[i].shape()) + ", expected " +
                       to_string(shapes[i]));
    }
  }
}

namespace {

void check_input(const ModelArchitecture& arch, const Shape& input) {
  if (input.size() != 3 && input.size() != 4) {
    throw ShapeError(arch.name + ": input must be (H, W, C) or (N, H, W, C), got " +
                     to_string(input));
  }
  const std::size_t channels = input.back();
  if (channels != arch.input_shape.at(2)) {
    throw ShapeError(arch.name + ": input " + to_string(input) +
                     " does not match expected channels of " +
                     to_string(arch.input_shape));
  }
  // Architectures ending in a pooled head accept any spatial size; others
  // are still checked by the ops themselves.
  const Shape single(input.end() - 3, input.end());
  infer_shapes(arch, single);
}

template <typename T>
BasicTensor<T> flatten_value(const BasicTensor<T>& v) {
  if (v.rank() == 3) return v.reshaped({v.size()});
  if (v.rank() == 4) return v.reshaped({v.dim(0), v.size() / v.dim(0)});
  return v;
}

}  // namespace

template <typename T>
BasicTensor<T> forward_raw(const ModelArchitecture& arch,
                           std::span<const BasicTensor<std::type_identity_t<T>>> params,
                           const BasicTensor<T>& input) {
  check_params<T>(arch, params);
  check_input(arch, input.shape());
  BasicTensor<T> x = input;
  std::size_t p = 0;
  for (const LayerSpec& layer : arch.layers) {
    switch (layer.kind) {
      case LayerKind::kConv2d:
        x = ops::conv2d(x, params[p], params[p + 1], layer.padding);
        p += 2;
        break;
      case LayerKind::kActivation:
        x = ops::apply_activation(x, layer.activation);
        break;
      case LayerKind::kGlobalAvgPool:
        x = ops::global_avg_pool(x);
        break;
      case LayerKind::kFlatten:
        x = flatten_value(x);
        break;
      case LayerKind::kDense:
        x = ops::dense(x, params[p], params[p + 1]);
        p += 2;
        break;
      case LayerKind::kPixelShuffle:
        x = ops::pixel_shuffle(x, layer.upscale);
        break;
    }
  }
  return x;
}

template <typename T>
BasicTensor<T> forward(const ModelArchitecture& arch,
                       std::span<const BasicTensor<std::type_identity_t<T>>> params,
                       const BasicTensor<T>& input) {
  BasicTensor<T> out = forward_raw<T>(arch, params, input);
  if (arch.clip_output) return ops::clip_unit(out);
  return out;
}

template <typename T>
ad::Var forward_taped(ad::Tape<T>& tape, const ModelArchitecture& arch,
                      std::span<const ad::Var> params, ad::Var input) {
  std::vector<BasicTensor<T>> values;
  values.reserve(params.size());
  for (ad::Var v : params) values.push_back(tape.value(v));
  check_params<T>(arch, values);
  check_input(arch, tape.value(input).shape());

  ad::Var x = input;
  std::size_t p = 0;
  for (const LayerSpec& layer : arch.layers) {
    switch (layer.kind) {
      case LayerKind::kConv2d:
        x = ad::conv2d(tape, x, params[p], params[p + 1], layer.padding);
        p += 2;
        break;
      case LayerKind::kActivation:
        x = ad::activation(tape, x, layer.activation);
        break;
      case LayerKind::kGlobalAvgPool:
        x = ad::global_avg_pool(tape, x);
        break;
      case LayerKind::kFlatten:
        x = ad::flatten(tape, x);
        break;
      case LayerKind::kDense:
        x = ad::dense(tape, x, params[p], params[p + 1]);
        p += 2;
        break;
      case LayerKind::kPixelShuffle:
        x = ad::pixel_shuffle(tape, x, layer.upscale);
        break;
    }
  }
  return x;
}

template <typename T>
std::vector<BasicTensor<T>> conv_trunk_features(
    const ModelArchitecture& arch,
    std::span<const BasicTensor<std::type_identity_t<T>>> params,
    const BasicTensor<T>& input, std::size_t conv_layers) {
  check_params<T>(arch, params);
  if (input.rank() != 3 || input.dim(2) != arch.input_shape.at(2)) {
    throw ShapeError(arch.name + ": feature extractor expects (H, W, " +
                     std::to_string(arch.input_shape.at(2)) + "), got " +
                     to_string(input.shape()));
  }
  std::vector<BasicTensor<T>> features;
  BasicTensor<T> x = input;
  std::size_t p = 0;
  for (std::size_t i = 0; i < arch.layers.size() && features.size() < conv_layers;
       ++i) {
    const LayerSpec& layer = arch.layers[i];
    if (layer.kind != LayerKind::kConv2d) {
      throw std::invalid_argument(arch.name +
                                  ": feature trunk must be a conv/activation stack");
    }
    x = ops::conv2d(x, params[p], params[p + 1], layer.padding);
    p += 2;
    while (i + 1 < arch.layers.size() &&
           arch.layers[i + 1].kind == LayerKind::kActivation) {
      x = ops::apply_activation(x, arch.layers[++i].activation);
    }
    features.push_back(x);
  }
  if (features.size() < conv_layers) {
    throw std::invalid_argument(arch.name + ": fewer than " +
                                std::to_string(conv_layers) + " conv layers");
  }
  return features;
}

#define CRACKRES_INSTANTIATE_MODELS(T)                                             \
  template void check_params(const ModelArchitecture&,                            \
                             std::span<const BasicTensor<T>>);                    \
  template BasicTensor<T> forward_raw<T>(const ModelArchitecture&,                \
                                         std::span<const BasicTensor<T>>,         \
                                         const BasicTensor<T>&);                  \
  template BasicTensor<T> forward<T>(const ModelArchitecture&,                    \
                                     std::span<const BasicTensor<T>>,             \
                                     const BasicTensor<T>&);                      \
  template ad::Var forward_taped(ad::Tape<T>&, const ModelArchitecture&,          \
                                 std::span<const ad::Var>, ad::Var);              \
  template std::vector<BasicTensor<T>> conv_trunk_features<T>(                    \
      const ModelArchitecture&, std::span<const BasicTensor<T>>,                  \
      const BasicTensor<T>&, std::size_t);

CRACKRES_INSTANTIATE_MODELS(float)
CRACKRES_INSTANTIATE_MODELS(double)

#undef CRACKRES_INSTANTIATE_MODELS

}  // namespace crackres
