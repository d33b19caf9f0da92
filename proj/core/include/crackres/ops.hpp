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

// Forward and backward kernels for every operation the two networks use.
//
// Layout is channels-last throughout. Spatial operations accept either a
// single image (H, W, C) or a batch (N, H, W, C) and return the same rank.
// Kernels are stored (k, k, Cin, Cout) row-major, dense weights (n, m).
// All functions are pure; they are instantiated for float and double.

#pragma once

#include <cstddef>

#include "crackres/tensor.hpp"

namespace crackres {

enum class Padding { kSame, kValid };
enum class Activation { kNone, kRelu, kSigmoid };

const char* to_string(Padding padding);
const char* to_string(Activation activation);

namespace ops {

template <typename T>
struct Conv2dGrads {
  BasicTensor<T> input;  // empty when not requested
  BasicTensor<T> kernels;
  BasicTensor<T> bias;
};

template <typename T>
struct DenseGrads {
  BasicTensor<T> input;
  BasicTensor<T> weights;
  BasicTensor<T> bias;
};

/// Stride-1 2-D cross-correlation. SAME pads (k - 1) / 2 zeros on every side.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input,
                      const BasicTensor<T>& kernels,
                      const BasicTensor<T>& bias, Padding padding);

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& input,
                               const BasicTensor<T>& kernels,
                               const BasicTensor<T>& grad_output,
                               Padding padding, bool need_input_grad);

/// Output spatial extent of a stride-1 convolution.
std::size_t conv_output_extent(std::size_t extent, std::size_t kernel_size,
                               Padding padding);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input,
                             const BasicTensor<T>& grad_output);

/// 1 / (1 + exp(-x)), kept strictly inside (0, 1) even for saturated inputs.
template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input);
/// Takes the sigmoid *output*, not its input.
template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output,
                                const BasicTensor<T>& grad_output);

template <typename T>
BasicTensor<T> apply_activation(const BasicTensor<T>& input, Activation kind);

/// (H, W, C) -> (C) or (N, H, W, C) -> (N, C).
template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& input);
template <typename T>
BasicTensor<T> global_avg_pool_backward(const Shape& input_shape,
                                        const BasicTensor<T>& grad_output);

/// (n) -> (m) or (N, n) -> (N, m).
template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                     const BasicTensor<T>& bias);
template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& input,
                             const BasicTensor<T>& weights,
                             const BasicTensor<T>& grad_output,
                             bool need_input_grad);

/// (H, W, c*r*r) -> (H*r, W*r, c) with
///   out[h*r + i, w*r + j, ch] = in[h, w, ch*r*r + i*r + j].
template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& input, std::size_t r);

/// Exact inverse of pixel_shuffle; also its adjoint.
template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& input, std::size_t r);

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy. Predictions are clamped to
/// [kBceEpsilon, 1 - kBceEpsilon]; labels must be exactly 0 or 1.
template <typename T>
T bce_loss(const BasicTensor<T>& predictions, const BasicTensor<T>& labels);
/// Zero where the clamp is active.
template <typename T>
BasicTensor<T> bce_backward(const BasicTensor<T>& predictions,
                            const BasicTensor<T>& labels);

template <typename T>
T mse_loss(const BasicTensor<T>& predictions, const BasicTensor<T>& targets);
template <typename T>
BasicTensor<T> mse_backward(const BasicTensor<T>& predictions,
                            const BasicTensor<T>& targets);

template <typename T>
BasicTensor<T> clip_unit(const BasicTensor<T>& input);

}  // namespace ops
}  // namespace crackres
