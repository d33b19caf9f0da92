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

#include "crackres/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace crackres {

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ')';
  return out.str();
}

template <typename T>
bool all_finite(const BasicTensor<T>& t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](T v) { return std::isfinite(v); });
}
template bool all_finite(const BasicTensor<float>&);
template bool all_finite(const BasicTensor<double>&);

const char* to_string(Padding padding) {
  return padding == Padding::kSame ? "same" : "valid";
}

const char* to_string(Activation activation) {
  switch (activation) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kNone:
      break;
  }
  return "none";
}

namespace ops {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using ConstRowVector = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

// Column sums of a row-major (rows, cols) buffer, accumulated row by row.
// Eigen's colwise().sum() on a Map peels by address, so its rounding would
// depend on where the allocator put the buffer.
template <typename T>
BasicTensor<T> column_sums(const T* data, std::size_t rows, std::size_t cols) {
  BasicTensor<T> out(Shape{cols});
  T* acc = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = data + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc[c] += row[c];
  }
  return out;
}

// Batched view of a (H, W, C) or (N, H, W, C) tensor.
struct ImageDims {
  std::size_t n, h, w, c;
};

ImageDims image_dims(const Shape& shape, const char* op) {
  if (shape.size() == 3) return {1, shape[0], shape[1], shape[2]};
  if (shape.size() == 4) return {shape[0], shape[1], shape[2], shape[3]};
  throw ShapeError(std::string(op) + ": expected (H, W, C) or (N, H, W, C), got " +
                   to_string(shape));
}

Shape image_shape(const ImageDims& d, bool batched) {
  if (batched) return {d.n, d.h, d.w, d.c};
  return {d.h, d.w, d.c};
}

struct ConvGeometry {
  ImageDims in;
  std::size_t k, cout, out_h, out_w, pad;
};

ConvGeometry conv_geometry(const Shape& input, const Shape& kernels,
                           Padding padding) {
  ConvGeometry g{};
  g.in = image_dims(input, "conv2d");
  if (kernels.size() != 4 || kernels[0] != kernels[1]) {
    throw ShapeError("conv2d: kernels must be (k, k, Cin, Cout), got " +
                     to_string(kernels));
  }
  g.k = kernels[0];
  if (g.k % 2 == 0) {
    throw ShapeError("conv2d: kernel size must be odd, got " + to_string(kernels));
  }
  if (kernels[2] != g.in.c) {
    throw ShapeError("conv2d: input " + to_string(input) +
                     " has channel count different from kernels " +
                     to_string(kernels));
  }
  g.cout = kernels[3];
  if (padding == Padding::kValid && (g.in.h < g.k || g.in.w < g.k)) {
    throw ShapeError("conv2d: VALID kernel " + to_string(kernels) +
                     " larger than input " + to_string(input));
  }
  g.out_h = conv_output_extent(g.in.h, g.k, padding);
  g.out_w = conv_output_extent(g.in.w, g.k, padding);
  g.pad = padding == Padding::kSame ? (g.k - 1) / 2 : 0;
  return g;
}

// Row (n, oy, ox) of the patch matrix holds the window in (ky, kx, ci) order,
// which matches the row-major flattening of a (k, k, Cin, Cout) kernel.
template <typename T>
RowMatrix<T> im2col(const T* src, const ConvGeometry& g) {
  const std::size_t patch = g.k * g.k * g.in.c;
  RowMatrix<T> cols(g.in.n * g.out_h * g.out_w, patch);
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  T* row = cols.data();
  for (std::size_t n = 0; n < g.in.n; ++n) {
    const T* image = src + n * g.in.h * g.in.w * g.in.c;
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox, row += patch) {
        T* dst = row;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy + ky) - pad;
          if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in.h)) {
            std::fill(dst, dst + g.k * g.in.c, T{0});
            dst += g.k * g.in.c;
            continue;
          }
          for (std::size_t kx = 0; kx < g.k; ++kx, dst += g.in.c) {
            const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox + kx) - pad;
            if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in.w)) {
              std::fill(dst, dst + g.in.c, T{0});
            } else {
              const T* px = image + (static_cast<std::size_t>(y) * g.in.w +
                                     static_cast<std::size_t>(x)) * g.in.c;
              std::copy(px, px + g.in.c, dst);
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im(const RowMatrix<T>& cols, const ConvGeometry& g, T* dst) {
  const std::size_t patch = g.k * g.k * g.in.c;
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  const T* row = cols.data();
  for (std::size_t n = 0; n < g.in.n; ++n) {
    T* image = dst + n * g.in.h * g.in.w * g.in.c;
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox, row += patch) {
        const T* src = row;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy + ky) - pad;
          if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in.h)) {
            src += g.k * g.in.c;
            continue;
          }
          for (std::size_t kx = 0; kx < g.k; ++kx, src += g.in.c) {
            const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox + kx) - pad;
            if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in.w)) continue;
            T* px = image + (static_cast<std::size_t>(y) * g.in.w +
                             static_cast<std::size_t>(x)) * g.in.c;
            for (std::size_t c = 0; c < g.in.c; ++c) px[c] += src[c];
          }
        }
      }
    }
  }
}

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b,
                        const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t extent, std::size_t kernel_size,
                               Padding padding) {
  if (padding == Padding::kSame) return extent;
  return extent + 1 - kernel_size;
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                      const BasicTensor<T>& bias, Padding padding) {
  const ConvGeometry g = conv_geometry(input.shape(), kernels.shape(), padding);
  if (bias.shape() != Shape{g.cout}) {
    throw ShapeError("conv2d: bias " + to_string(bias.shape()) +
                     " does not match kernels " + to_string(kernels.shape()));
  }
  const RowMatrix<T> cols = im2col(input.data().data(), g);
  ImageDims out_dims{g.in.n, g.out_h, g.out_w, g.cout};
  BasicTensor<T> output(image_shape(out_dims, input.rank() == 4));
  MatrixMap<T> out(output.data().data(), static_cast<Eigen::Index>(cols.rows()),
                   static_cast<Eigen::Index>(g.cout));
  ConstMatrixMap<T> weights(kernels.data().data(), cols.cols(),
                            static_cast<Eigen::Index>(g.cout));
  out.noalias() = cols * weights;
  out.rowwise() += ConstRowVector<T>(bias.data().data(),
                                     static_cast<Eigen::Index>(g.cout));
  return output;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& input,
                               const BasicTensor<T>& kernels,
                               const BasicTensor<T>& grad_output,
                               Padding padding, bool need_input_grad) {
  const ConvGeometry g = conv_geometry(input.shape(), kernels.shape(), padding);
  const auto rows = static_cast<Eigen::Index>(g.in.n * g.out_h * g.out_w);
  if (grad_output.size() != static_cast<std::size_t>(rows) * g.cout) {
    throw ShapeError("conv2d_backward: gradient " + to_string(grad_output.shape()) +
                     " does not match output geometry");
  }
  const RowMatrix<T> cols = im2col(input.data().data(), g);
  ConstMatrixMap<T> dout(grad_output.data().data(), rows,
                         static_cast<Eigen::Index>(g.cout));
  ConstMatrixMap<T> weights(kernels.data().data(), cols.cols(),
                            static_cast<Eigen::Index>(g.cout));

  Conv2dGrads<T> grads;
  grads.kernels = BasicTensor<T>(kernels.shape());
  MatrixMap<T> dweights(grads.kernels.data().data(), cols.cols(),
                        static_cast<Eigen::Index>(g.cout));
  dweights.noalias() = cols.transpose() * dout;

  grads.bias = column_sums(grad_output.data().data(), static_cast<std::size_t>(rows), g.cout);

  if (need_input_grad) {
    const RowMatrix<T> dcols = dout * weights.transpose();
    grads.input = BasicTensor<T>(input.shape());
    col2im(dcols, g, grads.input.data().data());
  }
  return grads;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out = input;
  for (T& v : out.values()) v = v > T{0} ? v : T{0};
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input,
                             const BasicTensor<T>& grad_output) {
  require_same_shape(input, grad_output, "relu_backward");
  BasicTensor<T> grad = grad_output;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(input[i] > T{0})) grad[i] = T{0};
  }
  return grad;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input) {
  BasicTensor<T> out = input;
  for (T& v : out.values()) {
    // Split by sign so exp never overflows.
    if (v >= T{0}) {
      v = T{1} / (T{1} + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T{1} + e);
    }
    // Saturated logits would round to exactly 0 or 1; keep the open interval.
    v = std::clamp(v, std::numeric_limits<T>::min(),
                   T{1} - std::numeric_limits<T>::epsilon() / T{2});
  }
  return out;
}

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output,
                                const BasicTensor<T>& grad_output) {
  require_same_shape(output, grad_output, "sigmoid_backward");
  BasicTensor<T> grad = grad_output;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] *= output[i] * (T{1} - output[i]);
  }
  return grad;
}

template <typename T>
BasicTensor<T> apply_activation(const BasicTensor<T>& input, Activation kind) {
  switch (kind) {
    case Activation::kRelu:
      return relu(input);
    case Activation::kSigmoid:
      return sigmoid(input);
    case Activation::kNone:
      break;
  }
  return input;
}

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& input) {
  const ImageDims d = image_dims(input.shape(), "global_avg_pool");
  BasicTensor<T> out(input.rank() == 4 ? Shape{d.n, d.c} : Shape{d.c});
  const std::size_t area = d.h * d.w;
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* src = input.data().data() + n * area * d.c;
    T* dst = out.data().data() + n * d.c;
    for (std::size_t p = 0; p < area; ++p) {
      for (std::size_t c = 0; c < d.c; ++c) dst[c] += src[p * d.c + c];
    }
    for (std::size_t c = 0; c < d.c; ++c) dst[c] /= static_cast<T>(area);
  }
  return out;
}

template <typename T>
BasicTensor<T> global_avg_pool_backward(const Shape& input_shape,
                                        const BasicTensor<T>& grad_output) {
  const ImageDims d = image_dims(input_shape, "global_avg_pool_backward");
  if (grad_output.size() != d.n * d.c) {
    throw ShapeError("global_avg_pool_backward: gradient " +
                     to_string(grad_output.shape()) + " does not match input " +
                     to_string(input_shape));
  }
  BasicTensor<T> grad(input_shape);
  const std::size_t area = d.h * d.w;
  const T scale = T{1} / static_cast<T>(area);
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* src = grad_output.data().data() + n * d.c;
    T* dst = grad.data().data() + n * area * d.c;
    for (std::size_t p = 0; p < area; ++p) {
      for (std::size_t c = 0; c < d.c; ++c) dst[p * d.c + c] = src[c] * scale;
    }
  }
  return grad;
}

namespace {

struct DenseDims {
  std::size_t batch, in, out;
};

DenseDims dense_dims(const Shape& input, const Shape& weights) {
  if (weights.size() != 2) {
    throw ShapeError("dense: weights must be (n, m), got " + to_string(weights));
  }
  DenseDims d{};
  if (input.size() == 1) {
    d = {1, input[0], weights[1]};
  } else if (input.size() == 2) {
    d = {input[0], input[1], weights[1]};
  } else {
    throw ShapeError("dense: input must be (n) or (N, n), got " + to_string(input));
  }
  if (d.in != weights[0]) {
    throw ShapeError("dense: input " + to_string(input) +
                     " does not match weights " + to_string(weights));
  }
  return d;
}

}  // namespace

template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                     const BasicTensor<T>& bias) {
  const DenseDims d = dense_dims(input.shape(), weights.shape());
  if (bias.shape() != Shape{d.out}) {
    throw ShapeError("dense: bias " + to_string(bias.shape()) +
                     " does not match weights " + to_string(weights.shape()));
  }
  BasicTensor<T> output(input.rank() == 2 ? Shape{d.batch, d.out} : Shape{d.out});
  const auto b = static_cast<Eigen::Index>(d.batch);
  const auto n = static_cast<Eigen::Index>(d.in);
  const auto m = static_cast<Eigen::Index>(d.out);
  MatrixMap<T> out(output.data().data(), b, m);
  out.noalias() = ConstMatrixMap<T>(input.data().data(), b, n) *
                  ConstMatrixMap<T>(weights.data().data(), n, m);
  out.rowwise() += ConstRowVector<T>(bias.data().data(), m);
  return output;
}

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& input,
                             const BasicTensor<T>& weights,
                             const BasicTensor<T>& grad_output,
                             bool need_input_grad) {
  const DenseDims d = dense_dims(input.shape(), weights.shape());
  if (grad_output.size() != d.batch * d.out) {
    throw ShapeError("dense_backward: gradient " + to_string(grad_output.shape()) +
                     " does not match output");
  }
  const auto b = static_cast<Eigen::Index>(d.batch);
  const auto n = static_cast<Eigen::Index>(d.in);
  const auto m = static_cast<Eigen::Index>(d.out);
  ConstMatrixMap<T> x(input.data().data(), b, n);
  ConstMatrixMap<T> dout(grad_output.data().data(), b, m);

  DenseGrads<T> grads;
  grads.weights = BasicTensor<T>(weights.shape());
  MatrixMap<T>(grads.weights.data().data(), n, m).noalias() = x.transpose() * dout;
  grads.bias = column_sums(grad_output.data().data(), d.batch, d.out);
  if (need_input_grad) {
    grads.input = BasicTensor<T>(input.shape());
    MatrixMap<T>(grads.input.data().data(), b, n).noalias() =
        dout * ConstMatrixMap<T>(weights.data().data(), n, m).transpose();
  }
  return grads;
}

template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& input, std::size_t r) {
  const ImageDims d = image_dims(input.shape(), "pixel_shuffle");
  if (r == 0 || d.c % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: channels of " + to_string(input.shape()) +
                     " not divisible by r^2 = " + std::to_string(r * r));
  }
  const std::size_t oc = d.c / (r * r);
  const ImageDims od{d.n, d.h * r, d.w * r, oc};
  BasicTensor<T> output(image_shape(od, input.rank() == 4));
  const T* src = input.data().data();
  T* dst = output.data().data();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t h = 0; h < d.h; ++h) {
      for (std::size_t w = 0; w < d.w; ++w) {
        const T* px = src + ((n * d.h + h) * d.w + w) * d.c;
        for (std::size_t ch = 0; ch < oc; ++ch) {
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
              dst[((n * od.h + h * r + i) * od.w + w * r + j) * oc + ch] =
                  px[ch * r * r + i * r + j];
            }
          }
        }
      }
    }
  }
  return output;
}

template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& input, std::size_t r) {
  const ImageDims d = image_dims(input.shape(), "pixel_unshuffle");
  if (r == 0 || d.h % r != 0 || d.w % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial dims of " + to_string(input.shape()) +
                     " not divisible by r = " + std::to_string(r));
  }
  const ImageDims od{d.n, d.h / r, d.w / r, d.c * r * r};
  BasicTensor<T> output(image_shape(od, input.rank() == 4));
  const T* src = input.data().data();
  T* dst = output.data().data();
  for (std::size_t n = 0; n < od.n; ++n) {
    for (std::size_t h = 0; h < od.h; ++h) {
      for (std::size_t w = 0; w < od.w; ++w) {
        T* px = dst + ((n * od.h + h) * od.w + w) * od.c;
        for (std::size_t ch = 0; ch < d.c; ++ch) {
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
              px[ch * r * r + i * r + j] =
                  src[((n * d.h + h * r + i) * d.w + w * r + j) * d.c + ch];
            }
          }
        }
      }
    }
  }
  return output;
}

namespace {

template <typename T>
void require_binary_labels(const BasicTensor<T>& labels) {
  for (T y : labels.values()) {
    if (y != T{0} && y != T{1}) {
      throw std::invalid_argument("bce_loss: label " + std::to_string(y) +
                                  " is not 0 or 1");
    }
  }
}

}  // namespace

template <typename T>
T bce_loss(const BasicTensor<T>& predictions, const BasicTensor<T>& labels) {
  require_same_shape(predictions, labels, "bce_loss");
  require_binary_labels(labels);
  const T lo = static_cast<T>(kBceEpsilon);
  const T hi = T{1} - lo;
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = std::clamp(predictions[i], lo, hi);
    const double y = labels[i];
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return static_cast<T>(total / static_cast<double>(predictions.size()));
}

template <typename T>
BasicTensor<T> bce_backward(const BasicTensor<T>& predictions,
                            const BasicTensor<T>& labels) {
  require_same_shape(predictions, labels, "bce_backward");
  require_binary_labels(labels);
  const T lo = static_cast<T>(kBceEpsilon);
  const T hi = T{1} - lo;
  const T inv_n = T{1} / static_cast<T>(predictions.size());
  BasicTensor<T> grad(predictions.shape());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const T p = predictions[i];
    if (p < lo || p > hi) continue;
    const T y = labels[i];
    grad[i] = inv_n * (-y / p + (T{1} - y) / (T{1} - p));
  }
  return grad;
}

template <typename T>
T mse_loss(const BasicTensor<T>& predictions, const BasicTensor<T>& targets) {
  require_same_shape(predictions, targets, "mse_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double diff = static_cast<double>(predictions[i]) - targets[i];
    total += diff * diff;
  }
  return static_cast<T>(total / static_cast<double>(predictions.size()));
}

template <typename T>
BasicTensor<T> mse_backward(const BasicTensor<T>& predictions,
                            const BasicTensor<T>& targets) {
  require_same_shape(predictions, targets, "mse_backward");
  const T scale = T{2} / static_cast<T>(predictions.size());
  BasicTensor<T> grad(predictions.shape());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    grad[i] = scale * (predictions[i] - targets[i]);
  }
  return grad;
}

template <typename T>
BasicTensor<T> clip_unit(const BasicTensor<T>& input) {
  BasicTensor<T> out = input;
  for (T& v : out.values()) v = std::clamp(v, T{0}, T{1});
  return out;
}

#define CRACKRES_INSTANTIATE_OPS(T)                                                 \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,      \
                                 const BasicTensor<T>&, Padding);                   \
  template Conv2dGrads<T> conv2d_backward(const BasicTensor<T>&,                    \
                                          const BasicTensor<T>&,                    \
                                          const BasicTensor<T>&, Padding, bool);    \
  template BasicTensor<T> relu(const BasicTensor<T>&);                              \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&,                      \
                                        const BasicTensor<T>&);                     \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                           \
  template BasicTensor<T> sigmoid_backward(const BasicTensor<T>&,                   \
                                           const BasicTensor<T>&);                  \
  template BasicTensor<T> apply_activation(const BasicTensor<T>&, Activation);      \
  template BasicTensor<T> global_avg_pool(const BasicTensor<T>&);                   \
  template BasicTensor<T> global_avg_pool_backward(const Shape&,                    \
                                                   const BasicTensor<T>&);          \
  template BasicTensor<T> dense(const BasicTensor<T>&, const BasicTensor<T>&,       \
                                const BasicTensor<T>&);                             \
  template DenseGrads<T> dense_backward(const BasicTensor<T>&,                      \
                                        const BasicTensor<T>&,                      \
                                        const BasicTensor<T>&, bool);               \
  template BasicTensor<T> pixel_shuffle(const BasicTensor<T>&, std::size_t);        \
  template BasicTensor<T> pixel_unshuffle(const BasicTensor<T>&, std::size_t);      \
  template T bce_loss(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> bce_backward(const BasicTensor<T>&,                       \
                                       const BasicTensor<T>&);                      \
  template T mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> mse_backward(const BasicTensor<T>&,                       \
                                       const BasicTensor<T>&);                      \
  template BasicTensor<T> clip_unit(const BasicTensor<T>&);

CRACKRES_INSTANTIATE_OPS(float)
CRACKRES_INSTANTIATE_OPS(double)

#undef CRACKRES_INSTANTIATE_OPS

}  // namespace ops
}  // namespace crackres
