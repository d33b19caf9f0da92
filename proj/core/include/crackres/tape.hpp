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

// Reverse-mode differentiation over the ops in ops.hpp.
//
// A Tape records nodes in creation order, which is already a topological
// order, so backward() is a single reverse sweep. Each node's backward
// closure adds into its inputs' gradients; fan-out therefore accumulates.
// A tape belongs to one training step on one thread.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "crackres/ops.hpp"
#include "crackres/tensor.hpp"

namespace crackres::ad {

enum class OpKind {
  kLeaf,
  kConv2d,
  kRelu,
  kSigmoid,
  kGlobalAvgPool,
  kFlatten,
  kDense,
  kPixelShuffle,
  kBceLoss,
  kMseLoss,
  kWeightedSum,
};

const char* to_string(OpKind kind);

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

template <typename T>
class Tape {
 public:
  using TensorT = BasicTensor<T>;
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Var leaf(TensorT value, bool requires_grad = true);

  /// Appends a node. `backward` may be empty for nodes that need no gradient.
  Var record(OpKind kind, std::vector<std::size_t> inputs, TensorT value,
             BackwardFn backward);

  const TensorT& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward() root with respect to `v`. Zero-filled
  /// when nothing reached the node.
  TensorT grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }
  const std::vector<std::size_t>& inputs(Var v) const {
    return nodes_.at(v.id).inputs;
  }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1; root must hold a single element.
  void backward(Var root);

  /// Adds `g` into the gradient of node `id` (no-op if it needs no gradient).
  void accumulate(std::size_t id, const TensorT& g);
  const TensorT& grad_ref(std::size_t id) const { return nodes_[id].grad; }
  const TensorT& value_ref(std::size_t id) const { return nodes_[id].value; }

  /// Number of node visits made by the last backward(); test hook.
  std::size_t last_backward_visits() const noexcept { return visits_; }

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> inputs;
    TensorT value;
    TensorT grad;
    bool requires_grad;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::size_t visits_ = 0;
};

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var kernels, Var bias, Padding padding);
template <typename T>
Var relu(Tape<T>& tape, Var input);
template <typename T>
Var sigmoid(Tape<T>& tape, Var input);
template <typename T>
Var activation(Tape<T>& tape, Var input, Activation kind);
template <typename T>
Var global_avg_pool(Tape<T>& tape, Var input);
/// Collapses (H, W, C)->(HWC) or (N, ...)->(N, rest); identity on (C) and (N, C).
template <typename T>
Var flatten(Tape<T>& tape, Var input);
template <typename T>
Var dense(Tape<T>& tape, Var input, Var weights, Var bias);
template <typename T>
Var pixel_shuffle(Tape<T>& tape, Var input, std::size_t r);
template <typename T>
Var bce_loss(Tape<T>& tape, Var predictions, const BasicTensor<T>& labels);
template <typename T>
Var mse_loss(Tape<T>& tape, Var predictions, const BasicTensor<T>& targets);
/// Scalar sum(input * weights); projects tensor outputs for gradient checks.
template <typename T>
Var weighted_sum(Tape<T>& tape, Var input, const BasicTensor<T>& weights);

}  // namespace crackres::ad
