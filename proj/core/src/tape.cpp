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

#include "crackres/tape.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace crackres::ad {

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kGlobalAvgPool: return "global_avg_pool";
    case OpKind::kFlatten: return "flatten";
    case OpKind::kDense: return "dense";
    case OpKind::kPixelShuffle: return "pixel_shuffle";
    case OpKind::kBceLoss: return "bce_loss";
    case OpKind::kMseLoss: return "mse_loss";
    case OpKind::kWeightedSum: return "weighted_sum";
  }
  return "unknown";
}

template <typename T>
Var Tape<T>::leaf(TensorT value, bool requires_grad) {
  nodes_.push_back(Node{OpKind::kLeaf, {}, std::move(value), {}, requires_grad, {}});
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Tape<T>::record(OpKind kind, std::vector<std::size_t> inputs, TensorT value,
                    BackwardFn backward) {
  bool needs = false;
  for (std::size_t id : inputs) {
    if (id >= nodes_.size()) throw std::out_of_range("tape: dangling input");
    needs = needs || nodes_[id].requires_grad;
  }
  if (!needs) backward = nullptr;
  nodes_.push_back(Node{kind, std::move(inputs), std::move(value), {},
                        needs && backward != nullptr, std::move(backward)});
  return Var{nodes_.size() - 1};
}

template <typename T>
typename Tape<T>::TensorT Tape<T>::grad(Var v) const {
  const Node& node = nodes_.at(v.id);
  if (node.grad.empty()) return TensorT(node.value.shape());
  return node.grad;
}

template <typename T>
void Tape<T>::accumulate(std::size_t id, const TensorT& g) {
  Node& node = nodes_.at(id);
  if (!node.requires_grad) return;
  if (g.size() != node.value.size()) {
    throw ShapeError("tape: gradient " + crackres::to_string(g.shape()) +
                     " does not match value " +
                     crackres::to_string(node.value.shape()));
  }
  if (node.grad.empty()) {
    node.grad = g.reshaped(node.value.shape());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

template <typename T>
void Tape<T>::backward(Var root) {
  if (nodes_.at(root.id).value.size() != 1) {
    throw ShapeError("tape: backward root must be a scalar, got " +
                     crackres::to_string(nodes_[root.id].value.shape()));
  }
  for (Node& node : nodes_) node.grad = TensorT();
  visits_ = 0;
  nodes_[root.id].grad = TensorT(nodes_[root.id].value.shape(), T{1});
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.grad.empty() || !node.backward) continue;
    ++visits_;
    node.backward(*this, id);
  }
}

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var kernels, Var bias, Padding padding) {
  auto out = ops::conv2d(tape.value(input), tape.value(kernels), tape.value(bias),
                         padding);
  const std::size_t x = input.id, k = kernels.id, b = bias.id;
  return tape.record(
      OpKind::kConv2d, {x, k, b}, std::move(out),
      [x, k, b, padding](Tape<T>& t, std::size_t self) {
        auto grads = ops::conv2d_backward(t.value_ref(x), t.value_ref(k),
                                          t.grad_ref(self), padding,
                                          t.requires_grad(Var{x}));
        if (!grads.input.empty()) t.accumulate(x, grads.input);
        t.accumulate(k, grads.kernels);
        t.accumulate(b, grads.bias);
      });
}

template <typename T>
Var relu(Tape<T>& tape, Var input) {
  const std::size_t x = input.id;
  return tape.record(OpKind::kRelu, {x}, ops::relu(tape.value(input)),
                     [x](Tape<T>& t, std::size_t self) {
                       t.accumulate(x, ops::relu_backward(t.value_ref(x),
                                                          t.grad_ref(self)));
                     });
}

template <typename T>
Var sigmoid(Tape<T>& tape, Var input) {
  const std::size_t x = input.id;
  return tape.record(OpKind::kSigmoid, {x}, ops::sigmoid(tape.value(input)),
                     [x](Tape<T>& t, std::size_t self) {
                       t.accumulate(x, ops::sigmoid_backward(t.value_ref(self),
                                                             t.grad_ref(self)));
                     });
}

template <typename T>
Var activation(Tape<T>& tape, Var input, Activation kind) {
  switch (kind) {
    case Activation::kRelu:
      return relu(tape, input);
    case Activation::kSigmoid:
      return sigmoid(tape, input);
    case Activation::kNone:
      break;
  }
  return input;
}

template <typename T>
Var global_avg_pool(Tape<T>& tape, Var input) {
  const std::size_t x = input.id;
  return tape.record(OpKind::kGlobalAvgPool, {x},
                     ops::global_avg_pool(tape.value(input)),
                     [x](Tape<T>& t, std::size_t self) {
                       t.accumulate(x, ops::global_avg_pool_backward(
                                           t.value_ref(x).shape(), t.grad_ref(self)));
                     });
}

template <typename T>
Var flatten(Tape<T>& tape, Var input) {
  const auto& v = tape.value(input);
  Shape shape;
  if (v.rank() <= 1) {
    shape = v.shape();
  } else if (v.rank() == 3) {
    shape = {v.size()};
  } else {
    shape = {v.dim(0), v.size() / v.dim(0)};
  }
  const std::size_t x = input.id;
  // accumulate() restores the input shape, so the gradient passes through.
  return tape.record(OpKind::kFlatten, {x}, v.reshaped(shape),
                     [x](Tape<T>& t, std::size_t self) {
                       t.accumulate(x, t.grad_ref(self));
                     });
}

template <typename T>
Var dense(Tape<T>& tape, Var input, Var weights, Var bias) {
  auto out = ops::dense(tape.value(input), tape.value(weights), tape.value(bias));
  const std::size_t x = input.id, w = weights.id, b = bias.id;
  return tape.record(OpKind::kDense, {x, w, b}, std::move(out),
                     [x, w, b](Tape<T>& t, std::size_t self) {
                       auto grads = ops::dense_backward(
                           t.value_ref(x), t.value_ref(w), t.grad_ref(self),
                           t.requires_grad(Var{x}));
                       if (!grads.input.empty()) t.accumulate(x, grads.input);
                       t.accumulate(w, grads.weights);
                       t.accumulate(b, grads.bias);
                     });
}

template <typename T>
Var pixel_shuffle(Tape<T>& tape, Var input, std::size_t r) {
  const std::size_t x = input.id;
  return tape.record(OpKind::kPixelShuffle, {x},
                     ops::pixel_shuffle(tape.value(input), r),
                     [x, r](Tape<T>& t, std::size_t self) {
                       t.accumulate(x, ops::pixel_unshuffle(t.grad_ref(self), r));
                     });
}

template <typename T>
Var bce_loss(Tape<T>& tape, Var predictions, const BasicTensor<T>& labels) {
  const std::size_t p = predictions.id;
  const T loss = ops::bce_loss(tape.value(predictions), labels);
  return tape.record(OpKind::kBceLoss, {p}, BasicTensor<T>(Shape{1}, {loss}),
                     [p, labels](Tape<T>& t, std::size_t self) {
                       auto g = ops::bce_backward(t.value_ref(p), labels);
                       const T seed = t.grad_ref(self)[0];
                       for (T& v : g.values()) v *= seed;
                       t.accumulate(p, g);
                     });
}

template <typename T>
Var mse_loss(Tape<T>& tape, Var predictions, const BasicTensor<T>& targets) {
  const std::size_t p = predictions.id;
  const T loss = ops::mse_loss(tape.value(predictions), targets);
  return tape.record(OpKind::kMseLoss, {p}, BasicTensor<T>(Shape{1}, {loss}),
                     [p, targets](Tape<T>& t, std::size_t self) {
                       auto g = ops::mse_backward(t.value_ref(p), targets);
                       const T seed = t.grad_ref(self)[0];
                       for (T& v : g.values()) v *= seed;
                       t.accumulate(p, g);
                     });
}

template <typename T>
Var weighted_sum(Tape<T>& tape, Var input, const BasicTensor<T>& weights) {
  const auto& v = tape.value(input);
  if (v.size() != weights.size()) {
    throw ShapeError("weighted_sum: " + crackres::to_string(v.shape()) + " vs " +
                     crackres::to_string(weights.shape()));
  }
  T total{0};
  for (std::size_t i = 0; i < v.size(); ++i) total += v[i] * weights[i];
  const std::size_t x = input.id;
  return tape.record(OpKind::kWeightedSum, {x}, BasicTensor<T>(Shape{1}, {total}),
                     [x, weights](Tape<T>& t, std::size_t self) {
                       BasicTensor<T> g = weights;
                       const T seed = t.grad_ref(self)[0];
                       for (T& w : g.values()) w *= seed;
                       t.accumulate(x, g);
                     });
}

#define CRACKRES_INSTANTIATE_TAPE(T)                                              \
  template class Tape<T>;                                                         \
  template Var conv2d(Tape<T>&, Var, Var, Var, Padding);                          \
  template Var relu(Tape<T>&, Var);                                               \
  template Var sigmoid(Tape<T>&, Var);                                            \
  template Var activation(Tape<T>&, Var, Activation);                             \
  template Var global_avg_pool(Tape<T>&, Var);                                    \
  template Var flatten(Tape<T>&, Var);                                            \
  template Var dense(Tape<T>&, Var, Var, Var);                                    \
  template Var pixel_shuffle(Tape<T>&, Var, std::size_t);                         \
  template Var bce_loss(Tape<T>&, Var, const BasicTensor<T>&);                    \
  template Var mse_loss(Tape<T>&, Var, const BasicTensor<T>&);                    \
  template Var weighted_sum(Tape<T>&, Var, const BasicTensor<T>&);

CRACKRES_INSTANTIATE_TAPE(float)
CRACKRES_INSTANTIATE_TAPE(double)

#undef CRACKRES_INSTANTIATE_TAPE

}  // namespace crackres::ad
