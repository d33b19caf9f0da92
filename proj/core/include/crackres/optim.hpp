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

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "crackres/tensor.hpp"

namespace crackres {

/// Raised when training cannot continue (non-finite loss or gradient,
/// degenerate data).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// Per-parameter Adam moments. `step` counts completed updates.
template <typename T>
struct BasicAdamState {
  BasicTensor<T> m;
  BasicTensor<T> v;
  std::int64_t step = 0;

  BasicAdamState() = default;
  explicit BasicAdamState(const Shape& shape) : m(shape), v(shape) {}
};

using AdamState = BasicAdamState<float>;

/// One bias-corrected Adam update, in place:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps).
/// Throws TrainingError on a non-finite gradient, leaving param and state
/// untouched.
template <typename T>
void adam_step(BasicTensor<T>& param, const BasicTensor<T>& grad,
               BasicAdamState<T>& state, double lr, const AdamParams& params = {});

/// Piecewise-constant learning rate indexed by epoch.
struct LrSchedule {
  std::vector<std::int64_t> boundaries;
  std::vector<double> values;

  /// Throws std::invalid_argument unless values.size() == boundaries.size() + 1
  /// and boundaries are strictly increasing.
  void validate() const;
};

/// values[i] where i is the number of boundaries <= epoch.
double lr_at(const LrSchedule& schedule, std::int64_t epoch);

}  // namespace crackres
