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

#include "crackres/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crackres {

template <typename T>
void adam_step(BasicTensor<T>& param, const BasicTensor<T>& grad,
               BasicAdamState<T>& state, double lr, const AdamParams& params) {
  if (param.shape() != grad.shape()) {
    throw ShapeError("adam_step: parameter " + to_string(param.shape()) +
                     " vs gradient " + to_string(grad.shape()));
  }
  if (state.m.empty()) state = BasicAdamState<T>(param.shape());
  if (state.m.shape() != param.shape() || state.v.shape() != param.shape()) {
    throw ShapeError("adam_step: optimizer state does not match parameter " +
                     to_string(param.shape()));
  }
  if (!all_finite(grad)) {
    throw TrainingError("adam_step: non-finite gradient for parameter of shape " +
                        to_string(param.shape()));
  }

  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(params.beta1);
  const T b2 = static_cast<T>(params.beta2);
  const T m_correction = static_cast<T>(1.0 / (1.0 - std::pow(params.beta1, t)));
  const T v_correction = static_cast<T>(1.0 / (1.0 - std::pow(params.beta2, t)));
  const T rate = static_cast<T>(lr);
  const T eps = static_cast<T>(params.epsilon);

  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    T& m = state.m[i];
    T& v = state.v[i];
    m = b1 * m + (T{1} - b1) * g;
    v = b2 * v + (T{1} - b2) * g * g;
    const T m_hat = m * m_correction;
    const T v_hat = v * v_correction;
    param[i] -= rate * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template void adam_step(BasicTensor<float>&, const BasicTensor<float>&,
                        BasicAdamState<float>&, double, const AdamParams&);
template void adam_step(BasicTensor<double>&, const BasicTensor<double>&,
                        BasicAdamState<double>&, double, const AdamParams&);

void LrSchedule::validate() const {
  if (values.size() != boundaries.size() + 1) {
    throw std::invalid_argument(
        "learning-rate schedule needs one more value than boundaries (got " +
        std::to_string(values.size()) + " values, " +
        std::to_string(boundaries.size()) + " boundaries)");
  }
  if (!std::is_sorted(boundaries.begin(), boundaries.end()) ||
      std::adjacent_find(boundaries.begin(), boundaries.end()) != boundaries.end()) {
    throw std::invalid_argument("learning-rate boundaries must be strictly increasing");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("learning rates must be positive and finite");
    }
  }
}

double lr_at(const LrSchedule& schedule, std::int64_t epoch) {
  schedule.validate();
  const auto index = std::upper_bound(schedule.boundaries.begin(),
                                      schedule.boundaries.end(), epoch) -
                     schedule.boundaries.begin();
  return schedule.values[static_cast<std::size_t>(index)];
}

}  // namespace crackres
