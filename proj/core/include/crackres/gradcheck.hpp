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
#include <functional>
#include <span>
#include <vector>

#include "crackres/tape.hpp"

namespace crackres {

/// Builds a scalar-valued graph on `tape` from leaves holding the inputs.
using GraphFn =
    std::function<ad::Var(ad::Tape<double>& tape, std::span<const ad::Var> inputs)>;

struct GradCheckOptions {
  double step = 1e-4;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  /// Cap on coordinates probed per input (0 = all). Sampled coordinates are
  /// drawn without replacement from `seed`.
  std::size_t max_coordinates_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Compares reverse-mode gradients against central finite differences
/// (f(x + h) - f(x - h)) / 2h in double precision, over every input.
GradCheckResult grad_check(const GraphFn& graph, const std::vector<Tensor64>& point,
                           const GradCheckOptions& options = {});

}  // namespace crackres
