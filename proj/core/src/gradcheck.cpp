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

#include "crackres/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crackres/rng.hpp"

namespace crackres {
namespace {

double evaluate(const GraphFn& graph, const std::vector<Tensor64>& point) {
  ad::Tape<double> tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(point.size());
  for (const auto& t : point) leaves.push_back(tape.leaf(t, false));
  return tape.value(graph(tape, leaves))[0];
}

}  // namespace

GradCheckResult grad_check(const GraphFn& graph, const std::vector<Tensor64>& point,
                           const GradCheckOptions& options) {
  ad::Tape<double> tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(point.size());
  for (const auto& t : point) leaves.push_back(tape.leaf(t, true));
  const ad::Var root = graph(tape, leaves);
  tape.backward(root);

  GradCheckResult result;
  Rng rng(options.seed);
  std::vector<Tensor64> probe = point;
  for (std::size_t input = 0; input < point.size(); ++input) {
    const Tensor64 analytic = tape.grad(leaves[input]);

    std::vector<std::size_t> coords(point[input].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coordinates_per_input != 0 &&
        coords.size() > options.max_coordinates_per_input) {
      rng.shuffle(coords);
      coords.resize(options.max_coordinates_per_input);
      std::sort(coords.begin(), coords.end());
    }

    for (std::size_t idx : coords) {
      const double original = probe[input][idx];
      probe[input][idx] = original + options.step;
      const double plus = evaluate(graph, probe);
      probe[input][idx] = original - options.step;
      const double minus = evaluate(graph, probe);
      probe[input][idx] = original;

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double err = std::abs(a - numeric) / denom;
      ++result.coordinates_checked;
      if (err > result.max_rel_error || result.coordinates_checked == 1) {
        result.max_rel_error = std::max(err, result.max_rel_error);
        result.worst_input = input;
        result.worst_index = idx;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace crackres
