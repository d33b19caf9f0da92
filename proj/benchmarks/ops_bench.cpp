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

#include <benchmark/benchmark.h>

#include "crackres/ops.hpp"
#include "crackres/rng.hpp"

namespace crackres {
namespace {

Tensor random(const Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Args: spatial size, input channels, output channels, kernel size.
void BM_Conv2dForward(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto k = static_cast<std::size_t>(state.range(3));
  Rng rng(1);
  const Tensor x = random({4, hw, hw, cin}, rng);
  const Tensor w = random({k, k, cin, cout}, rng);
  const Tensor b = random({cout}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::conv2d(x, w, b, Padding::kSame));
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_Conv2dForward)
    ->Args({32, 3, 16, 3})
    ->Args({32, 16, 32, 3})
    ->Args({32, 3, 64, 5})
    ->Args({32, 64, 64, 3})
    ->Unit(benchmark::kMicrosecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  Rng rng(2);
  const Tensor x = random({4, hw, hw, cin}, rng);
  const Tensor w = random({3, 3, cin, cout}, rng);
  const Tensor gy = random({4, hw, hw, cout}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::conv2d_backward(x, w, gy, Padding::kSame, true));
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_Conv2dBackward)->Args({32, 16, 32})->Args({32, 64, 64})->Unit(benchmark::kMicrosecond);

void BM_PixelShuffle(benchmark::State& state) {
  Rng rng(3);
  const Tensor x = random({4, 32, 32, 48}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ops::pixel_shuffle(x, 4));
}
BENCHMARK(BM_PixelShuffle)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace crackres
