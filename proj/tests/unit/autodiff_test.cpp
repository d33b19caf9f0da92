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

#include <gtest/gtest.h>

#include <cmath>

#include "crackres/gradcheck.hpp"
#include "crackres/ops.hpp"
#include "crackres/tape.hpp"
#include "oracles.hpp"

namespace crackres {
namespace {

using testing::random_tensor;
using Tape = ad::Tape<double>;
using Var = ad::Var;

constexpr double kTol = 1e-4;

// Values in +-[0.1, 1], clear of the relu kink.
Tensor64 off_zero(const Shape& shape, Rng& rng) {
  Tensor64 t(shape);
  for (auto& v : t.values()) v = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.1, 1.0);
  return t;
}

// Reduces any tensor to a scalar with fixed random weights so every output
// coordinate contributes a distinct gradient.
Var reduce(Tape& tape, Var v, std::uint64_t seed) {
  Rng rng(seed);
  return ad::weighted_sum(tape, v, random_tensor<double>(tape.value(v).shape(), rng));
}

TEST(TapeTest, FanOutAccumulatesAdditively) {
  Tape tape;
  const Var x = tape.leaf(Tensor64({3}, {1.0, -2.0, 0.5}));
  const Var a = ad::weighted_sum(tape, x, Tensor64({3}, {1.0, 1.0, 1.0}));
  const Var b = ad::weighted_sum(tape, x, Tensor64({3}, {2.0, 3.0, 4.0}));
  // s = a + b; x fans out into both terms.
  const Var pair = tape.record(ad::OpKind::kWeightedSum, {a.id, b.id},
                               Tensor64({1}, {tape.value(a)[0] + tape.value(b)[0]}),
                               [](Tape& t, std::size_t self) {
                                 const auto& g = t.grad_ref(self);
                                 const auto& in = t.inputs(Var{self});
                                 t.accumulate(in[0], g);
                                 t.accumulate(in[1], g);
                               });
  tape.backward(pair);
  EXPECT_EQ(tape.grad(x), Tensor64({3}, {3.0, 4.0, 5.0}));
  // Every non-leaf node is visited exactly once.
  EXPECT_EQ(tape.last_backward_visits(), 3u);
}

TEST(TapeTest, BackwardRequiresScalarRoot) {
  Tape tape;
  const Var x = tape.leaf(Tensor64({2}, {1.0, 2.0}));
  EXPECT_THROW(tape.backward(ad::relu(tape, x)), std::exception);
}

TEST(TapeTest, NoGradientIntoConstants) {
  Tape tape;
  const Var x = tape.leaf(Tensor64({2}, {1.0, 2.0}), false);
  const Var w = tape.leaf(Tensor64({2}, {3.0, 4.0}));
  Tensor64 ones({2}, 1.0);
  const Var y = ad::weighted_sum(tape, ad::relu(tape, w), ones);
  tape.backward(y);
  EXPECT_EQ(tape.grad(x), Tensor64({2}));
  EXPECT_EQ(tape.grad(w), Tensor64({2}, {1.0, 1.0}));
}

TEST(GradCheckTest, Conv2dSameAndValid) {
  Rng rng(10);
  for (Padding padding : {Padding::kSame, Padding::kValid}) {
    const auto result = grad_check(
        [padding](Tape& t, std::span<const Var> in) {
          return reduce(t, ad::conv2d(t, in[0], in[1], in[2], padding), 1);
        },
        {random_tensor<double>({5, 4, 2}, rng), random_tensor<double>({3, 3, 2, 3}, rng),
         random_tensor<double>({3}, rng)});
    EXPECT_LT(result.max_rel_error, kTol) << to_string(padding);
  }
}

TEST(GradCheckTest, Conv2dBatched) {
  Rng rng(11);
  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) {
        return reduce(t, ad::conv2d(t, in[0], in[1], in[2], Padding::kSame), 2);
      },
      {random_tensor<double>({2, 3, 3, 2}, rng), random_tensor<double>({3, 3, 2, 2}, rng),
       random_tensor<double>({2}, rng)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, ReluAwayFromKink) {
  Rng rng(12);
  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) { return reduce(t, ad::relu(t, in[0]), 3); },
      {off_zero({4, 4, 2}, rng)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, Sigmoid) {
  Rng rng(13);
  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) { return reduce(t, ad::sigmoid(t, in[0]), 4); },
      {random_tensor<double>({10}, rng, -4, 4)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, GlobalAvgPool) {
  Rng rng(14);
  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) {
        return reduce(t, ad::global_avg_pool(t, in[0]), 5);
      },
      {random_tensor<double>({3, 5, 4}, rng)});
  EXPECT_LT(result.max_rel_error, kTol);

  const Tensor64 g = ops::global_avg_pool_backward<double>({2, 3, 1}, Tensor64({1}, {1.0}));
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);
}

TEST(GradCheckTest, DenseSigmoidBce) {
  Rng rng(15);
  const Tensor64 labels({4, 1}, {1.0, 0.0, 0.0, 1.0});
  const auto result = grad_check(
      [&labels](Tape& t, std::span<const Var> in) {
        return ad::bce_loss(t, ad::sigmoid(t, ad::dense(t, in[0], in[1], in[2])), labels);
      },
      {random_tensor<double>({4, 6}, rng), random_tensor<double>({6, 1}, rng),
       random_tensor<double>({1}, rng)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, BceOnProbabilities) {
  Rng rng(16);
  const Tensor64 labels({5}, {1.0, 0.0, 1.0, 1.0, 0.0});
  const auto result = grad_check(
      [&labels](Tape& t, std::span<const Var> in) { return ad::bce_loss(t, in[0], labels); },
      {random_tensor<double>({5}, rng, 0.05, 0.95)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, Mse) {
  Rng rng(17);
  const Tensor64 target = random_tensor<double>({3, 3, 2}, rng);
  const auto result = grad_check(
      [&target](Tape& t, std::span<const Var> in) { return ad::mse_loss(t, in[0], target); },
      {random_tensor<double>({3, 3, 2}, rng)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, FlattenPassesThrough) {
  Rng rng(18);
  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) { return reduce(t, ad::flatten(t, in[0]), 6); },
      {random_tensor<double>({2, 2, 3}, rng)});
  EXPECT_LT(result.max_rel_error, kTol);
}

TEST(GradCheckTest, ConvReluComposite) {
  Rng rng(19);
  // Search for a point whose relu inputs all sit clear of zero.
  for (std::uint64_t attempt = 0;; ++attempt) {
    ASSERT_LT(attempt, 200u);
    std::vector<Tensor64> point{random_tensor<double>({4, 4, 2}, rng),
                                random_tensor<double>({3, 3, 2, 3}, rng),
                                random_tensor<double>({3}, rng)};
    const Tensor64 pre = ops::conv2d(point[0], point[1], point[2], Padding::kSame);
    const double margin = std::abs(*std::min_element(
        pre.values().begin(), pre.values().end(),
        [](double a, double b) { return std::abs(a) < std::abs(b); }));
    if (margin < 1e-2) continue;
    const auto result = grad_check(
        [](Tape& t, std::span<const Var> in) {
          return reduce(t, ad::relu(t, ad::conv2d(t, in[0], in[1], in[2], Padding::kSame)), 7);
        },
        point);
    EXPECT_LT(result.max_rel_error, kTol);
    break;
  }
}

TEST(GradCheckTest, PixelShuffleGradientIsInversePermutation) {
  Rng rng(20);
  const Tensor64 upstream = random_tensor<double>({4, 6, 2}, rng);
  Tape tape;
  const Var x = tape.leaf(random_tensor<double>({2, 3, 8}, rng));
  tape.backward(ad::weighted_sum(tape, ad::pixel_shuffle(tape, x, 2), upstream));
  EXPECT_EQ(tape.grad(x), ops::pixel_unshuffle(upstream, 2));

  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) { return reduce(t, ad::pixel_shuffle(t, in[0], 2), 8); },
      {random_tensor<double>({2, 2, 4}, rng)});
  EXPECT_LT(result.max_rel_error, 1e-9);
}

TEST(GradCheckTest, ReportsDisagreement) {
  // A deliberately wrong backward must be caught.
  const auto result = grad_check(
      [](Tape& t, std::span<const Var> in) {
        const double v = t.value(in[0])[0];
        return t.record(ad::OpKind::kWeightedSum, {in[0].id}, Tensor64({1}, {v * v}),
                        [](Tape& tt, std::size_t self) {
                          tt.accumulate(tt.inputs(Var{self})[0], Tensor64({1}, {1.0}));
                        });
      },
      {Tensor64({1}, {3.0})});
  EXPECT_GT(result.max_rel_error, 0.5);
}

}  // namespace
}  // namespace crackres
