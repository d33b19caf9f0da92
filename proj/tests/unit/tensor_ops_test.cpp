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

#include "crackres/ops.hpp"
#include "oracles.hpp"

namespace crackres {
namespace {

using testing::random_tensor;

TEST(TensorTest, RejectsMismatchedData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<float>(5)), ShapeError);
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  Tensor t({2, 3}, 1.5f);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
  EXPECT_THROW(t.reshaped({4, 2}), ShapeError);
}

TEST(Conv2dTest, IdentityKernelIsIdentity) {
  Rng rng(1);
  const Tensor x = random_tensor({6, 5, 1}, rng);
  Tensor k({3, 3, 1, 1});
  k[4] = 1.0f;
  EXPECT_EQ(ops::conv2d(x, k, Tensor({1}), Padding::kSame), x);
}

TEST(Conv2dTest, ConstantInputAllOnesKernel) {
  const float v = 0.75f;
  const Tensor x({5, 5, 1}, v);
  const Tensor y = ops::conv2d(x, Tensor({3, 3, 1, 1}, 1.0f), Tensor({1}), Padding::kSame);
  // Interior sees 9 taps, corners 4, edges 6.
  EXPECT_FLOAT_EQ(y.at(2, 2, 0), 9 * v);
  EXPECT_FLOAT_EQ(y.at(0, 0, 0), 4 * v);
  EXPECT_FLOAT_EQ(y.at(4, 4, 0), 4 * v);
  EXPECT_FLOAT_EQ(y.at(0, 2, 0), 6 * v);
}

TEST(Conv2dTest, MatchesDirectConvolution) {
  Rng rng(2);
  for (bool same : {true, false}) {
    const Tensor64 x = random_tensor<double>({8, 8, 3}, rng);
    const Tensor64 k = random_tensor<double>({3, 3, 3, 4}, rng);
    const Tensor64 b = random_tensor<double>({4}, rng);
    std::size_t oh = 0, ow = 0;
    const auto expect = testing::naive_conv2d(x.values(), 8, 8, 3, k.values(), 3, 4, b.values(),
                                              same, oh, ow);
    const Tensor64 y = ops::conv2d(x, k, b, same ? Padding::kSame : Padding::kValid);
    ASSERT_EQ(y.shape(), (Shape{oh, ow, 4}));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_LT(testing::rel_error(y[i], expect[i]), 1e-6);
  }
}

TEST(Conv2dTest, BatchEqualsPerImage) {
  Rng rng(3);
  const Tensor a = random_tensor({4, 4, 2}, rng), b = random_tensor({4, 4, 2}, rng);
  const Tensor k = random_tensor({3, 3, 2, 3}, rng), bias = random_tensor({3}, rng);
  std::vector<float> both(a.values());
  both.insert(both.end(), b.values().begin(), b.values().end());
  const Tensor y = ops::conv2d(Tensor({2, 4, 4, 2}, both), k, bias, Padding::kSame);
  const Tensor ya = ops::conv2d(a, k, bias, Padding::kSame);
  const Tensor yb = ops::conv2d(b, k, bias, Padding::kSame);
  for (std::size_t i = 0; i < ya.size(); ++i) {
    EXPECT_FLOAT_EQ(y[i], ya[i]);
    EXPECT_FLOAT_EQ(y[ya.size() + i], yb[i]);
  }
}

TEST(Conv2dTest, RejectsBadShapes) {
  const Tensor x({4, 4, 2});
  EXPECT_THROW(ops::conv2d(x, Tensor({2, 2, 2, 1}), Tensor({1}), Padding::kSame), ShapeError);
  EXPECT_THROW(ops::conv2d(x, Tensor({3, 3, 3, 1}), Tensor({1}), Padding::kSame), ShapeError);
  EXPECT_THROW(ops::conv2d(x, Tensor({3, 3, 2, 2}), Tensor({1}), Padding::kSame), ShapeError);
  EXPECT_THROW(ops::conv2d(x, Tensor({5, 5, 2, 1}), Tensor({1}), Padding::kValid), ShapeError);
}

TEST(ActivationTest, Definitions) {
  const Tensor r = ops::relu(Tensor({2}, {-1.0f, 2.0f}));
  EXPECT_EQ(r[0], 0.0f);
  EXPECT_EQ(r[1], 2.0f);
  EXPECT_EQ(ops::sigmoid(Tensor({1}, {0.0f}))[0], 0.5f);
  const Tensor64 s = ops::sigmoid(Tensor64({4}, {-800.0, -30.0, 30.0, 800.0}));
  for (double v : s.values()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(s[1], 0.0);
  EXPECT_LT(s[2], 1.0);
}

TEST(GlobalAvgPoolTest, Means) {
  EXPECT_EQ(ops::global_avg_pool(Tensor({3, 3, 1}, 7.0f))[0], 7.0f);
  const Tensor y = ops::global_avg_pool(Tensor({2, 2, 1}, {1, 2, 3, 4}));
  EXPECT_EQ(y.shape(), (Shape{1}));
  EXPECT_FLOAT_EQ(y[0], 2.5f);
}

TEST(DenseTest, IdentityAndOffset) {
  Rng rng(4);
  const Tensor x = random_tensor({3}, rng);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0f;
  EXPECT_EQ(ops::dense(x, eye, Tensor({3})), x);
  const Tensor b({2}, {0.25f, -4.0f});
  EXPECT_EQ(ops::dense(x, Tensor({3, 2}), b), b);
}

TEST(DenseTest, MatchesDotProducts) {
  Rng rng(5);
  const Tensor64 x = random_tensor<double>({7}, rng), w = random_tensor<double>({7, 5}, rng);
  const Tensor64 b = random_tensor<double>({5}, rng);
  const Tensor64 y = ops::dense(x, w, b);
  for (std::size_t j = 0; j < 5; ++j) {
    double acc = b[j];
    for (std::size_t i = 0; i < 7; ++i) acc += x[i] * w[i * 5 + j];
    EXPECT_NEAR(y[j], acc, 1e-6);
  }
  EXPECT_THROW(ops::dense(Tensor64({6}), w, b), ShapeError);
}

TEST(PixelShuffleTest, DeclaredOrdering) {
  const Tensor y = ops::pixel_shuffle(Tensor({1, 1, 4}, {1, 2, 3, 4}), 2);
  EXPECT_EQ(y, Tensor({2, 2, 1}, {1, 2, 3, 4}));
}

TEST(PixelShuffleTest, IndexLaw) {
  Rng rng(6);
  const std::size_t r = 3, c = 2;
  const Tensor x = random_tensor({2, 3, c * r * r}, rng);
  const Tensor y = ops::pixel_shuffle(x, r);
  ASSERT_EQ(y.shape(), (Shape{6, 9, c}));
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t w = 0; w < 3; ++w)
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
          for (std::size_t ch = 0; ch < c; ++ch)
            EXPECT_EQ(y.at(h * r + i, w * r + j, ch), x.at(h, w, ch * r * r + i * r + j));
}

TEST(PixelShuffleTest, EspcnnShapes) {
  EXPECT_EQ(ops::pixel_shuffle(Tensor({32, 32, 48}), 4).shape(), (Shape{128, 128, 3}));
  EXPECT_THROW(ops::pixel_shuffle(Tensor({2, 2, 6}), 2), ShapeError);
}

TEST(LossTest, BceValues) {
  EXPECT_NEAR(ops::bce_loss(Tensor64({1}, {0.5}), Tensor64({1}, {1.0})), std::log(2.0), 1e-12);
  const double perfect = ops::bce_loss(Tensor64({2}, {1.0, 0.0}), Tensor64({2}, {1.0, 0.0}));
  EXPECT_GE(perfect, 0.0);
  EXPECT_LE(perfect, -std::log(1.0 - ops::kBceEpsilon) + 1e-15);
  EXPECT_THROW(ops::bce_loss(Tensor64({1}, {0.5}), Tensor64({1}, {0.5})), std::invalid_argument);
}

TEST(LossTest, MseValues) {
  Rng rng(7);
  const Tensor x = random_tensor({5}, rng);
  EXPECT_EQ(ops::mse_loss(x, x), 0.0f);
  EXPECT_EQ(ops::mse_loss(Tensor({2}, {0, 0}), Tensor({2}, {1, 1})), 1.0f);
  EXPECT_THROW(ops::mse_loss(Tensor({2}), Tensor({3})), ShapeError);
  const Tensor64 p({2}, {0.5, 2.0}), t({2}, {0.0, 1.0});
  const Tensor64 g = ops::mse_backward(p, t);
  EXPECT_DOUBLE_EQ(g[0], 2 * 0.5 / 2);
  EXPECT_DOUBLE_EQ(g[1], 2 * 1.0 / 2);
}

}  // namespace
}  // namespace crackres
