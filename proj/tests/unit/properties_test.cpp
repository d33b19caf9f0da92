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

// Randomized property checks across modules.

#include <gtest/gtest.h>

#include <cstdint>
#include <set>
#include <vector>

#include "crackres/metrics.hpp"
#include "crackres/models.hpp"
#include "crackres/ops.hpp"
#include "oracles.hpp"

namespace crackres {
namespace {

using testing::random_tensor;

TEST(PropertyTest, PixelShuffleRoundtripIsBitExact) {
  Rng rng(1);
  for (std::size_t r : {1u, 2u, 4u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t h = 1 + rng.index(6), w = 1 + rng.index(6), c = 1 + rng.index(3);
      const Tensor x = random_tensor({h, w, c * r * r}, rng);
      const Tensor y = ops::pixel_shuffle(x, r);
      EXPECT_EQ(y.shape(), (Shape{h * r, w * r, c}));
      EXPECT_EQ(ops::pixel_unshuffle(y, r), x);
      EXPECT_EQ(ops::pixel_shuffle(ops::pixel_unshuffle(y, r), r), y);
    }
  }
}

TEST(PropertyTest, Conv2dMatchesDirectOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + 2 * rng.index(3);
    const std::size_t h = k + rng.index(6), w = k + rng.index(6);
    const std::size_t cin = 1 + rng.index(4), cout = 1 + rng.index(5);
    const bool same = rng.uniform() < 0.5;
    const Tensor64 x = random_tensor<double>({h, w, cin}, rng);
    const Tensor64 kern = random_tensor<double>({k, k, cin, cout}, rng);
    const Tensor64 b = random_tensor<double>({cout}, rng);
    std::size_t oh = 0, ow = 0;
    const auto expect =
        testing::naive_conv2d(x.values(), h, w, cin, kern.values(), k, cout, b.values(), same, oh, ow);
    const Tensor64 y = ops::conv2d(x, kern, b, same ? Padding::kSame : Padding::kValid);
    ASSERT_EQ(y.shape(), (Shape{oh, ow, cout}));
    double worst = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      worst = std::max(worst, testing::rel_error(y[i], expect[i]));
    }
    EXPECT_LT(worst, 1e-6) << "trial " << trial;
  }
}

TEST(PropertyTest, SamePaddingPreservesDimsAndIdentityKernel) {
  Rng rng(3);
  for (std::size_t k : {1u, 3u, 5u, 7u}) {
    const Tensor x = random_tensor({9, 6, 2}, rng);
    Tensor kern({k, k, 2, 2});
    for (std::size_t c = 0; c < 2; ++c) kern[(((k / 2) * k + k / 2) * 2 + c) * 2 + c] = 1.0f;
    const Tensor y = ops::conv2d(x, kern, Tensor({2}), Padding::kSame);
    EXPECT_EQ(y, x) << k;
  }
}

TEST(PropertyTest, LossesAreNonNegative) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(20);
    const Tensor64 p = random_tensor<double>({n}, rng, 0, 1);
    Tensor64 y({n});
    for (auto& v : y.values()) v = static_cast<double>(rng.index(2));
    EXPECT_GE(ops::bce_loss(p, y), 0.0);
    const Tensor64 q = random_tensor<double>({n}, rng);
    EXPECT_GE(ops::mse_loss(p, q), 0.0);
    EXPECT_EQ(ops::mse_loss(q, q), 0.0);
  }
}

TEST(PropertyTest, ClassifierOutputStrictlyInsideUnitInterval) {
  const auto arch = build_crack_classifier();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto params = init_params(arch, trial);
    const float s = forward<float>(arch, params, random_tensor({32, 32, 3}, rng, 0, 1))[0];
    EXPECT_GT(s, 0.0f);
    EXPECT_LT(s, 1.0f);
  }
}

ImageBuffer random_image(Rng& rng) {
  return from_tensor(random_tensor({16, 16, 3}, rng, 0, 1));
}

TEST(PropertyTest, MetricIdentitiesAndSymmetry) {
  Rng rng(6);
  const auto arch = build_crack_classifier();
  const LpipsConfig lp = classifier_trunk_lpips(arch, init_params(arch, 1));
  SsimParams windowed;
  windowed.mode = SsimMode::kWindowed;
  for (int trial = 0; trial < 20; ++trial) {
    const ImageBuffer a = random_image(rng), b = random_image(rng);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
    EXPECT_NEAR(ssim(a, a, windowed), 1.0, 1e-9);
    EXPECT_EQ(lpips(a, a, lp), 0.0);
    const ImageBuffer zero = ape_map(a, a);
    for (float v : zero.f32()) ASSERT_EQ(v, 0.0f);
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());

    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-9);
    EXPECT_NEAR(ssim(a, b, windowed), ssim(b, a, windowed), 1e-9);
    EXPECT_NEAR(lpips(a, b, lp), lpips(b, a, lp), 1e-9);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    const double s = ssim(a, b);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_LT(psnr(a, b), std::numeric_limits<double>::infinity());
    EXPECT_GT(lpips(a, b, lp), 0.0);
  }
}

// Results must not depend on where the allocator placed a buffer, or training
// runs stop being reproducible.
TEST(PropertyTest, GradientsIndependentOfBufferAddress) {
  Rng rng(9);
  const Tensor x = random_tensor({4, 8, 8, 16}, rng);
  const Tensor k = random_tensor({3, 3, 16, 16}, rng);
  const Tensor gy = random_tensor({4, 8, 8, 16}, rng);
  const auto residue = [](const Tensor& t) {
    return reinterpret_cast<std::uintptr_t>(t.data().data()) % 64;
  };
  std::vector<Tensor> copies;
  std::vector<Tensor> spare;
  std::set<std::uintptr_t> seen;
  for (std::size_t i = 0; i < 2000 && seen.size() < 4; ++i) {
    spare.emplace_back(Shape{1 + i % 13});  // shifts the heap a little
    Tensor c = gy;
    if (seen.insert(residue(c)).second) copies.push_back(std::move(c));
  }
  ASSERT_GE(copies.size(), 2u);
  const auto ref = ops::conv2d_backward(x, k, copies[0], Padding::kSame, true);
  for (const Tensor& g : copies) {
    const auto other = ops::conv2d_backward(x, k, g, Padding::kSame, true);
    EXPECT_EQ(other.bias, ref.bias) << "residue " << residue(g);
    EXPECT_EQ(other.kernels, ref.kernels) << "residue " << residue(g);
    EXPECT_EQ(other.input, ref.input) << "residue " << residue(g);
  }
}

}  // namespace
}  // namespace crackres
