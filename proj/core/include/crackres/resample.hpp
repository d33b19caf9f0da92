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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "crackres/image.hpp"

namespace crackres {

inline constexpr double kKeysA = -0.5;

/// Keys cubic convolution kernel with a = -0.5; support (-2, 2).
double keys_kernel(double x);

/// The four tap weights for sample offsets -1, 0, 1, 2 around floor(src),
/// given the fractional phase t = src - floor(src) in [0, 1).
std::array<double, 4> keys_weights(double phase);

enum class ResizeFilter {
  /// Separable Keys cubic at the destination sampling rate (no prefilter).
  kBicubic,
  /// Cubic kernel widened by the scale factor when downsampling.
  kBicubicAntialias,
  /// Box filter widened by the scale factor: exact area averaging.
  kArea,
};

const char* to_string(ResizeFilter filter);
std::optional<ResizeFilter> parse_resize_filter(std::string_view name);

/// Separable resize of a float image. Source coordinate for destination
/// index d is (d + 0.5) * in / out - 0.5; out-of-range taps clamp to the
/// edge; the result is clipped to [0, 1].
ImageBuffer resize(const ImageBuffer& image, std::size_t out_h, std::size_t out_w,
                   ResizeFilter filter = ResizeFilter::kBicubic);

inline ImageBuffer bicubic_resize(const ImageBuffer& image, std::size_t out_h,
                                  std::size_t out_w) {
  return resize(image, out_h, out_w, ResizeFilter::kBicubic);
}

struct SrPair {
  ImageBuffer lr;
  ImageBuffer hr;
};

/// Center-crops `source` to a square, then resizes it independently to
/// lr_size and hr_size. hr_size must be an integer multiple of lr_size.
SrPair prepare_sr_pair(const ImageBuffer& source, std::size_t lr_size, std::size_t hr_size,
                       ResizeFilter filter = ResizeFilter::kBicubic);

}  // namespace crackres
