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

#include "crackres/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace crackres {

double keys_kernel(double x) {
  constexpr double a = kKeysA;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

std::array<double, 4> keys_weights(double phase) {
  return {keys_kernel(phase + 1.0), keys_kernel(phase), keys_kernel(1.0 - phase),
          keys_kernel(2.0 - phase)};
}

const char* to_string(ResizeFilter filter) {
  switch (filter) {
    case ResizeFilter::kBicubic: return "bicubic";
    case ResizeFilter::kBicubicAntialias: return "bicubic_antialias";
    case ResizeFilter::kArea: return "area";
  }
  return "unknown";
}

std::optional<ResizeFilter> parse_resize_filter(std::string_view name) {
  for (ResizeFilter f : {ResizeFilter::kBicubic, ResizeFilter::kBicubicAntialias,
                         ResizeFilter::kArea}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

namespace {

// Sparse 1-D resampling matrix: for each output index, source taps (already
// clamped) and weights.
struct Taps {
  std::vector<std::size_t> offsets;  // start into index/weight arrays, size out + 1
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

Taps build_taps(std::size_t in, std::size_t out, ResizeFilter filter) {
  Taps taps;
  taps.offsets.reserve(out + 1);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const auto last = static_cast<std::ptrdiff_t>(in) - 1;
  const auto clamp_index = [last](std::ptrdiff_t i) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last));
  };

  for (std::size_t d = 0; d < out; ++d) {
    taps.offsets.push_back(taps.index.size());
    const double src = (static_cast<double>(d) + 0.5) * scale - 0.5;

    if (filter == ResizeFilter::kBicubic) {
      const double base = std::floor(src);
      const auto w = keys_weights(src - base);
      const auto i0 = static_cast<std::ptrdiff_t>(base) - 1;
      for (std::ptrdiff_t k = 0; k < 4; ++k) {
        taps.index.push_back(clamp_index(i0 + k));
        taps.weight.push_back(w[static_cast<std::size_t>(k)]);
      }
      continue;
    }

    // Widened kernels (only when shrinking), normalized to unit sum.
    const double stretch = std::max(scale, 1.0);
    const double support = (filter == ResizeFilter::kArea ? 0.5 : 2.0) * stretch;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(src - support));
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil(src + support));
    const std::size_t first = taps.weight.size();
    double total = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const double x = (static_cast<double>(i) - src) / stretch;
      double w;
      if (filter == ResizeFilter::kArea) {
        // Overlap of [i - 0.5, i + 0.5] with the box [src - s, src + s].
        const double a = std::max(static_cast<double>(i) - 0.5, src - support);
        const double b = std::min(static_cast<double>(i) + 0.5, src + support);
        w = std::max(0.0, b - a);
      } else {
        w = keys_kernel(x);
      }
      if (w == 0.0) continue;
      taps.index.push_back(clamp_index(i));
      taps.weight.push_back(w);
      total += w;
    }
    for (std::size_t k = first; k < taps.weight.size(); ++k) taps.weight[k] /= total;
  }
  taps.offsets.push_back(taps.index.size());
  return taps;
}

}  // namespace

ImageBuffer resize(const ImageBuffer& image, std::size_t out_h, std::size_t out_w,
                   ResizeFilter filter) {
  if (out_h == 0 || out_w == 0) throw std::invalid_argument("resize: output dims must be >= 1");
  const ImageBuffer src_img = normalize(image);
  const auto src = src_img.f32();
  const std::size_t in_h = src_img.height(), in_w = src_img.width();
  const std::size_t c = src_img.channels();

  const Taps rows = build_taps(in_h, out_h, filter);
  const Taps cols = build_taps(in_w, out_w, filter);

  // Horizontal pass into (in_h, out_w, c) doubles, then vertical.
  std::vector<double> tmp(in_h * out_w * c, 0.0);
  for (std::size_t y = 0; y < in_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      double* dst = &tmp[(y * out_w + x) * c];
      for (std::size_t k = cols.offsets[x]; k < cols.offsets[x + 1]; ++k) {
        const float* px = &src[(y * in_w + cols.index[k]) * c];
        for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += cols.weight[k] * px[ch];
      }
    }
  }
  std::vector<float> out(out_h * out_w * c);
  std::vector<double> acc(c);
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t k = rows.offsets[y]; k < rows.offsets[y + 1]; ++k) {
        const double* px = &tmp[(rows.index[k] * out_w + x) * c];
        for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += rows.weight[k] * px[ch];
      }
      for (std::size_t ch = 0; ch < c; ++ch) {
        out[(y * out_w + x) * c + ch] = static_cast<float>(std::clamp(acc[ch], 0.0, 1.0));
      }
    }
  }
  return ImageBuffer::from_f32(out_h, out_w, c, std::move(out));
}

SrPair prepare_sr_pair(const ImageBuffer& source, std::size_t lr_size, std::size_t hr_size,
                       ResizeFilter filter) {
  if (lr_size == 0 || hr_size % lr_size != 0) {
    throw std::invalid_argument("prepare_sr_pair: hr size " + std::to_string(hr_size) +
                                " is not an integer multiple of lr size " +
                                std::to_string(lr_size));
  }
  const ImageBuffer square = center_crop_square(normalize(source));
  return {resize(square, lr_size, lr_size, filter), resize(square, hr_size, hr_size, filter)};
}

}  // namespace crackres
