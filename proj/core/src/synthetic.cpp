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

#include "crackres/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "crackres/rng.hpp"

namespace crackres {

void SyntheticCrackParams::validate() const {
  const auto fail = [](const char* what) {
    throw std::invalid_argument(std::string("synthetic params: ") + what);
  };
  if (size < 8) fail("size must be >= 8");
  if (channels != 1 && channels != 3) fail("channels must be 1 or 3");
  if (!(texture_scale >= 1.0)) fail("texture_scale must be >= 1");
  if (!(texture_amplitude >= 0.0)) fail("texture_amplitude must be >= 0");
  if (!(contrast > 0.0)) fail("contrast must be > 0");
  if (!(texture_amplitude < contrast / 2.0)) fail("texture_amplitude must be < contrast / 2");
  if (background + texture_amplitude > 1.0 || background - texture_amplitude - contrast < 0.0) {
    fail("background +/- texture and contrast must stay inside [0, 1]");
  }
  if (crack_count_min < 1 || crack_count_max < crack_count_min) {
    fail("crack counts must satisfy 1 <= min <= max");
  }
  // A stroke at least 2.5 px wide fully covers the nearest pixel center.
  if (!(width_min >= 2.5) || width_max < width_min) fail("widths must satisfy 2.5 <= min <= max");
  if (!(meander >= 0.0)) fail("meander must be >= 0");
}

double dark_threshold(const SyntheticCrackParams& params) {
  return params.background - params.contrast / 2.0;
}

bool has_dark_pixels(const ImageBuffer& image, double threshold) {
  const ImageBuffer unit = normalize(image);
  const auto f = unit.f32();
  return std::any_of(f.begin(), f.end(), [threshold](float v) { return v < threshold; });
}

namespace {

// Bilinear value noise with smoothstep easing, values in [0, 1].
class ValueNoise {
 public:
  ValueNoise(std::size_t size, double scale, Rng& rng)
      : scale_(scale), cells_(static_cast<std::size_t>(std::ceil(size / scale)) + 2) {
    lattice_.resize(cells_ * cells_);
    for (double& v : lattice_) v = rng.uniform();
  }

  double at(double y, double x) const {
    const double gy = y / scale_, gx = x / scale_;
    const auto iy = static_cast<std::size_t>(gy), ix = static_cast<std::size_t>(gx);
    const double ty = ease(gy - static_cast<double>(iy)), tx = ease(gx - static_cast<double>(ix));
    const auto l = [&](std::size_t r, std::size_t c) { return lattice_[r * cells_ + c]; };
    const double top = l(iy, ix) + (l(iy, ix + 1) - l(iy, ix)) * tx;
    const double bottom = l(iy + 1, ix) + (l(iy + 1, ix + 1) - l(iy + 1, ix)) * tx;
    return top + (bottom - top) * ty;
  }

 private:
  static double ease(double t) { return t * t * (3.0 - 2.0 * t); }

  double scale_;
  std::size_t cells_;
  std::vector<double> lattice_;
};

struct Point {
  double y, x;
};

double segment_distance(Point p, Point a, Point b) {
  const double dy = b.y - a.y, dx = b.x - a.x;
  const double len2 = dy * dy + dx * dx;
  double t = len2 > 0.0 ? ((p.y - a.y) * dy + (p.x - a.x) * dx) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.y - (a.y + t * dy), p.x - (a.x + t * dx));
}

// Random walk entering from a random border point and heading inward.
std::vector<Point> crack_path(double size, double meander, Rng& rng) {
  const double step = size / 16.0;
  const int side = static_cast<int>(rng.index(4));
  const double along = rng.uniform(0.2, 0.8) * size;
  const double pi = std::numbers::pi;
  Point start{};
  double heading = 0.0;  // angle of (dy, dx) = (sin, cos)
  switch (side) {
    case 0: start = {along, 0.0}; heading = 0.0; break;
    case 1: start = {along, size}; heading = pi; break;
    case 2: start = {0.0, along}; heading = pi / 2.0; break;
    default: start = {size, along}; heading = -pi / 2.0; break;
  }
  heading += rng.uniform(-pi / 4.0, pi / 4.0);

  std::vector<Point> path{start};
  Point p = start;
  for (int i = 0; i < 64; ++i) {
    heading += meander * rng.normal();
    p = {p.y + step * std::sin(heading), p.x + step * std::cos(heading)};
    path.push_back(p);
    if (p.y < -step || p.y > size + step || p.x < -step || p.x > size + step) break;
  }
  return path;
}

}  // namespace

SyntheticImage generate_synthetic_crack(const SyntheticCrackParams& params, bool positive) {
  params.validate();
  Rng rng(params.seed);
  const std::size_t n = params.size;
  const ValueNoise coarse(n, params.texture_scale, rng);
  const ValueNoise fine(n, std::max(1.0, params.texture_scale / 4.0), rng);

  std::vector<double> gray(n * n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double v = 0.7 * coarse.at(static_cast<double>(y), static_cast<double>(x)) +
                       0.3 * fine.at(static_cast<double>(y), static_cast<double>(x));
      gray[y * n + x] = params.background + params.texture_amplitude * (2.0 * v - 1.0);
    }
  }

  if (positive) {
    const auto count = params.crack_count_min +
                       static_cast<int>(rng.index(static_cast<std::uint64_t>(
                           params.crack_count_max - params.crack_count_min + 1)));
    std::vector<double> coverage(n * n, 0.0);
    for (int k = 0; k < count; ++k) {
      const double width = rng.uniform(params.width_min, params.width_max);
      const auto path = crack_path(static_cast<double>(n), params.meander, rng);
      const double reach = width / 2.0 + 1.0;
      for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const Point a = path[s], b = path[s + 1];
        const auto lo_y = static_cast<long>(std::floor(std::min(a.y, b.y) - reach));
        const auto hi_y = static_cast<long>(std::ceil(std::max(a.y, b.y) + reach));
        const auto lo_x = static_cast<long>(std::floor(std::min(a.x, b.x) - reach));
        const auto hi_x = static_cast<long>(std::ceil(std::max(a.x, b.x) + reach));
        const long last = static_cast<long>(n) - 1;
        for (long y = std::max(0L, lo_y); y <= std::min(last, hi_y); ++y) {
          for (long x = std::max(0L, lo_x); x <= std::min(last, hi_x); ++x) {
            // Pixel centers sit at integer + 0.5.
            const double d = segment_distance({y + 0.5, x + 0.5}, a, b);
            const double c = std::clamp(width / 2.0 - d + 0.5, 0.0, 1.0);
            double& cell = coverage[static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x)];
            cell = std::max(cell, c);
          }
        }
      }
    }
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] -= params.contrast * coverage[i];
  }

  std::vector<float> samples(n * n * params.channels);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const auto v = static_cast<float>(std::clamp(gray[i], 0.0, 1.0));
    for (std::size_t c = 0; c < params.channels; ++c) samples[i * params.channels + c] = v;
  }
  return {ImageBuffer::from_f32(n, n, params.channels, std::move(samples)),
          positive ? Label::kPositive : Label::kNegative};
}

std::vector<SyntheticImage> generate_synthetic_set(const SyntheticCrackParams& params,
                                                   std::size_t count,
                                                   double positive_fraction) {
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) {
    throw std::invalid_argument("positive_fraction must lie in [0, 1]");
  }
  Rng rng(params.seed);
  const auto positives =
      static_cast<std::size_t>(std::llround(positive_fraction * static_cast<double>(count)));
  std::vector<bool> labels(count, false);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), true);
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<SyntheticImage> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticCrackParams p = params;
    p.seed = rng.next();
    out.push_back(generate_synthetic_crack(p, labels[order[i]]));
  }
  return out;
}

}  // namespace crackres
