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
#include <vector>

#include "crackres/dataset.hpp"
#include "crackres/image.hpp"

namespace crackres {

/// Procedural stand-in for crack photographs: a mid-gray value-noise surface
/// with optional dark meandering strokes.
struct SyntheticCrackParams {
  std::size_t size = 227;
  std::size_t channels = 3;
  double background = 0.55;
  /// Lattice spacing (pixels) of the coarse noise octave.
  double texture_scale = 24.0;
  /// Peak deviation of the texture from `background`. Must stay below
  /// contrast / 2 so strokes are separable from texture.
  double texture_amplitude = 0.08;
  int crack_count_min = 1;
  int crack_count_max = 2;
  double width_min = 6.0;
  double width_max = 12.0;
  /// Standard deviation (radians) of the heading change per polyline step.
  double meander = 0.35;
  double contrast = 0.4;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct SyntheticImage {
  ImageBuffer image;
  Label label;
};

/// Deterministic in (params, positive).
SyntheticImage generate_synthetic_crack(const SyntheticCrackParams& params, bool positive);

/// Intensity below which only stroke pixels can fall: background - contrast / 2.
double dark_threshold(const SyntheticCrackParams& params);

/// Trivial detector: true iff any sample is below `threshold`.
bool has_dark_pixels(const ImageBuffer& image, double threshold);

/// `count` images, round(count * positive_fraction) of them positive, in a
/// seeded shuffled order. Each image gets its own seed drawn from
/// params.seed.
std::vector<SyntheticImage> generate_synthetic_set(const SyntheticCrackParams& params,
                                                   std::size_t count,
                                                   double positive_fraction = 0.5);

}  // namespace crackres
