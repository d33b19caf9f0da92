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
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "crackres/tensor.hpp"

namespace crackres {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PixelFormat { kU8, kF32 };

/// Decoded raster, row-major, interleaved channels (1 or 3).
///
/// Exactly one of the two sample stores is populated, selected by format().
/// Float samples always lie in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer() = default;

  static ImageBuffer from_u8(std::size_t height, std::size_t width,
                             std::size_t channels, std::vector<std::uint8_t> samples);
  static ImageBuffer from_f32(std::size_t height, std::size_t width,
                              std::size_t channels, std::vector<float> samples);
  /// Filled float image.
  static ImageBuffer filled(std::size_t height, std::size_t width,
                            std::size_t channels, float value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t sample_count() const noexcept { return height_ * width_ * channels_; }
  PixelFormat format() const noexcept { return format_; }

  std::span<const std::uint8_t> u8() const;
  std::span<const float> f32() const;
  std::span<float> f32_mut();

  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return f32_[(y * width_ + x) * channels_ + c];
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  PixelFormat format_ = PixelFormat::kF32;
  std::vector<std::uint8_t> u8_;
  std::vector<float> f32_;
};

enum class ImageCodec { kPng, kPpm };

/// Decodes PNG (8-bit; palette/alpha are flattened), baseline JPEG, or binary
/// PGM/PPM (P5/P6, maxval 255), detected from the leading bytes.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// Lossless encoding of an 8-bit image; float images are denormalized first.
std::vector<std::uint8_t> encode_image(const ImageBuffer& image,
                                       ImageCodec codec = ImageCodec::kPng);

ImageBuffer load_image(const std::filesystem::path& path);
/// Codec chosen from the extension (.png, .ppm/.pgm).
void save_image(const ImageBuffer& image, const std::filesystem::path& path);

/// value / 255.
ImageBuffer normalize(const ImageBuffer& image);
/// round(value * 255), half away from zero.
ImageBuffer denormalize(const ImageBuffer& image);

/// Replicates a single channel three times; 3-channel input is returned as is.
ImageBuffer to_rgb(const ImageBuffer& image);

/// Centered square crop of side min(height, width).
ImageBuffer center_crop_square(const ImageBuffer& image);

/// (H, W, C) float tensor from a float image and back. from_tensor clamps to
/// [0, 1].
Tensor to_tensor(const ImageBuffer& image);
ImageBuffer from_tensor(const Tensor& tensor);

}  // namespace crackres
