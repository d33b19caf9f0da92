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

#include "crackres/image.hpp"

#include <png.h>
#include <stdio.h>  // jpeglib.h needs FILE

#include <jpeglib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace crackres {

namespace {

void check_dims(std::size_t height, std::size_t width, std::size_t channels) {
  if (height == 0 || width == 0) throw ImageError("image dimensions must be >= 1");
  if (channels != 1 && channels != 3) {
    throw ImageError("images must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

ImageBuffer ImageBuffer::from_u8(std::size_t height, std::size_t width,
                                 std::size_t channels, std::vector<std::uint8_t> samples) {
  check_dims(height, width, channels);
  if (samples.size() != height * width * channels) {
    throw ImageError("image sample count does not match dimensions");
  }
  ImageBuffer img;
  img.height_ = height;
  img.width_ = width;
  img.channels_ = channels;
  img.format_ = PixelFormat::kU8;
  img.u8_ = std::move(samples);
  return img;
}

ImageBuffer ImageBuffer::from_f32(std::size_t height, std::size_t width,
                                  std::size_t channels, std::vector<float> samples) {
  check_dims(height, width, channels);
  if (samples.size() != height * width * channels) {
    throw ImageError("image sample count does not match dimensions");
  }
  for (float v : samples) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ImageError("float image samples must lie in [0, 1], got " + std::to_string(v));
    }
  }
  ImageBuffer img;
  img.height_ = height;
  img.width_ = width;
  img.channels_ = channels;
  img.format_ = PixelFormat::kF32;
  img.f32_ = std::move(samples);
  return img;
}

ImageBuffer ImageBuffer::filled(std::size_t height, std::size_t width,
                                std::size_t channels, float value) {
  return from_f32(height, width, channels,
                  std::vector<float>(height * width * channels, value));
}

std::span<const std::uint8_t> ImageBuffer::u8() const {
  if (format_ != PixelFormat::kU8) throw ImageError("image is not 8-bit");
  return u8_;
}

std::span<const float> ImageBuffer::f32() const {
  if (format_ != PixelFormat::kF32) throw ImageError("image is not float");
  return f32_;
}

std::span<float> ImageBuffer::f32_mut() {
  if (format_ != PixelFormat::kF32) throw ImageError("image is not float");
  return f32_;
}

namespace {

bool starts_with(std::span<const std::uint8_t> bytes, std::initializer_list<int> magic) {
  if (bytes.size() < magic.size()) return false;
  std::size_t i = 0;
  for (int m : magic) {
    if (bytes[i++] != m) return false;
  }
  return true;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ImageError(std::string("PNG decode failed: ") + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(image));
  // Transparent regions composite onto black.
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, samples.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ImageError(std::string("PNG decode failed: ") + image.message);
  }
  return ImageBuffer::from_u8(image.height, image.width, gray ? 1 : 3, std::move(samples));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct info{};
  JpegErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Declared before setjmp so nothing with a destructor is skipped.
  std::vector<std::uint8_t> samples;
  std::size_t height = 0, width = 0, channels = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw ImageError(std::string("JPEG decode failed: ") + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = info.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&info);
  height = info.output_height;
  width = info.output_width;
  channels = static_cast<std::size_t>(info.output_components);
  samples.resize(height * width * channels);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = samples.data() + info.output_scanline * width * channels;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return ImageBuffer::from_u8(height, width, channels, std::move(samples));
}

// Binary netpbm: "P5"/"P6", whitespace/comment separated width, height,
// maxval, a single whitespace byte, then raster.
ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes) {
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  auto read_number = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw ImageError("PNM decode failed: malformed header");
    }
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos++] - '0');
      if (value > (1u << 24)) throw ImageError("PNM decode failed: dimension too large");
    }
    return value;
  };
  const std::size_t width = read_number();
  const std::size_t height = read_number();
  const std::size_t maxval = read_number();
  if (maxval != 255) throw ImageError("PNM decode failed: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ImageError("PNM decode failed: malformed header");
  }
  ++pos;
  const std::size_t count = width * height * channels;
  if (bytes.size() - pos < count) throw ImageError("PNM decode failed: truncated raster");
  std::vector<std::uint8_t> samples(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  return ImageBuffer::from_u8(height, width, channels, std::move(samples));
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (starts_with(bytes, {0x89, 'P', 'N', 'G'})) return decode_png(bytes);
  if (starts_with(bytes, {0xFF, 0xD8})) return decode_jpeg(bytes);
  if (starts_with(bytes, {'P', '5'}) || starts_with(bytes, {'P', '6'})) {
    return decode_pnm(bytes);
  }
  throw ImageError("unrecognized image format");
}

std::vector<std::uint8_t> encode_image(const ImageBuffer& image, ImageCodec codec) {
  const ImageBuffer u8 = image.format() == PixelFormat::kU8 ? image : denormalize(image);
  const auto samples = u8.u8();
  if (codec == ImageCodec::kPpm) {
    const std::string header = std::string(u8.channels() == 3 ? "P6" : "P5") + "\n" +
                               std::to_string(u8.width()) + " " +
                               std::to_string(u8.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), samples.begin(), samples.end());
    return out;
  }

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(u8.width());
  png.height = static_cast<png_uint_32>(u8.height());
  png.format = u8.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, samples.data(), 0, nullptr)) {
    throw ImageError(std::string("PNG encode failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, samples.data(), 0, nullptr)) {
    throw ImageError(std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const ImageError& e) {
    throw ImageError(path.string() + ": " + e.what());
  }
}

void save_image(const ImageBuffer& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  ImageCodec codec;
  if (ext == ".png") {
    codec = ImageCodec::kPng;
  } else if (ext == ".ppm" || ext == ".pgm") {
    codec = ImageCodec::kPpm;
  } else {
    throw ImageError("unsupported output extension '" + ext + "'");
  }
  const auto bytes = encode_image(image, codec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError("cannot write " + path.string());
}

ImageBuffer normalize(const ImageBuffer& image) {
  if (image.format() == PixelFormat::kF32) return image;
  const auto src = image.u8();
  std::vector<float> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return ImageBuffer::from_f32(image.height(), image.width(), image.channels(),
                               std::move(out));
}

ImageBuffer denormalize(const ImageBuffer& image) {
  if (image.format() == PixelFormat::kU8) return image;
  const auto src = image.f32();
  std::vector<std::uint8_t> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return ImageBuffer::from_u8(image.height(), image.width(), image.channels(),
                              std::move(out));
}

ImageBuffer to_rgb(const ImageBuffer& image) {
  if (image.channels() == 3) return image;
  const std::size_t n = image.height() * image.width();
  if (image.format() == PixelFormat::kU8) {
    const auto src = image.u8();
    std::vector<std::uint8_t> out(n * 3);
    for (std::size_t i = 0; i < n; ++i) out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = src[i];
    return ImageBuffer::from_u8(image.height(), image.width(), 3, std::move(out));
  }
  const auto src = image.f32();
  std::vector<float> out(n * 3);
  for (std::size_t i = 0; i < n; ++i) out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = src[i];
  return ImageBuffer::from_f32(image.height(), image.width(), 3, std::move(out));
}

ImageBuffer center_crop_square(const ImageBuffer& image) {
  const std::size_t side = std::min(image.height(), image.width());
  if (side == image.height() && side == image.width()) return image;
  const std::size_t y0 = (image.height() - side) / 2;
  const std::size_t x0 = (image.width() - side) / 2;
  const std::size_t c = image.channels();
  auto crop = [&](auto src, auto& out) {
    for (std::size_t y = 0; y < side; ++y) {
      const auto row = src.begin() + static_cast<std::ptrdiff_t>(((y0 + y) * image.width() + x0) * c);
      std::copy(row, row + static_cast<std::ptrdiff_t>(side * c),
                out.begin() + static_cast<std::ptrdiff_t>(y * side * c));
    }
  };
  if (image.format() == PixelFormat::kU8) {
    std::vector<std::uint8_t> out(side * side * c);
    crop(image.u8(), out);
    return ImageBuffer::from_u8(side, side, c, std::move(out));
  }
  std::vector<float> out(side * side * c);
  crop(image.f32(), out);
  return ImageBuffer::from_f32(side, side, c, std::move(out));
}

Tensor to_tensor(const ImageBuffer& image) {
  const ImageBuffer f = normalize(image);
  const auto src = f.f32();
  return Tensor({f.height(), f.width(), f.channels()},
                std::vector<float>(src.begin(), src.end()));
}

ImageBuffer from_tensor(const Tensor& tensor) {
  if (tensor.rank() != 3) {
    throw ShapeError("from_tensor: expected (H, W, C), got " + to_string(tensor.shape()));
  }
  std::vector<float> samples(tensor.values());
  for (float& v : samples) v = std::clamp(v, 0.0f, 1.0f);
  return ImageBuffer::from_f32(tensor.dim(0), tensor.dim(1), tensor.dim(2),
                               std::move(samples));
}

}  // namespace crackres
