/* Copyright 2026 The parkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "parkit/mask.hpp"

namespace parkit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kMagenta{255, 0, 255};

// Interleaved 8-bit RGB raster.
class Image {
 public:
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb pixel(int x, int y) const {
    const std::uint8_t* p = &data_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set_pixel(int x, int y, Rgb v) {
    std::uint8_t* p = &data_[offset(x, y)];
    p[0] = v.r;
    p[1] = v.g;
    p[2] = v.b;
  }
  std::uint8_t channel(int x, int y, int c) const { return data_[offset(x, y) + c]; }
  void set_channel(int x, int y, int c, std::uint8_t v) { data_[offset(x, y) + c] = v; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  bool same_shape(const Mask& m) const { return width_ == m.width() && height_ == m.height(); }
  bool same_shape(const Image& o) const { return width_ == o.width_ && height_ == o.height_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

void require_same_shape(const Image& image, const Mask& mask, const char* what);
void require_same_shape(const Image& a, const Image& b, const char* what);

// out = inside·hole + context·(1 − hole), pixelwise.
Image composite(const Image& inside, const Image& context, const Mask& hole);

// True when a and b agree on every pixel where `region` is 0.
bool equal_outside(const Image& a, const Image& b, const Mask& region);

Image flip_horizontal(const Image& image);
Mask flip_horizontal(const Mask& mask);
Image resize_bilinear(const Image& image, int width, int height);

// 64-bit FNV-1a over dimensions and pixel bytes.
std::uint64_t content_hash(const Image& image);
std::uint64_t content_hash(const Mask& mask);

}  // namespace parkit
