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

#include "parkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parkit/error.hpp"

namespace parkit {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  require(width > 0 && height > 0, ErrorCode::kInvalidArgument,
          "image dimensions must be positive");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

void require_same_shape(const Image& image, const Mask& mask, const char* what) {
  if (!image.same_shape(mask)) {
    fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": image " + std::to_string(image.width()) + "x" +
             std::to_string(image.height()) + " vs mask " + std::to_string(mask.width()) + "x" +
             std::to_string(mask.height()));
  }
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": image " + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()));
  }
}

Image composite(const Image& inside, const Image& context, const Mask& hole) {
  require_same_shape(inside, context, "composite");
  require_same_shape(context, hole, "composite");
  Image out = context;
  auto dst = out.data();
  auto src = inside.data();
  auto bits = hole.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    dst[3 * i] = src[3 * i];
    dst[3 * i + 1] = src[3 * i + 1];
    dst[3 * i + 2] = src[3 * i + 2];
  }
  return out;
}

bool equal_outside(const Image& a, const Image& b, const Mask& region) {
  require_same_shape(a, b, "equal_outside");
  require_same_shape(a, region, "equal_outside");
  auto da = a.data();
  auto db = b.data();
  auto bits = region.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) continue;
    if (da[3 * i] != db[3 * i] || da[3 * i + 1] != db[3 * i + 1] || da[3 * i + 2] != db[3 * i + 2]) {
      return false;
    }
  }
  return true;
}

Image flip_horizontal(const Image& image) {
  Image out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.set_pixel(image.width() - 1 - x, y, image.pixel(x, y));
    }
  }
  return out;
}

Mask flip_horizontal(const Mask& mask) {
  Mask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) out.set(mask.width() - 1 - x, y);
    }
  }
  return out;
}

Image resize_bilinear(const Image& image, int width, int height) {
  if (image.width() == width && image.height() == height) return image;
  Image out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - wy) * ((1 - wx) * image.channel(x0, y0, c) + wx * image.channel(x1, y0, c)) +
                         wy * ((1 - wx) * image.channel(x0, y1, c) + wx * image.channel(x1, y1, c));
        out.set_channel(x, y, c, static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
      }
    }
  }
  return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, std::span<const std::uint8_t> bytes) {
  for (auto b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a_int(std::uint64_t h, int v) {
  const auto u = static_cast<std::uint32_t>(v);
  const std::uint8_t bytes[4] = {static_cast<std::uint8_t>(u), static_cast<std::uint8_t>(u >> 8),
                                 static_cast<std::uint8_t>(u >> 16), static_cast<std::uint8_t>(u >> 24)};
  return fnv1a(h, bytes);
}

}  // namespace

std::uint64_t content_hash(const Image& image) {
  std::uint64_t h = fnv1a_int(fnv1a_int(kFnvOffset, image.width()), image.height());
  return fnv1a(h, image.data());
}

std::uint64_t content_hash(const Mask& mask) {
  std::uint64_t h = fnv1a_int(fnv1a_int(kFnvOffset, mask.width()), mask.height());
  return fnv1a(h, mask.bits());
}

}  // namespace parkit
