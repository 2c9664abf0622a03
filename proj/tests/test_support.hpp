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

// Shared generators and brute-force oracles for the unit suites. Nothing in
// here calls into the code paths it is used to check.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "parkit/image.hpp"
#include "parkit/mask.hpp"

namespace parkit::testing {

inline Mask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  Mask m(w, h);
  std::bernoulli_distribution on(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (on(rng)) m.set(x, y);
  return m;
}

// Blocky random mask: union of a few rectangles, closer to real holes.
inline Mask random_blocks(std::mt19937_64& rng, int w, int h, int count) {
  Mask m(w, h);
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
  for (int i = 0; i < count; ++i) {
    int x0 = px(rng), x1 = px(rng), y0 = py(rng), y1 = py(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) m.set(x, y);
  }
  return m;
}

inline Image random_image(std::mt19937_64& rng, int w, int h) {
  Image img(w, h);
  std::uniform_int_distribution<int> v(0, 254);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set_pixel(x, y, {static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng)),
                           static_cast<std::uint8_t>(v(rng))});
  return img;
}

// Enumerates the full square neighborhood of every pixel.
inline Mask oracle_dilate_once(const Mask& m, int radius) {
  Mask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool hit = false;
      for (int dy = -radius; dy <= radius && !hit; ++dy)
        for (int dx = -radius; dx <= radius && !hit; ++dx) {
          const int sx = x + dx, sy = y + dy;
          if (sx >= 0 && sy >= 0 && sx < m.width() && sy < m.height() && m(sx, sy)) hit = true;
        }
      if (hit) out.set(x, y);
    }
  return out;
}

inline Mask oracle_erode_once(const Mask& m, int radius) {
  Mask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy)
        for (int dx = -radius; dx <= radius && keep; ++dx) {
          const int sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= m.width() || sy >= m.height() || !m(sx, sy)) keep = false;
        }
      if (keep) out.set(x, y);
    }
  return out;
}

inline Mask oracle_dilate(Mask m, int radius, int iters) {
  for (int i = 0; i < iters; ++i) m = oracle_dilate_once(m, radius);
  return m;
}

inline Mask oracle_erode(Mask m, int radius, int iters) {
  for (int i = 0; i < iters; ++i) m = oracle_erode_once(m, radius);
  return m;
}

inline std::size_t oracle_count(const Mask& m) {
  std::size_t n = 0;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) n += m(x, y) ? 1 : 0;
  return n;
}

inline Mask solid_block(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m.set(x, y);
  return m;
}

// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("parkit_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace parkit::testing
