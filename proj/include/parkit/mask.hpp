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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parkit {

// Binary raster. Cells hold exactly 0 or 1; 1 marks membership in the region
// (hole, artifact label, prediction).
class Mask {
 public:
  Mask(int width, int height, bool value = false);

  static Mask full(int width, int height) { return Mask(width, height, true); }
  // Takes ownership of raw 0/1 cells in row-major order.
  static Mask from_bits(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return bits_.size(); }

  bool operator()(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }

  bool is_empty() const;
  bool same_shape(const Mask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

// Square kernel with an odd side.
class StructuringElement {
 public:
  explicit StructuringElement(int side = 5);

  static StructuringElement square(int side) { return StructuringElement(side); }

  int side() const { return side_; }
  int radius() const { return side_ / 2; }

 private:
  int side_;
};

// Inclusive pixel rectangle, {x0,y0,x1,y1}.
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Morphology treats pixels outside the frame as 0 for both operations, so
// erosion eats inward from the frame edges.
Mask dilate(const Mask& m, const StructuringElement& k, int iters);
Mask erode(const Mask& m, const StructuringElement& k, int iters);

Mask intersect(const Mask& a, const Mask& b);
Mask unite(const Mask& a, const Mask& b);
Mask subtract(const Mask& a, const Mask& b);
Mask complement(const Mask& m);

std::size_t area(const Mask& m);
bool is_subset(const Mask& inner, const Mask& outer);

std::optional<Rect> bounding_box(const Mask& m);

// Tight box around the hole grown by `margin`, clipped to the frame.
Rect display_bbox(const Mask& hole, int margin);

// Instance mask dilated three times with a 5x5 kernel.
Mask object_removal_mask(const Mask& instance);

// Human labels may spill over the hole boundary; only in-hole pixels survive.
Mask canonicalize_label(const Mask& raw_label, const Mask& hole);

Mask resize_nearest(const Mask& m, int width, int height);

// Pixels of `m` that have a 4-neighbor outside `m` (frame edges count as outside).
Mask inner_boundary(const Mask& m);

void require_same_shape(const Mask& a, const Mask& b, const char* what);

}  // namespace parkit
