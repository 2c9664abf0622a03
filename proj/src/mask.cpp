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

#include "parkit/mask.hpp"

#include <algorithm>
#include <numeric>

#include "parkit/error.hpp"

namespace parkit {

Mask::Mask(int width, int height, bool value) : width_(width), height_(height) {
  require(width > 0 && height > 0, ErrorCode::kInvalidArgument,
          "mask dimensions must be positive, got " + std::to_string(width) + "x" +
              std::to_string(height));
  bits_.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
}

Mask Mask::from_bits(int width, int height, std::vector<std::uint8_t> bits) {
  Mask m(width, height);
  require(bits.size() == m.bits_.size(), ErrorCode::kShapeMismatch,
          "bit buffer size does not match mask dimensions");
  for (auto& b : bits) {
    require(b <= 1, ErrorCode::kValidation, "mask cells must be 0 or 1");
  }
  m.bits_ = std::move(bits);
  return m;
}

bool Mask::is_empty() const {
  return std::none_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

StructuringElement::StructuringElement(int side) : side_(side) {
  require(side >= 1 && side % 2 == 1, ErrorCode::kInvalidArgument,
          "structuring element side must be odd and >= 1, got " + std::to_string(side));
}

void require_same_shape(const Mask& a, const Mask& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()));
  }
}

namespace {

// One separable pass along rows (horizontal=true) or columns. A cell is set
// when the count of ones inside the in-frame window satisfies `keep`.
// Out-of-frame cells contribute nothing, and for erosion the window must be
// entirely in-frame, which is checked by comparing against the full side.
template <typename Keep>
std::vector<std::uint8_t> window_pass(const std::vector<std::uint8_t>& src, int w, int h,
                                      int radius, bool horizontal, Keep keep) {
  std::vector<std::uint8_t> dst(src.size(), 0);
  const int lines = horizontal ? h : w;
  const int len = horizontal ? w : h;
  std::vector<int> prefix(len + 1);
  for (int line = 0; line < lines; ++line) {
    prefix[0] = 0;
    for (int i = 0; i < len; ++i) {
      const std::size_t idx = horizontal ? static_cast<std::size_t>(line) * w + i
                                         : static_cast<std::size_t>(i) * w + line;
      prefix[i + 1] = prefix[i] + src[idx];
    }
    for (int i = 0; i < len; ++i) {
      const int lo = i - radius;
      const int hi = i + radius;
      const int count = prefix[std::min(hi, len - 1) + 1] - prefix[std::max(lo, 0)];
      const std::size_t idx = horizontal ? static_cast<std::size_t>(line) * w + i
                                         : static_cast<std::size_t>(i) * w + line;
      dst[idx] = keep(count) ? 1 : 0;
    }
  }
  return dst;
}

}  // namespace

Mask dilate(const Mask& m, const StructuringElement& k, int iters) {
  require(iters >= 0, ErrorCode::kInvalidArgument, "dilate: iters must be >= 0");
  const int r = k.radius();
  if (iters == 0 || r == 0) return m;
  std::vector<std::uint8_t> cur(m.bits().begin(), m.bits().end());
  auto any = [](int count) { return count > 0; };
  for (int it = 0; it < iters; ++it) {
    cur = window_pass(cur, m.width(), m.height(), r, true, any);
    cur = window_pass(cur, m.width(), m.height(), r, false, any);
  }
  return Mask::from_bits(m.width(), m.height(), std::move(cur));
}

Mask erode(const Mask& m, const StructuringElement& k, int iters) {
  require(iters >= 0, ErrorCode::kInvalidArgument, "erode: iters must be >= 0");
  const int r = k.radius();
  if (iters == 0 || r == 0) return m;
  const int side = k.side();
  auto all = [side](int count) { return count == side; };
  std::vector<std::uint8_t> cur(m.bits().begin(), m.bits().end());
  for (int it = 0; it < iters; ++it) {
    cur = window_pass(cur, m.width(), m.height(), r, true, all);
    cur = window_pass(cur, m.width(), m.height(), r, false, all);
  }
  return Mask::from_bits(m.width(), m.height(), std::move(cur));
}

namespace {

template <typename Op>
Mask combine(const Mask& a, const Mask& b, const char* what, Op op) {
  require_same_shape(a, b, what);
  std::vector<std::uint8_t> out(a.pixel_count());
  auto ab = a.bits();
  auto bb = b.bits();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(ab[i], bb[i]) ? 1 : 0;
  return Mask::from_bits(a.width(), a.height(), std::move(out));
}

}  // namespace

Mask intersect(const Mask& a, const Mask& b) {
  return combine(a, b, "intersect", [](auto x, auto y) { return x && y; });
}

Mask unite(const Mask& a, const Mask& b) {
  return combine(a, b, "unite", [](auto x, auto y) { return x || y; });
}

Mask subtract(const Mask& a, const Mask& b) {
  return combine(a, b, "subtract", [](auto x, auto y) { return x && !y; });
}

Mask complement(const Mask& m) {
  std::vector<std::uint8_t> out(m.pixel_count());
  auto bits = m.bits();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = bits[i] ? 0 : 1;
  return Mask::from_bits(m.width(), m.height(), std::move(out));
}

std::size_t area(const Mask& m) {
  auto bits = m.bits();
  return static_cast<std::size_t>(std::accumulate(bits.begin(), bits.end(), std::size_t{0}));
}

bool is_subset(const Mask& inner, const Mask& outer) {
  require_same_shape(inner, outer, "is_subset");
  auto a = inner.bits();
  auto b = outer.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

std::optional<Rect> bounding_box(const Mask& m) {
  Rect r{m.width(), m.height(), -1, -1};
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      r.x0 = std::min(r.x0, x);
      r.y0 = std::min(r.y0, y);
      r.x1 = std::max(r.x1, x);
      r.y1 = std::max(r.y1, y);
    }
  }
  if (r.x1 < 0) return std::nullopt;
  return r;
}

Rect display_bbox(const Mask& hole, int margin) {
  require(margin >= 0, ErrorCode::kInvalidArgument, "display_bbox: margin must be >= 0");
  auto box = bounding_box(hole);
  require(box.has_value(), ErrorCode::kInvalidArgument, "display_bbox: hole is empty");
  return Rect{std::max(0, box->x0 - margin), std::max(0, box->y0 - margin),
              std::min(hole.width() - 1, box->x1 + margin),
              std::min(hole.height() - 1, box->y1 + margin)};
}

Mask object_removal_mask(const Mask& instance) {
  require(!instance.is_empty(), ErrorCode::kInvalidArgument,
          "object_removal_mask: instance mask is empty");
  return dilate(instance, StructuringElement(5), 3);
}

Mask canonicalize_label(const Mask& raw_label, const Mask& hole) {
  require_same_shape(raw_label, hole, "canonicalize_label");
  return intersect(raw_label, hole);
}

Mask resize_nearest(const Mask& m, int width, int height) {
  Mask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(m.height() - 1, static_cast<int>((static_cast<long long>(y) * m.height()) / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(m.width() - 1, static_cast<int>((static_cast<long long>(x) * m.width()) / width));
      if (m(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

Mask inner_boundary(const Mask& m) {
  Mask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1 ||
                        !m(x - 1, y) || !m(x + 1, y) || !m(x, y - 1) || !m(x, y + 1);
      if (edge) out.set(x, y);
    }
  }
  return out;
}

}  // namespace parkit
