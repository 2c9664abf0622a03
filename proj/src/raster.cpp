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

#include "parkit/raster.hpp"

#include <algorithm>
#include <cmath>

namespace parkit {

void paint_disc(Mask& m, double cx, double cy, double radius) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  const int x1 = std::min(m.width() - 1, static_cast<int>(std::ceil(cx + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  const int y1 = std::min(m.height() - 1, static_cast<int>(std::ceil(cy + radius)));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy <= r2) m.set(x, y);
    }
  }
}

void paint_thick_line(Mask& m, double x0, double y0, double x1, double y1, double radius) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const double step = std::max(0.5, radius * 0.5);
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    paint_disc(m, x0 + t * (x1 - x0), y0 + t * (y1 - y0), radius);
  }
}

void paint_ellipse(Mask& m, double cx, double cy, double rx, double ry, double angle) {
  const double extent = std::max(rx, ry);
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - extent)));
  const int x1 = std::min(m.width() - 1, static_cast<int>(std::ceil(cx + extent)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - extent)));
  const int y1 = std::min(m.height() - 1, static_cast<int>(std::ceil(cy + extent)));
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const double u = (c * dx + s * dy) / rx;
      const double v = (-s * dx + c * dy) / ry;
      if (u * u + v * v <= 1.0) m.set(x, y);
    }
  }
}

}  // namespace parkit
