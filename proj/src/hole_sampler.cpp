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

#include "parkit/hole_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "parkit/error.hpp"

namespace parkit {
namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

class StrokeCanvas {
 public:
  StrokeCanvas(const Mask& admissible, std::size_t cap)
      : admissible_(admissible), mask_(admissible.width(), admissible.height()), cap_(cap) {}

  // Adds the admissible part of a disc. Returns false (and leaves the canvas
  // untouched) if doing so would push the area past the cap.
  bool stamp(double cx, double cy, double radius) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(mask_.width() - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(mask_.height() - 1, static_cast<int>(std::ceil(cy + radius)));
    const double r2 = radius * radius;
    pending_.clear();
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        if (dx * dx + dy * dy > r2) continue;
        if (!admissible_(x, y) || mask_(x, y)) continue;
        pending_.emplace_back(x, y);
      }
    }
    if (area_ + pending_.size() > cap_) return false;
    for (auto [x, y] : pending_) mask_.set(x, y);
    area_ += pending_.size();
    return true;
  }

  std::size_t area() const { return area_; }
  const Mask& mask() const { return mask_; }

 private:
  const Mask& admissible_;
  Mask mask_;
  std::size_t cap_;
  std::size_t area_ = 0;
  std::vector<std::pair<int, int>> pending_;
};

std::optional<Mask> try_freeform(Rng& rng, const Mask& admissible,
                                 const std::vector<std::size_t>& admissible_idx,
                                 const HoleSamplerConfig& cfg) {
  const int w = admissible.width();
  const int h = admissible.height();
  const double frame_area = static_cast<double>(w) * h;
  const auto lo_px = static_cast<std::size_t>(std::ceil(cfg.ratio_lo * frame_area));
  const auto hi_px = static_cast<std::size_t>(std::floor(cfg.ratio_hi * frame_area));
  const double target = uniform(rng, cfg.ratio_lo, cfg.ratio_hi) * frame_area;
  const auto& sp = cfg.stroke;
  const double scale = std::min(w, h) / sp.reference_side;

  StrokeCanvas canvas(admissible, hi_px);
  for (int s = 0; s < sp.max_strokes; ++s) {
    const std::size_t start =
        admissible_idx[std::uniform_int_distribution<std::size_t>(0, admissible_idx.size() - 1)(rng)];
    double x = static_cast<double>(start % w);
    double y = static_cast<double>(start / w);
    const int vertices = uniform_int(rng, sp.min_vertices, sp.max_vertices);
    const double radius = std::max(1.0, uniform(rng, sp.min_radius, sp.max_radius) * scale);
    double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    bool capped = false;
    for (int v = 0; v < vertices && !capped; ++v) {
      angle += uniform(rng, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
      const double len = std::max(1.0, uniform(rng, sp.min_segment, sp.max_segment) * scale);
      const double nx = std::clamp(x + len * std::cos(angle), 0.0, w - 1.0);
      const double ny = std::clamp(y + len * std::sin(angle), 0.0, h - 1.0);
      const double seg = std::hypot(nx - x, ny - y);
      const double step = std::max(0.5, radius * 0.5);
      const int n = std::max(1, static_cast<int>(std::ceil(seg / step)));
      for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        if (!canvas.stamp(x + t * (nx - x), y + t * (ny - y), radius)) {
          capped = true;
          break;
        }
        if (static_cast<double>(canvas.area()) >= target) return canvas.mask();
      }
      x = nx;
      y = ny;
    }
  }
  if (canvas.area() >= lo_px) return canvas.mask();
  return std::nullopt;
}

std::optional<Mask> try_instance(Rng& rng, const Mask& admissible,
                                 std::span<const Mask> bank, const HoleSamplerConfig& cfg) {
  const int w = admissible.width();
  const int h = admissible.height();
  const Mask& src = bank[std::uniform_int_distribution<std::size_t>(0, bank.size() - 1)(rng)];
  auto box = bounding_box(src);
  if (!box || box->width() > w || box->height() > h) return std::nullopt;
  const bool flip = std::bernoulli_distribution(0.5)(rng);
  const int ox = uniform_int(rng, 0, w - box->width());
  const int oy = uniform_int(rng, 0, h - box->height());
  Mask out(w, h);
  for (int y = box->y0; y <= box->y1; ++y) {
    for (int x = box->x0; x <= box->x1; ++x) {
      if (!src(x, y)) continue;
      const int lx = flip ? box->x1 - x : x - box->x0;
      const int tx = ox + lx;
      const int ty = oy + (y - box->y0);
      if (!admissible(tx, ty)) return std::nullopt;
      out.set(tx, ty);
    }
  }
  const double ratio = static_cast<double>(area(out)) / (static_cast<double>(w) * h);
  if (ratio < cfg.ratio_lo || ratio > cfg.ratio_hi) return std::nullopt;
  return out;
}

}  // namespace

Mask sample_background_hole(std::uint64_t seed, int width, int height,
                            const HoleSamplerConfig& config, std::span<const Mask> forbidden,
                            std::span<const Mask> instance_bank) {
  require(config.ratio_lo > 0.0 && config.ratio_lo <= config.ratio_hi && config.ratio_hi < 1.0,
          ErrorCode::kInvalidArgument, "hole ratio range must satisfy 0 < lo <= hi < 1");
  require(config.max_attempts > 0, ErrorCode::kInvalidArgument, "max_attempts must be > 0");
  if (config.style == HoleStyle::kInstance) {
    require(!instance_bank.empty(), ErrorCode::kInvalidArgument,
            "instance style requires a non-empty instance bank");
  }
  Mask admissible = Mask::full(width, height);
  if (config.forbid_overlap == OverlapPolicy::kFull) {
    for (const auto& f : forbidden) admissible = subtract(admissible, f);
  }
  std::vector<std::size_t> admissible_idx;
  auto bits = admissible.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) admissible_idx.push_back(i);
  }
  const double frame_area = static_cast<double>(width) * height;
  if (static_cast<double>(admissible_idx.size()) < config.ratio_lo * frame_area) {
    fail(ErrorCode::kPlacement, "cannot place hole: admissible region smaller than minimum ratio");
  }

  Rng rng(seed);
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    std::optional<Mask> hole = config.style == HoleStyle::kFreeform
                                   ? try_freeform(rng, admissible, admissible_idx, config)
                                   : try_instance(rng, admissible, instance_bank, config);
    if (hole) return *std::move(hole);
  }
  fail(ErrorCode::kPlacement,
       "cannot place hole after " + std::to_string(config.max_attempts) + " attempts");
}

}  // namespace parkit
