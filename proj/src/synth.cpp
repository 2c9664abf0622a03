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

#include "parkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "parkit/error.hpp"
#include "parkit/inpaint.hpp"
#include "parkit/raster.hpp"
#include "parkit/seed.hpp"

namespace parkit {
namespace {

constexpr double kSmearVisibility = 20.0;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

Rgb avoid_key(Rgb c) {
  if (c == kMagenta) c.g = 1;
  return c;
}

// Bilinear value noise on a lattice of `cell` pixels, values in [-1, 1].
class ValueNoise {
 public:
  ValueNoise(Rng& rng, int width, int height, double cell) : cell_(cell) {
    gw_ = static_cast<int>(std::ceil(width / cell)) + 2;
    gh_ = static_cast<int>(std::ceil(height / cell)) + 2;
    grid_.resize(static_cast<std::size_t>(gw_) * gh_);
    for (auto& g : grid_) g = uniform(rng, -1.0, 1.0);
  }

  double at(double x, double y, bool smooth) const {
    const double fx = x / cell_, fy = y / cell_;
    const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
    double tx = fx - ix, ty = fy - iy;
    if (smooth) {
      tx = tx * tx * (3 - 2 * tx);
      ty = ty * ty * (3 - 2 * ty);
    } else {
      tx = tx < 0.5 ? 0.0 : 1.0;
      ty = ty < 0.5 ? 0.0 : 1.0;
    }
    auto g = [this](int a, int b) { return grid_[static_cast<std::size_t>(b) * gw_ + a]; };
    const double top = g(ix, iy) * (1 - tx) + g(ix + 1, iy) * tx;
    const double bot = g(ix, iy + 1) * (1 - tx) + g(ix + 1, iy + 1) * tx;
    return top * (1 - ty) + bot * ty;
  }

 private:
  double cell_;
  int gw_ = 0;
  int gh_ = 0;
  std::vector<double> grid_;
};

Rgb random_saturated(Rng& rng) {
  const double h = uniform(rng, 0.0, 6.0);
  const double v = uniform(rng, 150.0, 255.0);
  const double f = h - std::floor(h);
  const double q = v * (1 - f), t = v * f;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h) % 6) {
    case 0: r = v; g = t; b = 0; break;
    case 1: r = q; g = v; b = 0; break;
    case 2: r = 0; g = v; b = t; break;
    case 3: r = 0; g = q; b = v; break;
    case 4: r = t; g = 0; b = v; break;
    default: r = v; g = 0; b = q; break;
  }
  return avoid_key({clamp_byte(r), clamp_byte(g), clamp_byte(b)});
}

struct Footprint {
  Mask shape;
  double cx;
  double cy;
};

Footprint blob_shape(Rng& rng, int w, int h, double cx, double cy, double scale) {
  Footprint f{Mask(w, h), cx, cy};
  paint_ellipse(f.shape, cx, cy, uniform(rng, 3.0, 12.0) * scale, uniform(rng, 3.0, 12.0) * scale,
                uniform(rng, 0.0, std::numbers::pi));
  return f;
}

Footprint checker_shape(Rng& rng, int w, int h, double cx, double cy, double scale) {
  Footprint f{Mask(w, h), cx, cy};
  const double hw = uniform(rng, 3.0, 9.0) * scale, hh = uniform(rng, 3.0, 9.0) * scale;
  for (int y = std::max(0, static_cast<int>(cy - hh)); y <= std::min(h - 1, static_cast<int>(cy + hh)); ++y)
    for (int x = std::max(0, static_cast<int>(cx - hw)); x <= std::min(w - 1, static_cast<int>(cx + hw)); ++x)
      f.shape.set(x, y);
  return f;
}

struct Band {
  Footprint fp;
  double nx;
  double ny;
};

Band band_shape(Rng& rng, int w, int h, double cx, double cy, double scale) {
  Band b{{Mask(w, h), cx, cy}, 0, 0};
  const double angle = uniform(rng, 0.0, std::numbers::pi);
  const double half_len = uniform(rng, 6.0, 16.0) * scale;
  const double half_width = uniform(rng, 2.0, 4.0) * scale;
  const double dx = std::cos(angle), dy = std::sin(angle);
  paint_thick_line(b.fp.shape, cx - dx * half_len, cy - dy * half_len, cx + dx * half_len,
                   cy + dy * half_len, half_width);
  b.nx = -dy;
  b.ny = dx;
  return b;
}

// Keeps the `need` footprint pixels nearest the artifact center.
std::vector<std::pair<int, int>> select_pixels(const Footprint& fp, const Mask& allowed,
                                               std::size_t need) {
  std::vector<std::pair<int, int>> px;
  for (int y = 0; y < fp.shape.height(); ++y)
    for (int x = 0; x < fp.shape.width(); ++x)
      if (fp.shape(x, y) && allowed(x, y)) px.emplace_back(x, y);
  if (px.size() > need) {
    std::stable_sort(px.begin(), px.end(), [&fp](const auto& a, const auto& b) {
      const double da = std::hypot(a.first - fp.cx, a.second - fp.cy);
      const double db = std::hypot(b.first - fp.cx, b.second - fp.cy);
      return da < db;
    });
    px.resize(need);
  }
  return px;
}

// Pixels of `region` where the 5x5 mean of fill - truth exceeds the
// visibility threshold in some channel. Averaging the signed difference
// cancels grain, leaving color shifts and missing structure.
Mask visible_deviation(const Image& fill, const Image& truth, const Mask& region) {
  const int w = fill.width(), h = fill.height();
  Mask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!region(x, y)) continue;
      double sum[3] = {0, 0, 0};
      int n = 0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const int sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h || !region(sx, sy)) continue;
          for (int c = 0; c < 3; ++c) sum[c] += fill.channel(sx, sy, c) - truth.channel(sx, sy, c);
          ++n;
        }
      const double d = std::max({std::abs(sum[0]), std::abs(sum[1]), std::abs(sum[2])}) / n;
      if (d > kSmearVisibility) out.set(x, y);
    }
  return out;
}

}  // namespace

std::string artifact_kind_name(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::kBlob: return "blob";
    case ArtifactKind::kLineBreak: return "line_break";
    case ArtifactKind::kChecker: return "checker";
    case ArtifactKind::kSmear: return "smear";
  }
  return "blob";
}

ArtifactKind parse_artifact_kind(const std::string& name) {
  if (name == "blob") return ArtifactKind::kBlob;
  if (name == "line_break") return ArtifactKind::kLineBreak;
  if (name == "checker") return ArtifactKind::kChecker;
  if (name == "smear") return ArtifactKind::kSmear;
  fail(ErrorCode::kInvalidArgument, "unknown artifact kind '" + name + "'");
}

Image synth_texture(std::uint64_t seed, int width, int height, bool man_made) {
  Rng rng(seed);
  Image img(width, height);
  Rgb a = random_saturated(rng), b = random_saturated(rng);
  // Pull the palette toward gray so injected saturated blobs stand apart.
  auto soften = [](Rgb c) {
    return Rgb{clamp_byte(0.45 * c.r + 70), clamp_byte(0.45 * c.g + 70), clamp_byte(0.45 * c.b + 70)};
  };
  a = soften(a);
  b = soften(b);
  const double angle = uniform(rng, 0.0, 2 * std::numbers::pi);
  const double gx = std::cos(angle), gy = std::sin(angle);
  const double side = std::max(width, height);
  const double scale = std::min(width, height) / 128.0;
  ValueNoise coarse(rng, width, height, 32.0 * scale);
  ValueNoise medium(rng, width, height, (man_made ? 12.0 : 8.0) * scale);
  ValueNoise fine(rng, width, height, 3.0 * scale);
  const double tint[3] = {uniform(rng, 0.6, 1.0), uniform(rng, 0.6, 1.0), uniform(rng, 0.6, 1.0)};
  std::normal_distribution<double> grain(0.0, 5.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double t = 0.5 + ((x - width / 2.0) * gx + (y - height / 2.0) * gy) / side;
      t = std::clamp(t, 0.0, 1.0);
      const double n = 30.0 * coarse.at(x, y, true) + 22.0 * medium.at(x, y, !man_made) +
                       14.0 * fine.at(x, y, true);
      const double base[3] = {a.r + t * (b.r - a.r), a.g + t * (b.g - a.g), a.b + t * (b.b - a.b)};
      Rgb p;
      p.r = clamp_byte(base[0] + n * tint[0] + grain(rng));
      p.g = clamp_byte(base[1] + n * tint[1] + grain(rng));
      p.b = clamp_byte(base[2] + n * tint[2] + grain(rng));
      img.set_pixel(x, y, avoid_key(p));
    }
  }
  const int lines = man_made ? std::uniform_int_distribution<int>(3, 6)(rng)
                             : std::uniform_int_distribution<int>(0, 1)(rng);
  for (int i = 0; i < lines; ++i) {
    Mask stroke(width, height);
    const double lx0 = uniform(rng, 0, width), ly0 = uniform(rng, 0, height);
    const double la = uniform(rng, 0, std::numbers::pi);
    const double reach = 2.0 * side;
    paint_thick_line(stroke, lx0 - reach * std::cos(la), ly0 - reach * std::sin(la),
                     lx0 + reach * std::cos(la), ly0 + reach * std::sin(la),
                     uniform(rng, 0.6, 1.6) * scale);
    const bool dark = std::bernoulli_distribution(0.5)(rng);
    const double shade = dark ? uniform(rng, 20, 60) : uniform(rng, 200, 240);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (stroke(x, y)) {
          const std::uint8_t v = clamp_byte(shade + grain(rng));
          img.set_pixel(x, y, {v, v, v});
        }
  }
  return img;
}

std::vector<Sample> synth_generate(std::uint64_t seed, int n, const SynthConfig& config) {
  require(n > 0, ErrorCode::kInvalidArgument, "synth_generate: n must be > 0");
  require(!config.kinds.empty() || config.perfect_fraction >= 1.0, ErrorCode::kInvalidArgument,
          "synth_generate: no artifact kinds selected");
  require(config.perfect_fraction >= 0.0 && config.perfect_fraction <= 1.0,
          ErrorCode::kInvalidArgument, "perfect_fraction must be in [0,1]");
  const int w = config.width, h = config.height;
  const double scale = std::min(w, h) / 128.0;

  std::vector<bool> perfect(n, false);
  {
    Rng rng(mix_seed(seed, 0xFFFFFFFFULL));
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_perfect = static_cast<int>(std::lround(config.perfect_fraction * n));
    for (int i = 0; i < n_perfect; ++i) perfect[order[i]] = true;
  }
  const std::vector<ArtifactKind> kinds(config.kinds.begin(), config.kinds.end());

  std::vector<Sample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    const bool man_made = std::bernoulli_distribution(0.5)(rng);
    Image image = synth_texture(rng(), w, h, man_made);
    Mask hole = sample_background_hole(rng(), w, h, config.hole);
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%05d", config.id_prefix.c_str(), i);
    Sample s(id, image, hole);
    s.scene_class = man_made ? "man_made" : "natural";
    s.provenance["generator"] = "synth";
    s.provenance["seed"] = std::to_string(seed);

    Image fill = image;
    Mask label(w, h);
    if (!perfect[i]) {
      const double hole_area = static_cast<double>(area(hole));
      double ratio = config.label_ratio_slope > 0.0
                         ? config.label_ratio_slope * hole_area / (static_cast<double>(w) * h)
                         : uniform(rng, config.label_ratio_lo, config.label_ratio_hi);
      ratio = std::clamp(ratio, 0.0, 1.0);
      const auto target = static_cast<std::size_t>(std::lround(ratio * hole_area));
      std::vector<std::size_t> hole_px;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (hole(x, y)) hole_px.push_back(static_cast<std::size_t>(y) * w + x);
      std::size_t labeled = 0;
      std::normal_distribution<double> jitter(0.0, 2.0);
      for (int tries = 0; labeled < target && tries < 400; ++tries) {
        const std::size_t at =
            hole_px[std::uniform_int_distribution<std::size_t>(0, hole_px.size() - 1)(rng)];
        const double cx = static_cast<double>(at % w), cy = static_cast<double>(at / w);
        const ArtifactKind kind = kinds[std::uniform_int_distribution<std::size_t>(0, kinds.size() - 1)(rng)];
        const Mask allowed = subtract(hole, label);
        const std::size_t need = target - labeled;
        if (kind == ArtifactKind::kBlob) {
          Footprint fp = blob_shape(rng, w, h, cx, cy, scale);
          const Rgb c = random_saturated(rng);
          for (auto [x, y] : select_pixels(fp, allowed, need)) {
            fill.set_pixel(x, y, avoid_key({clamp_byte(c.r + jitter(rng)), clamp_byte(c.g + jitter(rng)),
                                            clamp_byte(c.b + jitter(rng))}));
            label.set(x, y);
            ++labeled;
          }
        } else if (kind == ArtifactKind::kChecker) {
          Footprint fp = checker_shape(rng, w, h, cx, cy, scale);
          const Rgb base = image.pixel(static_cast<int>(cx), static_cast<int>(cy));
          const double contrast = uniform(rng, 50.0, 90.0);
          const int cell = std::max(1, static_cast<int>(std::lround(uniform(rng, 1.0, 2.5) * scale)));
          for (auto [x, y] : select_pixels(fp, allowed, need)) {
            const double sign = ((x / cell + y / cell) % 2) ? 1.0 : -1.0;
            fill.set_pixel(x, y, avoid_key({clamp_byte(base.r + sign * contrast + jitter(rng)),
                                            clamp_byte(base.g + sign * contrast + jitter(rng)),
                                            clamp_byte(base.b + sign * contrast + jitter(rng))}));
            label.set(x, y);
            ++labeled;
          }
        } else if (kind == ArtifactKind::kSmear) {
          Footprint fp = blob_shape(rng, w, h, cx, cy, 1.5 * scale);
          Mask region(w, h);
          for (auto [x, y] : select_pixels(fp, allowed, need)) region.set(x, y);
          const Mask frame_check = complement(region);
          if (region.is_empty() || frame_check.is_empty()) continue;
          const int iters = std::uniform_int_distribution<int>(40, 400)(rng);
          fill = toy_diffusion_fill(fill, region, iters);
          // Only the visibly wrong part of a smear counts as an artifact.
          const Mask visible = visible_deviation(fill, image, region);
          label = unite(label, visible);
          labeled += area(visible);
        } else {
          Band band = band_shape(rng, w, h, cx, cy, scale);
          const double shift = uniform(rng, 5.0, 9.0) * scale * (std::bernoulli_distribution(0.5)(rng) ? 1 : -1);
          for (auto [x, y] : select_pixels(band.fp, allowed, need)) {
            const int sx = std::clamp(static_cast<int>(std::lround(x + shift * band.nx)), 0, w - 1);
            const int sy = std::clamp(static_cast<int>(std::lround(y + shift * band.ny)), 0, h - 1);
            const Rgb src = image.pixel(sx, sy);
            fill.set_pixel(x, y, avoid_key({clamp_byte(0.55 * src.r + 10), clamp_byte(0.55 * src.g + 10),
                                            clamp_byte(0.55 * src.b + 10)}));
            label.set(x, y);
            ++labeled;
          }
        }
      }
    }
    s.fill = std::move(fill);
    s.label = std::move(label);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace parkit
