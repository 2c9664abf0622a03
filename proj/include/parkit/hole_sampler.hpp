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

#include <cstdint>
#include <span>

#include "parkit/mask.hpp"

namespace parkit {

enum class HoleStyle { kFreeform, kInstance };

// `kFull` rejects any overlap between a hole and a forbidden (object) mask.
enum class OverlapPolicy { kFull, kNone };

// Stroke geometry is expressed at a 512-pixel reference side and scaled to
// the frame's shorter side.
struct FreeformStrokeParams {
  double min_radius = 8.0;
  double max_radius = 48.0;
  int min_vertices = 4;
  int max_vertices = 12;
  double min_segment = 24.0;
  double max_segment = 128.0;
  double reference_side = 512.0;
  int max_strokes = 64;
};

struct HoleSamplerConfig {
  double ratio_lo = 0.08;
  double ratio_hi = 0.3;
  HoleStyle style = HoleStyle::kFreeform;
  OverlapPolicy forbid_overlap = OverlapPolicy::kFull;
  int max_attempts = 100;
  FreeformStrokeParams stroke;
};

// Draws a hole whose area ratio lies in [ratio_lo, ratio_hi] and which does
// not touch any forbidden mask. Throws ErrorCode::kPlacement when no
// admissible hole is found within max_attempts.
Mask sample_background_hole(std::uint64_t seed, int width, int height,
                            const HoleSamplerConfig& config,
                            std::span<const Mask> forbidden = {},
                            std::span<const Mask> instance_bank = {});

}  // namespace parkit
