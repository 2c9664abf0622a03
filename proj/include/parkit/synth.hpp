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
#include <set>
#include <string>
#include <vector>

#include "parkit/dataset.hpp"
#include "parkit/hole_sampler.hpp"

namespace parkit {

// Desk-scale stand-in for human-labeled inpainting results: a procedural
// image, a sampled hole, a "fill" that equals the image except for injected
// artifacts inside the hole, and a label equal to the injected footprint.
// kSmear replaces the footprint with a short diffusion fill, the kind of
// texture-free patch classical fillers leave behind.
enum class ArtifactKind { kBlob, kLineBreak, kChecker, kSmear };

std::string artifact_kind_name(ArtifactKind k);
ArtifactKind parse_artifact_kind(const std::string& name);

struct SynthConfig {
  int width = 128;
  int height = 128;
  std::set<ArtifactKind> kinds = {ArtifactKind::kBlob, ArtifactKind::kLineBreak,
                                  ArtifactKind::kChecker, ArtifactKind::kSmear};
  // Exact share of samples (rounded) that get no artifacts and an empty label.
  double perfect_fraction = 0.17;
  // Target label/hole area ratio per artifact-bearing sample, drawn
  // uniformly; artifacts are trimmed to hit the target pixel count.
  double label_ratio_lo = 0.15;
  double label_ratio_hi = 0.45;
  // When > 0 the target ratio is slope * (hole area / frame area) instead,
  // so artifacts grow with hole size.
  double label_ratio_slope = 0.0;
  HoleSamplerConfig hole;
  std::string id_prefix = "synth";
};

Image synth_texture(std::uint64_t seed, int width, int height, bool man_made);

std::vector<Sample> synth_generate(std::uint64_t seed, int n, const SynthConfig& config);

}  // namespace parkit
