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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkit/detector.hpp"
#include "parkit/image.hpp"
#include "parkit/inpaint.hpp"
#include "parkit/mask.hpp"

namespace parkit {

enum class Termination { kMaxIters, kEmptyArtifacts };

std::string termination_name(Termination t);
Termination parse_termination(const std::string& name);

// One fill pass. `artifact_mask` is the region filled in this step, so the
// first step of either loop carries the whole hole and par 1.
struct IterFillStep {
  Image fill;
  Mask artifact_mask;
  double par = 0;
};

struct IterFillTrace {
  Mask original_hole;
  std::vector<IterFillStep> steps;
  Termination terminated_by = Termination::kMaxIters;
  // Detection on the last fill, clipped to the original hole. Always set by
  // iterative_fill; set by onion_fill only when a scorer is given.
  std::optional<Mask> final_artifact_mask;
  std::optional<double> final_par;

  const Image& result() const { return steps.back().fill; }
};

// Fills the hole, then repeatedly refills predict(model, fill) ∩ hole until
// the prediction is empty or max_iters fills have run.
IterFillTrace iterative_fill(const Image& image, const Mask& hole, const Inpainter& inp,
                             const ArtifactDetector& model, int max_iters = 5);

// Refills erode(hole, 5x5, (k-1)*erode_iters_per_step) at step k, keeping
// the outer rings filled earlier.
IterFillTrace onion_fill(const Image& image, const Mask& hole, const Inpainter& inp, int n_steps = 5,
                         int erode_iters_per_step = 3, const ArtifactDetector* scorer = nullptr);

// Mean par per step over traces, length max_iters. A trace shorter than
// max_iters contributes 0 after it stopped on empty artifacts, and its last
// par after stopping on max_iters.
std::vector<double> par_curve(std::span<const IterFillTrace> traces, int max_iters);

// Same, but over the detection made after each fill (step k's detection is
// step k+1's region; the last one is final_par).
std::vector<double> detected_par_curve(std::span<const IterFillTrace> traces, int max_iters);

// Layout: hole.png, step_NN.png, step_NN_mask.png, trace.json.
void persist_trace(const IterFillTrace& trace, const std::filesystem::path& dir);
IterFillTrace load_trace(const std::filesystem::path& dir);

}  // namespace parkit
