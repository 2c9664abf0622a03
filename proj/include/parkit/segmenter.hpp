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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkit/dataset.hpp"
#include "parkit/detector.hpp"
#include "parkit/nn/network.hpp"

namespace parkit {

struct SegConfig {
  std::string backbone_id = "small";  // small | medium
  std::string head_id = "pyramid";    // pyramid | fcn
  double aux_head_weight = 0.4;
  int max_iters = 20000;
  double base_lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double lr_power = 0.9;
  double min_lr = 0.0001;
  double flip_prob = 0.5;
  bool jpeg_aug = true;
  double jpeg_prob = 0.5;
  int jpeg_quality_lo = 30;
  int jpeg_quality_hi = 95;
  int input_size = 512;
  int batch_size = 8;
  // Adds the hole as a fourth {0,1} input channel.
  bool include_hole_channel = false;
  std::uint64_t seed = 0;
  // Iterations on the pseudo-labeled set before the main schedule starts.
  int pretrain_iters = 0;
  int val_interval = 200;
  int log_interval = 10;

  // Throws kInvalidArgument on out-of-range fields.
  void validate() const;
  nn::Architecture architecture() const;

  friend bool operator==(const SegConfig&, const SegConfig&) = default;
};

std::string seg_config_to_json(const SegConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
SegConfig seg_config_from_json(std::string_view text);

// max(min_lr, base_lr * (1 - iter/max_iters)^lr_power) for 0 <= iter <= max_iters.
double poly_lr(const SegConfig& c, int iter);

// Trained two-class segmenter. Immutable after training, so concurrent
// detect() calls are safe.
class SegModel final : public ArtifactDetector {
 public:
  SegModel(const SegConfig& config, std::uint64_t init_seed);

  // Resizes to input_size when needed; the mask is restored nearest-neighbor.
  Mask detect(const Image& image, const Mask* hole) const override;

  const SegConfig& config() const { return config_; }
  std::optional<double> best_val_iou() const { return best_val_iou_; }
  int best_iter() const { return best_iter_; }
  void set_selection(std::optional<double> best_val_iou, int best_iter);

  nn::SegNet<float>& net() { return net_; }
  const nn::SegNet<float>& net() const { return net_; }

  // Checkpoint: "PATCKPT1", u64 JSON length, JSON header, raw float32 weights.
  void save(const std::filesystem::path& path) const;
  static SegModel load(const std::filesystem::path& path);

 private:
  SegConfig config_;
  nn::SegNet<float> net_;
  std::optional<double> best_val_iou_;
  int best_iter_ = -1;
};

struct TrainExtras {
  // Weakly labeled samples for pretraining (see pseudo_labels).
  std::vector<Sample> pseudo_pretrain;
  // Clean images trained as all-background targets.
  std::vector<Image> real_negatives;
};

struct TrainLogRow {
  int iter = 0;
  double lr = 0;
  double loss_main = 0;
  double loss_aux = 0;
  std::optional<double> val_iou;
};

struct TrainResult {
  SegModel model;
  std::vector<TrainLogRow> log;
  std::vector<TrainLogRow> pretrain_log;
};

using TrainProgress = std::function<void(const TrainLogRow&)>;

// Keeps the weights with the best validation IoU (the final ones when `val`
// is empty). Throws kInvalidArgument on an empty train set, kPrecondition
// on unlabeled or non-canonical samples, kNumerical on a non-finite loss.
TrainResult train(const SegConfig& config, std::span<const Sample> train_samples,
                  std::span<const Sample> val_samples, const TrainExtras& extras = {},
                  const TrainProgress& progress = {});

// Pixel-pooled IoU of hole-clipped predictions against labels; null when
// both are empty everywhere.
std::optional<double> validation_iou(const ArtifactDetector& model, std::span<const Sample> samples);

std::string train_log_csv(std::span<const TrainLogRow> rows);

}  // namespace parkit
