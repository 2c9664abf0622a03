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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parkit/detector.hpp"
#include "parkit/image.hpp"
#include "parkit/mask.hpp"

namespace parkit {

// Two rounds of checks: peer cross-check, then a single expert pass.
enum class ReviewStatus { kUnreviewed, kCrossChecked, kExpertApproved };

std::string_view review_status_name(ReviewStatus s);
ReviewStatus parse_review_status(std::string_view name);

struct Sample {
  Sample(std::string id_, Image image_, Mask hole_)
      : id(std::move(id_)), image(std::move(image_)), hole(std::move(hole_)) {}

  std::string id;
  Image image;
  Mask hole;
  std::optional<Image> fill;
  // Canonicalized artifact label. An empty mask marks a perfect fill; an
  // absent label means the sample has not been labeled.
  std::optional<Mask> label;
  ReviewStatus review_status = ReviewStatus::kUnreviewed;
  std::vector<Mask> revisions;         // prior labels, oldest first
  std::vector<std::string> reviewers;  // one id per completed review round
  std::optional<std::string> scene_class;
  std::map<std::string, std::string> provenance;

  bool is_perfect_fill() const { return label && label->is_empty(); }
  // Image the detector should look at: the fill when present.
  const Image& inspected() const { return fill ? *fill : image; }

  // Throws kShapeMismatch / kValidation when the invariants do not hold.
  void validate() const;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Layout: <root>/<id>/{image.png, hole.png, fill.png?, label.png?, meta.json}
// plus label_rev_NNN.png for each prior label.
std::filesystem::path persist_sample(const Sample& s, const std::filesystem::path& root);
Sample load_sample(const std::filesystem::path& root, const std::string& id);
std::vector<std::string> list_sample_ids(const std::filesystem::path& root);
std::vector<Sample> load_dataset(const std::filesystem::path& root);

struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

// |train| = floor(0.8n), |val| = ceil(0.1n), |test| = the rest, after a
// seeded shuffle.
SplitSpec split_811(std::span<const std::string> ids, std::uint64_t seed);
std::string split_to_json(const SplitSpec& split);
SplitSpec split_from_json(std::string_view text);

struct DatasetStats {
  std::size_t n_total = 0;
  std::size_t n_perfect = 0;
  std::size_t n_unlabeled = 0;
  // Mean of area(label)/area(hole) over samples with a non-empty label.
  std::optional<double> mean_label_hole_ratio;
  std::vector<std::string> excluded_ids;  // samples with an empty hole
};

DatasetStats dataset_stats(std::span<const Sample> samples);
std::string stats_to_json(const DatasetStats& stats);

// Weak labels for pretraining: each prediction is dilated (5x5) a random
// number of times drawn uniformly from [dilation_lo, dilation_hi], then
// clipped to the sample's hole.
std::vector<Sample> pseudo_labels(const ArtifactDetector& detector,
                                  std::span<const Sample> unlabeled, int dilation_lo,
                                  int dilation_hi, std::uint64_t seed);

}  // namespace parkit
