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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkit/mask.hpp"

namespace parkit {

// area(artifact ∩ hole) / area(hole). Throws on an empty hole.
double par(const Mask& artifact, const Mask& hole);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const Mask& pred, const Mask& gt);

// Percentages in [0,100]; a score whose denominator is zero is null.
struct SegScores {
  std::optional<double> iou;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fscore;
};

SegScores scores_from(const ConfusionCounts& c);

enum class Accumulation { kPooled, kPerImage };

// Pooled sums confusion counts over every pixel of every pair first.
// Per-image averages each defined per-pair score.
SegScores seg_scores(std::span<const Mask> preds, std::span<const Mask> gts,
                     Accumulation mode = Accumulation::kPooled);

// Harmonic mean of two percentages; null when both are zero.
std::optional<double> fscore_from(double precision, double recall);

enum class Side { kA, kB, kNone };

std::string side_name(Side s);
Side parse_side(const std::string& name);

// A or B when that side got at least 4 of exactly 5 votes.
Side strong_preference(int votes_a, int votes_b);

enum class Polarity { kHigherBetter, kLowerBetter };

Polarity parse_polarity(const std::string& name);

struct CorrelationPair {
  std::string pair_id;
  double score_a = 0;
  double score_b = 0;
  Side human = Side::kNone;  // must be A or B
};

struct CorrelationRow {
  std::string pair_id;
  Side metric = Side::kNone;  // kNone on a tie
  Side human = Side::kNone;
  bool tie = false;
  bool match = false;
};

struct CorrelationReport {
  std::optional<double> percentage;  // null when every pair tied
  std::size_t tie_count = 0;
  std::size_t n_pairs = 0;
  std::size_t n_matched = 0;
  std::vector<CorrelationRow> rows;
};

// Only the ordering of score_a vs score_b matters.
CorrelationReport metric_correlation(std::span<const CorrelationPair> pairs, Polarity polarity);

struct HoleSizeSample {
  std::string id;
  std::string scene_class;
  double hole_ratio = 0;
  double par = 0;
};

struct HoleSizeCell {
  std::size_t count = 0;
  std::optional<double> mean_par;
};

struct HoleSizeBin {
  double lo = 0;
  double hi = 0;
  std::map<std::string, HoleSizeCell> by_class;
  HoleSizeCell all;
};

struct HoleSizeReport {
  std::vector<std::string> classes;
  std::vector<HoleSizeBin> bins;
};

// `edges` must run strictly upward from 0 to 1; bins are [lo, hi) except the
// last, which includes 1.
HoleSizeReport par_vs_holesize(std::span<const HoleSizeSample> samples, std::span<const double> edges);

// Reports.
std::string seg_scores_json(const SegScores& s, const ConfusionCounts* pooled = nullptr);
std::string correlation_json(const CorrelationReport& r);
std::string correlation_csv(const CorrelationReport& r);
std::string holesize_json(const HoleSizeReport& r);
std::string holesize_csv(const HoleSizeReport& r);

// Scene category -> {man_made, natural}. Editable: load_scene_class_table
// reads a JSON object of the same shape.
const std::map<std::string, std::string>& default_scene_class_table();
std::map<std::string, std::string> load_scene_class_table(const std::string& json_text);
std::optional<std::string> scene_class_for(const std::string& category,
                                           const std::map<std::string, std::string>& table);

}  // namespace parkit
