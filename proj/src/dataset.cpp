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

#include "parkit/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

#include <json.hpp>

#include "parkit/error.hpp"
#include "parkit/image_io.hpp"

namespace parkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view review_status_name(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kUnreviewed: return "unreviewed";
    case ReviewStatus::kCrossChecked: return "cross_checked";
    case ReviewStatus::kExpertApproved: return "expert_approved";
  }
  return "unreviewed";
}

ReviewStatus parse_review_status(std::string_view name) {
  if (name == "unreviewed") return ReviewStatus::kUnreviewed;
  if (name == "cross_checked") return ReviewStatus::kCrossChecked;
  if (name == "expert_approved") return ReviewStatus::kExpertApproved;
  fail(ErrorCode::kValidation, "unknown review status '" + std::string(name) + "'");
}

void Sample::validate() const {
  require(!id.empty(), ErrorCode::kValidation, "sample id is empty");
  require_same_shape(image, hole, "sample hole");
  if (fill) require_same_shape(image, *fill, "sample fill");
  if (label) {
    require_same_shape(image, *label, "sample label");
    require(is_subset(*label, hole), ErrorCode::kValidation,
            "sample " + id + ": label extends outside the hole");
  }
  for (const auto& rev : revisions) require_same_shape(image, rev, "sample revision");
}

namespace {

std::string revision_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "label_rev_%03zu.png", i);
  return buf;
}

void check_id(const std::string& id) {
  require(!id.empty() && id.find('/') == std::string::npos && id != "." && id != "..",
          ErrorCode::kInvalidArgument, "invalid sample id '" + id + "'");
}

}  // namespace

fs::path persist_sample(const Sample& s, const fs::path& root) {
  s.validate();
  check_id(s.id);
  const fs::path dir = root / s.id;
  fs::create_directories(dir);
  write_image(dir / "image.png", s.image);
  write_mask(dir / "hole.png", s.hole);
  if (s.fill) {
    write_image(dir / "fill.png", *s.fill);
  } else {
    fs::remove(dir / "fill.png");
  }
  if (s.label) {
    write_mask(dir / "label.png", *s.label);
  } else {
    fs::remove(dir / "label.png");
  }
  json revisions = json::array();
  for (std::size_t i = 0; i < s.revisions.size(); ++i) {
    write_mask(dir / revision_name(i), s.revisions[i]);
    revisions.push_back(revision_name(i));
  }
  for (std::size_t i = s.revisions.size(); fs::exists(dir / revision_name(i)); ++i) {
    fs::remove(dir / revision_name(i));
  }
  json meta = {
      {"id", s.id},
      {"review_status", review_status_name(s.review_status)},
      {"revisions", revisions},
      {"reviewers", s.reviewers},
      {"has_fill", s.fill.has_value()},
      {"has_label", s.label.has_value()},
      {"provenance", s.provenance},
  };
  meta["scene_class"] = s.scene_class ? json(*s.scene_class) : json(nullptr);
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  return dir;
}

Sample load_sample(const fs::path& root, const std::string& id) {
  check_id(id);
  const fs::path dir = root / id;
  require(fs::is_directory(dir), ErrorCode::kNotFound, "sample not found: " + id);
  json meta;
  try {
    meta = json::parse(read_text(dir / "meta.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, "sample " + id + ": malformed meta.json: " + e.what());
  }
  try {
    Sample s(id, read_image(dir / "image.png"), read_mask(dir / "hole.png"));
    if (meta.at("has_fill").get<bool>()) s.fill = read_image(dir / "fill.png");
    if (meta.at("has_label").get<bool>()) s.label = read_mask(dir / "label.png");
    s.review_status = parse_review_status(meta.at("review_status").get<std::string>());
    for (const auto& name : meta.at("revisions")) {
      s.revisions.push_back(read_mask(dir / name.get<std::string>()));
    }
    s.reviewers = meta.value("reviewers", std::vector<std::string>{});
    s.provenance = meta.value("provenance", std::map<std::string, std::string>{});
    if (meta.contains("scene_class") && !meta["scene_class"].is_null()) {
      s.scene_class = meta["scene_class"].get<std::string>();
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, "sample " + id + ": malformed meta.json: " + e.what());
  }
}

std::vector<std::string> list_sample_ids(const fs::path& root) {
  require(fs::is_directory(root), ErrorCode::kNotFound, "dataset root not found: " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Sample> load_dataset(const fs::path& root) {
  std::vector<Sample> out;
  for (const auto& id : list_sample_ids(root)) out.push_back(load_sample(root, id));
  return out;
}

SplitSpec split_811(std::span<const std::string> ids, std::uint64_t seed) {
  const std::size_t n = ids.size();
  require(n >= 3, ErrorCode::kInvalidArgument, "split_811 needs at least 3 ids");
  std::set<std::string> unique(ids.begin(), ids.end());
  require(unique.size() == n, ErrorCode::kValidation, "split_811: duplicate ids");
  std::vector<std::string> order(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = (8 * n) / 10;
  const std::size_t n_val = (n + 9) / 10;
  SplitSpec split;
  split.seed = seed;
  split.train_ids.assign(order.begin(), order.begin() + n_train);
  split.val_ids.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test_ids.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

std::string split_to_json(const SplitSpec& split) {
  json j = {{"seed", split.seed},
            {"train", split.train_ids},
            {"val", split.val_ids},
            {"test", split.test_ids}};
  return j.dump(2) + "\n";
}

SplitSpec split_from_json(std::string_view text) {
  try {
    json j = json::parse(text);
    SplitSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_ids = j.at("train").get<std::vector<std::string>>();
    s.val_ids = j.at("val").get<std::vector<std::string>>();
    s.test_ids = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed split file: ") + e.what());
  }
}

DatasetStats dataset_stats(std::span<const Sample> samples) {
  DatasetStats stats;
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  for (const auto& s : samples) {
    const std::size_t hole_area = area(s.hole);
    if (hole_area == 0) {
      stats.excluded_ids.push_back(s.id);
      continue;
    }
    ++stats.n_total;
    if (!s.label) {
      ++stats.n_unlabeled;
      continue;
    }
    require(is_subset(*s.label, s.hole), ErrorCode::kPrecondition,
            "dataset_stats: label of " + s.id + " is not canonicalized");
    const std::size_t label_area = area(*s.label);
    if (label_area == 0) {
      ++stats.n_perfect;
      continue;
    }
    ratio_sum += static_cast<double>(label_area) / static_cast<double>(hole_area);
    ++ratio_count;
  }
  if (ratio_count > 0) stats.mean_label_hole_ratio = ratio_sum / static_cast<double>(ratio_count);
  return stats;
}

std::string stats_to_json(const DatasetStats& stats) {
  json j = {{"n_total", stats.n_total},
            {"n_perfect", stats.n_perfect},
            {"n_unlabeled", stats.n_unlabeled},
            {"excluded_ids", stats.excluded_ids}};
  j["mean_label_hole_ratio"] =
      stats.mean_label_hole_ratio ? json(*stats.mean_label_hole_ratio) : json(nullptr);
  return j.dump(2) + "\n";
}

std::vector<Sample> pseudo_labels(const ArtifactDetector& detector,
                                  std::span<const Sample> unlabeled, int dilation_lo,
                                  int dilation_hi, std::uint64_t seed) {
  require(dilation_lo >= 0 && dilation_hi >= dilation_lo, ErrorCode::kInvalidArgument,
          "pseudo_labels: dilation range must satisfy 0 <= lo <= hi");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> iters(dilation_lo, dilation_hi);
  const StructuringElement k(5);
  std::vector<Sample> out;
  out.reserve(unlabeled.size());
  for (const auto& s : unlabeled) {
    const int u = iters(rng);
    Mask grown = dilate(detector.predict_raw(s.inspected(), &s.hole), k, u);
    Sample p = s;
    p.label = intersect(grown, s.hole);
    p.revisions.clear();
    p.review_status = ReviewStatus::kUnreviewed;
    p.provenance["pseudo_label_dilation"] = std::to_string(u);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace parkit
