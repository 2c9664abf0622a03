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

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkit/dataset.hpp"
#include "parkit/detector.hpp"
#include "parkit/error.hpp"
#include "parkit/evaluation.hpp"
#include "parkit/inpaint.hpp"
#include "parkit/iterfill.hpp"

namespace httplib {
class Server;
}

namespace parkit::service {

using json = nlohmann::json;
using Clock = std::function<std::chrono::system_clock::time_point()>;

struct ServiceConfig {
  // Sample store in the dataset layout; vote pairs live under <store>/_pairs.
  std::filesystem::path store_root;
  std::chrono::seconds lease{30 * 60};
  int bbox_margin = 16;
  std::uint64_t seed = 0;
  Clock clock = [] { return std::chrono::system_clock::now(); };
  std::map<std::string, std::shared_ptr<const ArtifactDetector>> models;
  std::map<std::string, InpainterSpec> backends;
  // Scores refills that name no model. Empty disables scoring.
  std::string default_model;
};

// Pink artifact boundary over the image, plus an optional blue rectangle.
Image render_overlay(const Image& image, const Mask& artifacts, const std::optional<Rect>& bbox = std::nullopt);

// All operations are safe to call concurrently. Results are JSON payloads
// with masks and images as base64 PNG. Failures throw parkit::Error.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  // Null when the queue has nothing for this annotator.
  std::optional<json> next_task(const std::string& queue, const std::string& annotator_id);
  json submit_label(const std::string& sample_id, const Mask& raw_label, const std::string& annotator_id);
  json submit_review(const std::string& sample_id, const std::string& reviewer_id, bool approve);
  json segment(const std::string& sample_id, const std::string& model_id);
  json refill(const std::string& sample_id, const std::optional<Mask>& mask_override,
              const std::string& backend_id, const std::optional<std::string>& model_id);
  json vote(const std::string& pair_id, Side chosen, const std::string& voter_id);
  // Vote addressed by serving: `left` true when the left image was chosen.
  json vote_serving(const std::string& serving_id, bool left);
  json sample(const std::string& sample_id, bool include_hole) const;
  json trace(const std::string& sample_id) const;
  json pair(const std::string& pair_id) const;

  void add_pair(const std::string& pair_id, const Image& a, const Image& b);
  // Every serving of a vote task: {serving_id, pair_id, voter_id, left}.
  std::vector<json> servings() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Registers the /v1 routes on `server`.
void mount(httplib::Server& server, Service& service);

int http_status_for(ErrorCode code);

}  // namespace parkit::service
