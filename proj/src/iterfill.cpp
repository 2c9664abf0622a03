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

#include "parkit/iterfill.hpp"

#include <cstdio>

#include <json.hpp>

#include "parkit/error.hpp"
#include "parkit/image_io.hpp"

namespace parkit {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string termination_name(Termination t) {
  return t == Termination::kMaxIters ? "max_iters" : "empty_artifacts";
}

Termination parse_termination(const std::string& name) {
  if (name == "max_iters") return Termination::kMaxIters;
  if (name == "empty_artifacts") return Termination::kEmptyArtifacts;
  fail(ErrorCode::kValidation, "unknown termination '" + name + "'");
}

namespace {

double ratio(const Mask& m, std::size_t hole_area) {
  return static_cast<double>(area(m)) / static_cast<double>(hole_area);
}

Image fill_step(const Inpainter& inp, const Image& image, const Mask& hole, int step) {
  try {
    return inp.fill(image, hole);
  } catch (const Error& e) {
    throw Error(e.code(), "fill step " + std::to_string(step) + ": " + e.what());
  }
}

void check_inputs(const Image& image, const Mask& hole, int iters, const char* what) {
  require_same_shape(image, hole, what);
  require(!hole.is_empty(), ErrorCode::kInvalidArgument, std::string(what) + ": hole is empty");
  require(iters >= 1, ErrorCode::kInvalidArgument, std::string(what) + ": need at least one step");
}

}  // namespace

IterFillTrace iterative_fill(const Image& image, const Mask& hole, const Inpainter& inp,
                             const ArtifactDetector& model, int max_iters) {
  check_inputs(image, hole, max_iters, "iterative_fill");
  const std::size_t total = area(hole);
  IterFillTrace trace{hole, {}, Termination::kMaxIters, std::nullopt, std::nullopt};
  Image current = image;
  Mask region = hole;
  for (int k = 1; k <= max_iters; ++k) {
    current = fill_step(inp, current, region, k);
    trace.steps.push_back({current, region, ratio(region, total)});
    Mask detected = model.predict(current, &hole);
    const bool empty = detected.is_empty();
    if (empty || k == max_iters) {
      trace.terminated_by = empty ? Termination::kEmptyArtifacts : Termination::kMaxIters;
      trace.final_par = ratio(detected, total);
      trace.final_artifact_mask = std::move(detected);
      break;
    }
    region = std::move(detected);
  }
  return trace;
}

IterFillTrace onion_fill(const Image& image, const Mask& hole, const Inpainter& inp, int n_steps,
                         int erode_iters_per_step, const ArtifactDetector* scorer) {
  check_inputs(image, hole, n_steps, "onion_fill");
  require(erode_iters_per_step >= 0, ErrorCode::kInvalidArgument,
          "onion_fill: erode_iters_per_step must be >= 0");
  const std::size_t total = area(hole);
  const StructuringElement k5(5);
  IterFillTrace trace{hole, {}, Termination::kMaxIters, std::nullopt, std::nullopt};
  Image current = image;
  for (int k = 1; k <= n_steps; ++k) {
    Mask region = k == 1 ? hole : erode(hole, k5, (k - 1) * erode_iters_per_step);
    if (region.is_empty()) {
      trace.terminated_by = Termination::kEmptyArtifacts;
      break;
    }
    current = fill_step(inp, current, region, k);
    trace.steps.push_back({current, region, ratio(region, total)});
  }
  if (scorer) {
    Mask detected = scorer->predict(current, &hole);
    trace.final_par = ratio(detected, total);
    trace.final_artifact_mask = std::move(detected);
  }
  return trace;
}

namespace {

double carried(const IterFillTrace& t) {
  if (t.terminated_by == Termination::kEmptyArtifacts) return 0.0;
  return t.steps.back().par;
}

}  // namespace

std::vector<double> par_curve(std::span<const IterFillTrace> traces, int max_iters) {
  require(!traces.empty(), ErrorCode::kInvalidArgument, "par_curve: no traces");
  require(max_iters >= 1, ErrorCode::kInvalidArgument, "par_curve: max_iters must be >= 1");
  std::vector<double> curve(static_cast<std::size_t>(max_iters), 0.0);
  for (const auto& t : traces) {
    require(!t.steps.empty(), ErrorCode::kInvalidArgument, "par_curve: trace without steps");
    for (int k = 0; k < max_iters; ++k)
      curve[k] += k < static_cast<int>(t.steps.size()) ? t.steps[k].par : carried(t);
  }
  for (double& v : curve) v /= static_cast<double>(traces.size());
  return curve;
}

std::vector<double> detected_par_curve(std::span<const IterFillTrace> traces, int max_iters) {
  require(!traces.empty(), ErrorCode::kInvalidArgument, "detected_par_curve: no traces");
  require(max_iters >= 1, ErrorCode::kInvalidArgument, "detected_par_curve: max_iters must be >= 1");
  std::vector<double> curve(static_cast<std::size_t>(max_iters), 0.0);
  for (const auto& t : traces) {
    require(t.final_par.has_value(), ErrorCode::kInvalidArgument,
            "detected_par_curve: trace has no final detection");
    const int n = static_cast<int>(t.steps.size());
    for (int k = 0; k < max_iters; ++k) {
      double v;
      if (k + 1 < n) v = t.steps[k + 1].par;
      else if (t.terminated_by == Termination::kEmptyArtifacts) v = 0.0;
      else v = *t.final_par;
      curve[k] += v;
    }
  }
  for (double& v : curve) v /= static_cast<double>(traces.size());
  return curve;
}

namespace {

std::string step_name(std::size_t k, const char* suffix) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%02zu%s.png", k, suffix);
  return buf;
}

}  // namespace

void persist_trace(const IterFillTrace& trace, const fs::path& dir) {
  fs::create_directories(dir);
  write_mask(dir / "hole.png", trace.original_hole);
  json steps = json::array();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const std::string fill = step_name(i + 1, ""), mask = step_name(i + 1, "_mask");
    write_image(dir / fill, s.fill);
    write_mask(dir / mask, s.artifact_mask);
    steps.push_back({{"step", i + 1}, {"fill", fill}, {"artifact_mask", mask}, {"par", s.par}});
  }
  json j = {{"original_hole", "hole.png"},
            {"steps", steps},
            {"pars", [&] {
               json p = json::array();
               for (const auto& s : trace.steps) p.push_back(s.par);
               return p;
             }()},
            {"terminated_by", termination_name(trace.terminated_by)}};
  j["final_par"] = trace.final_par ? json(*trace.final_par) : json(nullptr);
  if (trace.final_artifact_mask) {
    write_mask(dir / "final_mask.png", *trace.final_artifact_mask);
    j["final_artifact_mask"] = "final_mask.png";
  }
  write_text(dir / "trace.json", j.dump(2) + "\n");
}

IterFillTrace load_trace(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_text(dir / "trace.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, "malformed trace.json in " + dir.string() + ": " + e.what());
  }
  try {
    IterFillTrace t{read_mask(dir / j.at("original_hole").get<std::string>()), {},
                    parse_termination(j.at("terminated_by").get<std::string>()), std::nullopt,
                    std::nullopt};
    for (const auto& s : j.at("steps"))
      t.steps.push_back({read_image(dir / s.at("fill").get<std::string>()),
                         read_mask(dir / s.at("artifact_mask").get<std::string>()), s.at("par").get<double>()});
    if (!j.at("final_par").is_null()) t.final_par = j.at("final_par").get<double>();
    if (j.contains("final_artifact_mask"))
      t.final_artifact_mask = read_mask(dir / j.at("final_artifact_mask").get<std::string>());
    return t;
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, "malformed trace.json in " + dir.string() + ": " + e.what());
  }
}

}  // namespace parkit
