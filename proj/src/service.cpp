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

#include "parkit/service.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <shared_mutex>
#include <set>

#include <httplib.h>

#include "parkit/error.hpp"
#include "parkit/image_io.hpp"
#include "parkit/seed.hpp"

namespace parkit::service {

namespace fs = std::filesystem;
using TimePoint = std::chrono::system_clock::time_point;

namespace {

constexpr Rgb kPink{255, 105, 180};
constexpr Rgb kBlue{0, 0, 255};

std::string png64(const Image& image) { return base64_encode(encode_png(image)); }
std::string png64(const Mask& mask) { return base64_encode(encode_mask_png(mask)); }

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json rect_json(const Rect& r) {
  return {{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}};
}

std::int64_t epoch_ms(TimePoint t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

struct Lease {
  std::string holder;
  TimePoint expires;
};

struct Vote {
  std::string voter_id;
  Side chosen;
};

struct PairRecord {
  std::string id;
  Image a, b;
  std::vector<Vote> votes;
  std::optional<Side> strong;  // set once, when the fifth vote lands
  bool closed() const { return votes.size() >= 5; }
};

struct Serving {
  std::string id;
  std::string pair_id;
  std::string voter_id;
  bool a_left = true;
  TimePoint expires;
  bool used = false;
};

json pair_json(const PairRecord& p) {
  int va = 0, vb = 0;
  json votes = json::array();
  for (const auto& v : p.votes) {
    (v.chosen == Side::kA ? va : vb)++;
    votes.push_back({{"voter_id", v.voter_id}, {"chosen", side_name(v.chosen)}});
  }
  json j = {{"pair_id", p.id}, {"votes", votes}, {"votes_a", va}, {"votes_b", vb},
            {"closed", p.closed()}};
  j["strong_preference"] = p.strong ? json(side_name(*p.strong)) : json(nullptr);
  return j;
}

}  // namespace

Image render_overlay(const Image& image, const Mask& artifacts, const std::optional<Rect>& bbox) {
  require_same_shape(image, artifacts, "overlay");
  Image out = image;
  const Mask edge = inner_boundary(artifacts);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (edge(x, y)) out.set_pixel(x, y, kPink);
  if (bbox) {
    const Rect& r = *bbox;
    for (int x = std::max(r.x0, 0); x <= std::min(r.x1, out.width() - 1); ++x) {
      if (r.y0 >= 0 && r.y0 < out.height()) out.set_pixel(x, r.y0, kBlue);
      if (r.y1 >= 0 && r.y1 < out.height()) out.set_pixel(x, r.y1, kBlue);
    }
    for (int y = std::max(r.y0, 0); y <= std::min(r.y1, out.height() - 1); ++y) {
      if (r.x0 >= 0 && r.x0 < out.width()) out.set_pixel(r.x0, y, kBlue);
      if (r.x1 >= 0 && r.x1 < out.width()) out.set_pixel(r.x1, y, kBlue);
    }
  }
  return out;
}

struct Service::State {
  ServiceConfig cfg;
  mutable std::mutex mu;  // guards everything below except sample files
  std::map<std::string, std::shared_ptr<std::shared_mutex>> sample_locks;
  std::map<std::string, Lease> leases;  // "<queue>/<sample id>"
  std::map<std::string, PairRecord> pairs;
  std::vector<Serving> servings;
  std::map<std::string, json> segment_cache;
  std::mt19937_64 order_rng;

  fs::path pairs_root() const { return cfg.store_root / "_pairs"; }
  fs::path trace_dir(const std::string& id) const { return cfg.store_root / id / "trace"; }

  std::shared_ptr<std::shared_mutex> lock_for(const std::string& id) {
    std::lock_guard g(mu);
    auto& l = sample_locks[id];
    if (!l) l = std::make_shared<std::shared_mutex>();
    return l;
  }

  void check_id(const std::string& id) const {
    require(!id.empty() && id.find('/') == std::string::npos && id.find("..") == std::string::npos &&
                id[0] != '_',
            ErrorCode::kInvalidArgument, "bad sample id: " + id);
    require(fs::exists(cfg.store_root / id / "meta.json"), ErrorCode::kNotFound,
            "unknown sample: " + id);
  }

  const ArtifactDetector& model(const std::string& id) const {
    auto it = cfg.models.find(id);
    require(it != cfg.models.end(), ErrorCode::kNotFound, "unknown model: " + id);
    return *it->second;
  }

  void save_pair(const PairRecord& p) const {
    const fs::path dir = pairs_root() / p.id;
    fs::create_directories(dir);
    write_text(dir / "record.json", pair_json(p).dump(2) + "\n");
  }

  void load_pairs() {
    if (!fs::is_directory(pairs_root())) return;
    for (const auto& entry : fs::directory_iterator(pairs_root())) {
      const fs::path dir = entry.path();
      if (!fs::exists(dir / "a.png")) continue;
      PairRecord p{dir.filename().string(), read_image(dir / "a.png"), read_image(dir / "b.png"), {}, {}};
      if (fs::exists(dir / "record.json")) {
        const json j = json::parse(read_text(dir / "record.json"));
        for (const auto& v : j.at("votes"))
          p.votes.push_back({v.at("voter_id").get<std::string>(), parse_side(v.at("chosen").get<std::string>())});
        if (!j.at("strong_preference").is_null())
          p.strong = parse_side(j.at("strong_preference").get<std::string>());
      }
      pairs.emplace(p.id, std::move(p));
    }
  }

  json record_vote(PairRecord& p, Side chosen, const std::string& voter) {
    require(chosen != Side::kNone, ErrorCode::kInvalidArgument, "vote must be A or B");
    require(!voter.empty(), ErrorCode::kInvalidArgument, "missing voter_id");
    require(!p.closed(), ErrorCode::kConflict, "pair " + p.id + " is closed");
    for (const auto& v : p.votes)
      require(v.voter_id != voter, ErrorCode::kConflict, voter + " already voted on " + p.id);
    p.votes.push_back({voter, chosen});
    if (p.closed()) {
      int va = 0;
      for (const auto& v : p.votes) va += v.chosen == Side::kA;
      p.strong = strong_preference(va, static_cast<int>(p.votes.size()) - va);
    }
    for (auto& s : servings)
      if (s.pair_id == p.id && s.voter_id == voter) s.used = true;
    save_pair(p);
    return pair_json(p);
  }
};

Service::Service(ServiceConfig config) : state_(std::make_unique<State>()) {
  state_->cfg = std::move(config);
  require(!state_->cfg.store_root.empty(), ErrorCode::kInvalidArgument, "store_root is required");
  fs::create_directories(state_->cfg.store_root);
  state_->order_rng.seed(mix_seed(state_->cfg.seed, 0xA11CE));
  state_->load_pairs();
}

Service::~Service() = default;

std::optional<json> Service::next_task(const std::string& queue, const std::string& annotator_id) {
  require(!annotator_id.empty(), ErrorCode::kInvalidArgument, "missing annotator_id");
  State& st = *state_;
  const TimePoint now = st.cfg.clock();
  const auto expiry = now + st.cfg.lease;

  if (queue == "vote") {
    std::lock_guard g(st.mu);
    for (auto& s : st.servings)
      if (s.voter_id == annotator_id && !s.used && s.expires > now) {
        const PairRecord& p = st.pairs.at(s.pair_id);
        if (p.closed()) continue;
        return json{{"queue", "vote"}, {"serving_id", s.id}, {"pair_id", p.id},
                    {"left", png64(s.a_left ? p.a : p.b)}, {"right", png64(s.a_left ? p.b : p.a)},
                    {"lease_expires_ms", epoch_ms(s.expires)}};
      }
    for (auto& [id, p] : st.pairs) {
      if (p.closed()) continue;
      bool voted = false;
      for (const auto& v : p.votes) voted |= v.voter_id == annotator_id;
      if (voted) continue;
      std::size_t outstanding = 0;
      for (const auto& s : st.servings)
        outstanding += s.pair_id == id && !s.used && s.expires > now && s.voter_id != annotator_id;
      if (p.votes.size() + outstanding >= 5) continue;
      Serving s{"s" + std::to_string(st.servings.size() + 1), id, annotator_id,
                (st.order_rng() >> 63) == 0, expiry, false};
      st.servings.push_back(s);
      return json{{"queue", "vote"}, {"serving_id", s.id}, {"pair_id", id},
                  {"left", png64(s.a_left ? p.a : p.b)}, {"right", png64(s.a_left ? p.b : p.a)},
                  {"lease_expires_ms", epoch_ms(s.expires)}};
    }
    return std::nullopt;
  }

  require(queue == "label" || queue == "review", ErrorCode::kNotFound, "unknown queue: " + queue);
  std::vector<std::string> candidates;
  for (const auto& id : list_sample_ids(st.cfg.store_root)) {
    if (id.empty() || id[0] == '_') continue;
    auto lk = st.lock_for(id);
    std::shared_lock r(*lk);
    const Sample s = load_sample(st.cfg.store_root, id);
    if (!s.fill) continue;
    const bool eligible =
        queue == "label"
            ? !s.label.has_value()
            : s.label && s.review_status != ReviewStatus::kExpertApproved &&
                  std::find(s.reviewers.begin(), s.reviewers.end(), annotator_id) == s.reviewers.end();
    if (eligible) candidates.push_back(id);
  }

  std::string chosen;
  {
    std::lock_guard g(st.mu);
    for (const auto& id : candidates) {
      auto it = st.leases.find(queue + "/" + id);
      if (it != st.leases.end() && it->second.holder == annotator_id && it->second.expires > now) {
        chosen = id;
        break;
      }
    }
    if (chosen.empty()) {
      for (const auto& id : candidates) {
        auto it = st.leases.find(queue + "/" + id);
        if (it == st.leases.end() || it->second.expires <= now) {
          chosen = id;
          st.leases[queue + "/" + id] = {annotator_id, expiry};
          break;
        }
      }
    }
  }
  if (chosen.empty()) return std::nullopt;

  auto lk = st.lock_for(chosen);
  std::shared_lock r(*lk);
  const Sample s = load_sample(st.cfg.store_root, chosen);
  const Rect bbox = display_bbox(s.hole, st.cfg.bbox_margin);
  TimePoint expires;
  {
    std::lock_guard g(st.mu);
    expires = st.leases.at(queue + "/" + chosen).expires;
  }
  json task = {{"queue", queue}, {"task_id", chosen}, {"sample_id", chosen},
               {"width", s.fill->width()}, {"height", s.fill->height()},
               {"fill", png64(*s.fill)}, {"reference", png64(*s.fill)},
               {"bbox", rect_json(bbox)}, {"lease_expires_ms", epoch_ms(expires)}};
  if (queue == "review") {
    task["label"] = png64(*s.label);
    task["review_status"] = review_status_name(s.review_status);
  }
  return task;
}

namespace {

// Throws kConflict unless `who` may write under the lease on `key`.
void take_lease(std::map<std::string, Lease>& leases, const std::string& key, const std::string& who,
                TimePoint now) {
  auto it = leases.find(key);
  if (it == leases.end()) return;
  if (it->second.holder == who) {
    require(it->second.expires > now, ErrorCode::kConflict, "lease expired for " + key);
  } else {
    require(it->second.expires <= now, ErrorCode::kConflict,
            key + " is leased to another annotator");
  }
  leases.erase(it);
}

}  // namespace

json Service::submit_label(const std::string& sample_id, const Mask& raw_label,
                           const std::string& annotator_id) {
  State& st = *state_;
  require(!annotator_id.empty(), ErrorCode::kInvalidArgument, "missing annotator_id");
  st.check_id(sample_id);
  auto lk = st.lock_for(sample_id);
  std::unique_lock w(*lk);
  Sample s = load_sample(st.cfg.store_root, sample_id);
  require_same_shape(raw_label, s.hole, "raw label vs hole");
  {
    std::lock_guard g(st.mu);
    take_lease(st.leases, "label/" + sample_id, annotator_id, st.cfg.clock());
  }
  if (s.label) s.revisions.push_back(*s.label);
  s.label = canonicalize_label(raw_label, s.hole);
  // Re-validated here as well as by construction.
  require(is_subset(*s.label, s.hole), ErrorCode::kValidation, "stored label escapes hole");
  s.review_status = ReviewStatus::kUnreviewed;
  s.reviewers.clear();
  s.provenance["labeled_by"] = annotator_id;
  persist_sample(s, st.cfg.store_root);
  return {{"sample_id", sample_id},
          {"label_area", area(*s.label)},
          {"is_perfect_fill", s.is_perfect_fill()},
          {"revisions", s.revisions.size()},
          {"review_status", review_status_name(s.review_status)}};
}

json Service::submit_review(const std::string& sample_id, const std::string& reviewer_id, bool approve) {
  State& st = *state_;
  require(!reviewer_id.empty(), ErrorCode::kInvalidArgument, "missing reviewer_id");
  st.check_id(sample_id);
  auto lk = st.lock_for(sample_id);
  std::unique_lock w(*lk);
  Sample s = load_sample(st.cfg.store_root, sample_id);
  require(s.label.has_value(), ErrorCode::kPrecondition, "sample " + sample_id + " has no label");
  require(s.review_status != ReviewStatus::kExpertApproved, ErrorCode::kConflict,
          "sample " + sample_id + " is already expert approved");
  require(std::find(s.reviewers.begin(), s.reviewers.end(), reviewer_id) == s.reviewers.end(),
          ErrorCode::kConflict, reviewer_id + " already reviewed " + sample_id);
  {
    std::lock_guard g(st.mu);
    take_lease(st.leases, "review/" + sample_id, reviewer_id, st.cfg.clock());
  }
  if (approve) {
    s.reviewers.push_back(reviewer_id);
    s.review_status = s.review_status == ReviewStatus::kUnreviewed ? ReviewStatus::kCrossChecked
                                                                   : ReviewStatus::kExpertApproved;
  } else {
    s.review_status = ReviewStatus::kUnreviewed;
    s.reviewers.clear();
  }
  persist_sample(s, st.cfg.store_root);
  return {{"sample_id", sample_id},
          {"review_status", review_status_name(s.review_status)},
          {"reviewers", s.reviewers}};
}

json Service::segment(const std::string& sample_id, const std::string& model_id) {
  State& st = *state_;
  st.check_id(sample_id);
  const ArtifactDetector& model = st.model(model_id);
  auto lk = st.lock_for(sample_id);
  std::shared_lock r(*lk);
  const Sample s = load_sample(st.cfg.store_root, sample_id);
  require(s.fill.has_value(), ErrorCode::kPrecondition, "sample " + sample_id + " has no fill");
  const std::string key = sample_id + "\n" + model_id + "\n" + hex(content_hash(*s.fill));
  {
    std::lock_guard g(st.mu);
    auto it = st.segment_cache.find(key);
    if (it != st.segment_cache.end()) return it->second;
  }
  const Mask pred = model.predict(*s.fill, &s.hole);
  require(is_subset(pred, s.hole), ErrorCode::kBackend, "model prediction escapes the hole");
  json out = {{"sample_id", sample_id},
              {"model_id", model_id},
              {"fill_hash", hex(content_hash(*s.fill))},
              {"mask", png64(pred)},
              {"overlay", png64(render_overlay(*s.fill, pred))},
              {"artifact_area", area(pred)},
              {"par", par(pred, s.hole)}};
  std::lock_guard g(st.mu);
  return st.segment_cache.emplace(key, std::move(out)).first->second;
}

json Service::refill(const std::string& sample_id, const std::optional<Mask>& mask_override,
                     const std::string& backend_id, const std::optional<std::string>& model_id) {
  State& st = *state_;
  st.check_id(sample_id);
  auto bit = st.cfg.backends.find(backend_id);
  require(bit != st.cfg.backends.end(), ErrorCode::kNotFound, "unknown backend: " + backend_id);
  const std::string scorer_id = model_id ? *model_id : st.cfg.default_model;
  const ArtifactDetector* scorer = scorer_id.empty() ? nullptr : &st.model(scorer_id);
  require(mask_override || scorer, ErrorCode::kInvalidArgument,
          "refill needs a mask override or a model");

  auto lk = st.lock_for(sample_id);
  std::unique_lock w(*lk);
  Sample s = load_sample(st.cfg.store_root, sample_id);
  require(s.fill.has_value(), ErrorCode::kPrecondition, "sample " + sample_id + " has no fill");
  require(!s.hole.is_empty(), ErrorCode::kPrecondition, "sample " + sample_id + " has an empty hole");
  const Image& fill = *s.fill;

  Mask region = mask_override ? (require_same_shape(*mask_override, s.hole, "mask override"),
                                 intersect(*mask_override, s.hole))
                              : scorer->predict(fill, &s.hole);
  auto score = [&](const Image& img) -> json {
    return scorer ? json(par(scorer->predict(img, &s.hole), s.hole)) : json(nullptr);
  };
  if (region.is_empty()) {
    return {{"sample_id", sample_id}, {"noop", true}, {"fill_hash", hex(content_hash(fill))},
            {"par", score(fill)}};
  }

  const auto inp = make_inpainter(bit->second, s.image);
  Image next = inp->fill(fill, region);
  require(equal_outside(next, fill, s.hole), ErrorCode::kBackend,
          "refill modified pixels outside the hole");

  IterFillTrace trace{s.hole, {}, Termination::kMaxIters, std::nullopt, std::nullopt};
  const fs::path tdir = st.trace_dir(sample_id);
  if (fs::exists(tdir / "trace.json")) trace = load_trace(tdir);
  trace.steps.push_back({next, region, par(region, s.hole)});
  std::optional<double> post;
  if (scorer) {
    Mask detected = scorer->predict(next, &s.hole);
    post = par(detected, s.hole);
    trace.terminated_by = detected.is_empty() ? Termination::kEmptyArtifacts : Termination::kMaxIters;
    trace.final_artifact_mask = std::move(detected);
  } else {
    trace.final_artifact_mask.reset();
  }
  trace.final_par = post;
  persist_trace(trace, tdir);

  // The old label described the old fill.
  if (s.label) s.revisions.push_back(*s.label);
  s.label.reset();
  s.review_status = ReviewStatus::kUnreviewed;
  s.reviewers.clear();
  s.fill = next;
  persist_sample(s, st.cfg.store_root);

  json out = {{"sample_id", sample_id},
              {"noop", false},
              {"step", trace.steps.size()},
              {"refill_area", area(region)},
              {"fill_hash", hex(content_hash(next))},
              {"fill", png64(next)}};
  out["par"] = post ? json(*post) : json(nullptr);
  return out;
}

json Service::vote(const std::string& pair_id, Side chosen, const std::string& voter_id) {
  State& st = *state_;
  std::lock_guard g(st.mu);
  auto it = st.pairs.find(pair_id);
  require(it != st.pairs.end(), ErrorCode::kNotFound, "unknown pair: " + pair_id);
  return st.record_vote(it->second, chosen, voter_id);
}

json Service::vote_serving(const std::string& serving_id, bool left) {
  State& st = *state_;
  std::lock_guard g(st.mu);
  auto sit = std::find_if(st.servings.begin(), st.servings.end(),
                          [&](const Serving& s) { return s.id == serving_id; });
  require(sit != st.servings.end(), ErrorCode::kNotFound, "unknown serving: " + serving_id);
  require(!sit->used, ErrorCode::kConflict, "serving " + serving_id + " already used");
  const Side chosen = left == sit->a_left ? Side::kA : Side::kB;
  return st.record_vote(st.pairs.at(sit->pair_id), chosen, sit->voter_id);
}

json Service::sample(const std::string& sample_id, bool include_hole) const {
  State& st = *state_;
  st.check_id(sample_id);
  auto lk = st.lock_for(sample_id);
  std::shared_lock r(*lk);
  const Sample s = load_sample(st.cfg.store_root, sample_id);
  json j = {{"id", s.id},
            {"width", s.image.width()},
            {"height", s.image.height()},
            {"image", png64(s.image)},
            {"review_status", review_status_name(s.review_status)},
            {"reviewers", s.reviewers},
            {"revisions", s.revisions.size()},
            {"is_perfect_fill", s.is_perfect_fill()},
            {"provenance", s.provenance},
            {"bbox", rect_json(display_bbox(s.hole, st.cfg.bbox_margin))}};
  j["fill"] = s.fill ? json(png64(*s.fill)) : json(nullptr);
  j["label"] = s.label ? json(png64(*s.label)) : json(nullptr);
  j["scene_class"] = s.scene_class ? json(*s.scene_class) : json(nullptr);
  if (include_hole) j["hole"] = png64(s.hole);
  return j;
}

json Service::trace(const std::string& sample_id) const {
  State& st = *state_;
  st.check_id(sample_id);
  auto lk = st.lock_for(sample_id);
  std::shared_lock r(*lk);
  const fs::path tdir = st.trace_dir(sample_id);
  require(fs::exists(tdir / "trace.json"), ErrorCode::kNotFound, "no trace for " + sample_id);
  const IterFillTrace t = load_trace(tdir);
  json steps = json::array(), pars = json::array();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    steps.push_back({{"step", i + 1},
                     {"par", t.steps[i].par},
                     {"fill", png64(t.steps[i].fill)},
                     {"artifact_mask", png64(t.steps[i].artifact_mask)}});
    pars.push_back(t.steps[i].par);
  }
  json j = {{"sample_id", sample_id}, {"steps", steps}, {"pars", pars},
            {"terminated_by", termination_name(t.terminated_by)}};
  j["final_par"] = t.final_par ? json(*t.final_par) : json(nullptr);
  return j;
}

json Service::pair(const std::string& pair_id) const {
  std::lock_guard g(state_->mu);
  auto it = state_->pairs.find(pair_id);
  require(it != state_->pairs.end(), ErrorCode::kNotFound, "unknown pair: " + pair_id);
  return pair_json(it->second);
}

void Service::add_pair(const std::string& pair_id, const Image& a, const Image& b) {
  require(!pair_id.empty() && pair_id.find('/') == std::string::npos && pair_id.find("..") == std::string::npos,
          ErrorCode::kInvalidArgument, "bad pair id: " + pair_id);
  State& st = *state_;
  std::lock_guard g(st.mu);
  require(!st.pairs.count(pair_id), ErrorCode::kConflict, "pair exists: " + pair_id);
  const fs::path dir = st.pairs_root() / pair_id;
  fs::create_directories(dir);
  write_image(dir / "a.png", a);
  write_image(dir / "b.png", b);
  PairRecord p{pair_id, a, b, {}, {}};
  st.save_pair(p);
  st.pairs.emplace(pair_id, std::move(p));
}

std::vector<json> Service::servings() const {
  std::lock_guard g(state_->mu);
  std::vector<json> out;
  for (const auto& s : state_->servings)
    out.push_back({{"serving_id", s.id}, {"pair_id", s.pair_id}, {"voter_id", s.voter_id},
                   {"left", s.a_left ? "A" : "B"}, {"used", s.used}});
  return out;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kPrecondition: return 412;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kValidation:
    case ErrorCode::kPlacement: return 400;
    case ErrorCode::kBackend: return 502;
    case ErrorCode::kTimeout: return 504;
    default: return 500;
  }
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
  reply(res, status, {{"error", {{"code", code}, {"message", msg}}}});
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply_error(res, http_status_for(e.code()), std::string(error_code_name(e.code())), e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, "invalid_argument", std::string("bad request body: ") + e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  require(!req.body.empty(), ErrorCode::kInvalidArgument, "empty request body");
  return json::parse(req.body);
}

Mask mask_field(const json& j, const char* key) {
  const Bytes bytes = base64_decode(j.at(key).get<std::string>());
  return decode_mask(bytes);
}

}  // namespace

void mount(httplib::Server& server, Service& svc) {
  server.Get(R"(/v1/tasks/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    auto task = svc.next_task(req.matches[1], req.get_param_value("annotator_id"));
    if (!task) {
      res.status = 204;
      return;
    }
    reply(res, 200, *task);
  }));
  server.Post("/v1/labels", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json j = body_of(req);
    reply(res, 200, svc.submit_label(j.at("sample_id").get<std::string>(), mask_field(j, "raw_label"),
                                     j.at("annotator_id").get<std::string>()));
  }));
  server.Post("/v1/reviews", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json j = body_of(req);
    reply(res, 200, svc.submit_review(j.at("sample_id").get<std::string>(),
                                      j.at("reviewer_id").get<std::string>(), j.value("approve", true)));
  }));
  server.Post("/v1/segment", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json j = body_of(req);
    reply(res, 200, svc.segment(j.at("sample_id").get<std::string>(), j.at("model_id").get<std::string>()));
  }));
  server.Post("/v1/refill", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json j = body_of(req);
    std::optional<Mask> override;
    if (j.contains("mask_override") && !j["mask_override"].is_null()) override = mask_field(j, "mask_override");
    std::optional<std::string> model;
    if (j.contains("model_id") && !j["model_id"].is_null()) model = j["model_id"].get<std::string>();
    reply(res, 200, svc.refill(j.at("sample_id").get<std::string>(), override,
                               j.at("backend_id").get<std::string>(), model));
  }));
  server.Post("/v1/votes", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json j = body_of(req);
    if (j.contains("serving_id")) {
      const std::string choice = j.at("choice").get<std::string>();
      require(choice == "left" || choice == "right", ErrorCode::kInvalidArgument,
              "choice must be left or right");
      reply(res, 200, svc.vote_serving(j["serving_id"].get<std::string>(), choice == "left"));
      return;
    }
    reply(res, 200, svc.vote(j.at("pair_id").get<std::string>(), parse_side(j.at("chosen").get<std::string>()),
                             j.at("voter_id").get<std::string>()));
  }));
  server.Get(R"(/v1/samples/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, svc.sample(req.matches[1], req.get_param_value("include_hole") == "1"));
  }));
  server.Get(R"(/v1/traces/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, svc.trace(req.matches[1]));
  }));
  server.Get(R"(/v1/pairs/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, svc.pair(req.matches[1]));
  }));
}

}  // namespace parkit::service
