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

#include <gtest/gtest.h>

#include <httplib.h>

#include <chrono>
#include <memory>
#include <random>
#include <thread>

#include "parkit/detector.hpp"
#include "parkit/error.hpp"
#include "parkit/image_io.hpp"
#include "parkit/service.hpp"
#include "test_support.hpp"

namespace parkit {
namespace {

using service::json;
using service::Service;
using service::ServiceConfig;
using testing::TempDir;

constexpr int kW = 32, kH = 32;

struct FakeClock {
  std::chrono::system_clock::time_point now{std::chrono::hours(1000)};
  void advance(std::chrono::seconds s) { now += s; }
};

Mask decode64(const json& v) {
  const Bytes b = base64_decode(v.get<std::string>());
  return decode_mask(b);
}
Image decode64_image(const json& v) {
  const Bytes b = base64_decode(v.get<std::string>());
  return decode_image(b);
}

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() : dir_("service") {}

  // Samples s00..s{n-1}; fills paint the hole magenta unless `clean`.
  void seed_store(int n, bool with_fill = true) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < n; ++i) {
      char id[8];
      std::snprintf(id, sizeof id, "s%02d", i);
      Image img = testing::random_image(rng, kW, kH);
      Mask hole = testing::solid_block(kW, kH, 4 + i % 5, 6, 20 + i % 7, 22);
      Sample s(id, img, hole);
      if (with_fill) {
        Image fill = img;
        for (int y = 0; y < kH; ++y)
          for (int x = 0; x < kW; ++x)
            if (hole(x, y) && x < 14) fill.set_pixel(x, y, kMagenta);
        s.fill = fill;
      }
      persist_sample(s, dir_.path());
    }
  }

  std::unique_ptr<Service> make() {
    ServiceConfig cfg;
    cfg.store_root = dir_.path();
    cfg.seed = 5;
    cfg.clock = [this] { return clock_.now; };
    cfg.models["key"] = std::make_shared<ColorKeyDetector>();
    cfg.models["none"] = std::make_shared<FixedMaskDetector>(Mask(kW, kH));
    InpainterSpec full;
    full.kind = "oracle";
    full.p = 1.0;
    cfg.backends["oracle_full"] = full;
    InpainterSpec half = full;
    half.p = 0.5;
    cfg.backends["oracle_half"] = half;
    InpainterSpec diff;
    diff.kind = "toy_diffusion";
    diff.iters = 50;
    cfg.backends["diffusion"] = diff;
#ifdef PARKIT_FAKE_BACKEND
    InpainterSpec bad;
    bad.kind = "external_command";
    bad.external.command = {PARKIT_FAKE_BACKEND, "fail"};
    cfg.backends["failing"] = bad;
#endif
    cfg.default_model = "key";
    return std::make_unique<Service>(std::move(cfg));
  }

  Sample load(const std::string& id) { return load_sample(dir_.path(), id); }

  TempDir dir_;
  FakeClock clock_;
};

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST_F(ServiceTest, LabelTaskCarriesBboxButNeverTheHole) {
  seed_store(3);
  auto svc = make();
  const auto task = svc->next_task("label", "ann1");
  ASSERT_TRUE(task);
  const Sample s = load((*task)["sample_id"]);
  EXPECT_EQ(decode64_image((*task)["fill"]), *s.fill);
  EXPECT_EQ((*task)["reference"], (*task)["fill"]);
  const Rect want = display_bbox(s.hole, 16);
  EXPECT_EQ((*task)["bbox"]["x0"], want.x0);
  EXPECT_EQ((*task)["bbox"]["y1"], want.y1);
  EXPECT_FALSE(task->contains("hole"));
  const std::string hole64 = base64_encode(encode_mask_png(s.hole));
  EXPECT_EQ(task->dump().find(hole64), std::string::npos);
}

TEST_F(ServiceTest, LeasesAreStickyAndExclusive) {
  seed_store(2);
  auto svc = make();
  const auto a = svc->next_task("label", "ann1");
  const auto again = svc->next_task("label", "ann1");
  ASSERT_TRUE(a && again);
  EXPECT_EQ((*a)["task_id"], (*again)["task_id"]);
  const auto b = svc->next_task("label", "ann2");
  ASSERT_TRUE(b);
  EXPECT_NE((*a)["task_id"], (*b)["task_id"]);
  EXPECT_FALSE(svc->next_task("label", "ann3"));

  clock_.advance(std::chrono::minutes(31));
  const auto c = svc->next_task("label", "ann3");
  ASSERT_TRUE(c);
  const std::string id = (*c)["sample_id"];
  // The original holder lost the lease.
  const std::string holder = id == (*a)["sample_id"] ? "ann1" : "ann2";
  expect_code(ErrorCode::kConflict, [&] { svc->submit_label(id, Mask(kW, kH), holder); });
  EXPECT_NO_THROW(svc->submit_label(id, Mask(kW, kH), "ann3"));
}

TEST_F(ServiceTest, ExpiredLeaseIsConflictForItsHolder) {
  seed_store(1);
  auto svc = make();
  const auto t = svc->next_task("label", "ann1");
  ASSERT_TRUE(t);
  clock_.advance(std::chrono::minutes(30));
  expect_code(ErrorCode::kConflict, [&] { svc->submit_label("s00", Mask(kW, kH), "ann1"); });
}

TEST_F(ServiceTest, EmptyQueueReturnsNoTask) {
  seed_store(2, false);
  auto svc = make();
  EXPECT_FALSE(svc->next_task("label", "a"));
  EXPECT_FALSE(svc->next_task("review", "a"));
  EXPECT_FALSE(svc->next_task("vote", "a"));
  expect_code(ErrorCode::kNotFound, [&] { svc->next_task("nope", "a"); });
  expect_code(ErrorCode::kInvalidArgument, [&] { svc->next_task("label", ""); });
}

TEST_F(ServiceTest, BrushOutsideHoleStoresPerfectFill) {
  seed_store(1);
  auto svc = make();
  const Mask brush = testing::solid_block(kW, kH, 25, 25, 31, 31);
  const json r = svc->submit_label("s00", brush, "ann");
  EXPECT_TRUE(r["is_perfect_fill"]);
  EXPECT_TRUE(load("s00").is_perfect_fill());
}

TEST_F(ServiceTest, ResubmissionAppendsRevisionAndResetsStatus) {
  seed_store(1);
  auto svc = make();
  svc->submit_label("s00", testing::solid_block(kW, kH, 5, 7, 9, 9), "ann");
  svc->submit_review("s00", "rev1", true);
  ASSERT_EQ(load("s00").review_status, ReviewStatus::kCrossChecked);
  const json r = svc->submit_label("s00", testing::solid_block(kW, kH, 6, 8, 12, 12), "ann");
  EXPECT_EQ(r["revisions"], 1);
  const Sample s = load("s00");
  EXPECT_EQ(s.revisions.size(), 1u);
  EXPECT_EQ(s.revisions[0], testing::solid_block(kW, kH, 5, 7, 9, 9));
  EXPECT_EQ(s.review_status, ReviewStatus::kUnreviewed);
}

TEST_F(ServiceTest, StoredLabelIsBrushIntersectHole) {
  seed_store(1);
  auto svc = make();
  const Mask hole = load("s00").hole;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Mask brush = testing::random_blocks(rng, kW, kH, 3);
    const json r = svc->submit_label("s00", brush, "ann");
    const Mask stored = *load("s00").label;
    Mask want(kW, kH);
    for (int y = 0; y < kH; ++y)
      for (int x = 0; x < kW; ++x)
        if (brush(x, y) && hole(x, y)) want.set(x, y);
    ASSERT_EQ(stored, want);
    ASSERT_EQ(r["label_area"], testing::oracle_count(want));
  }
}

TEST_F(ServiceTest, LabelErrors) {
  seed_store(1);
  auto svc = make();
  expect_code(ErrorCode::kNotFound, [&] { svc->submit_label("zz", Mask(kW, kH), "a"); });
  expect_code(ErrorCode::kShapeMismatch, [&] { svc->submit_label("s00", Mask(8, 8), "a"); });
  expect_code(ErrorCode::kInvalidArgument, [&] { svc->submit_label("../x", Mask(kW, kH), "a"); });
}

TEST_F(ServiceTest, ReviewRoundsNeedDistinctReviewers) {
  seed_store(1);
  auto svc = make();
  expect_code(ErrorCode::kPrecondition, [&] { svc->submit_review("s00", "r1", true); });
  svc->submit_label("s00", Mask(kW, kH), "ann");
  const auto task = svc->next_task("review", "r1");
  ASSERT_TRUE(task);
  EXPECT_FALSE(task->contains("hole"));
  EXPECT_EQ(svc->submit_review("s00", "r1", true)["review_status"], "cross_checked");
  expect_code(ErrorCode::kConflict, [&] { svc->submit_review("s00", "r1", true); });
  EXPECT_FALSE(svc->next_task("review", "r1"));
  EXPECT_EQ(svc->submit_review("s00", "r2", true)["review_status"], "expert_approved");
  expect_code(ErrorCode::kConflict, [&] { svc->submit_review("s00", "r3", true); });
  EXPECT_FALSE(svc->next_task("review", "r3"));
  EXPECT_EQ(load("s00").reviewers, (std::vector<std::string>{"r1", "r2"}));
}

TEST_F(ServiceTest, RejectedReviewResetsStatus) {
  seed_store(1);
  auto svc = make();
  svc->submit_label("s00", Mask(kW, kH), "ann");
  svc->submit_review("s00", "r1", true);
  EXPECT_EQ(svc->submit_review("s00", "r2", false)["review_status"], "unreviewed");
  EXPECT_TRUE(load("s00").reviewers.empty());
}

TEST_F(ServiceTest, SegmentEmptyPredictionOverlayIsFill) {
  seed_store(1);
  auto svc = make();
  const json r = svc->segment("s00", "none");
  EXPECT_EQ(decode64_image(r["overlay"]), *load("s00").fill);
  EXPECT_TRUE(decode64(r["mask"]).is_empty());
}

TEST_F(ServiceTest, SegmentCachesByFill) {
  seed_store(1);
  auto svc = make();
  const std::string a = svc->segment("s00", "key").dump();
  const std::string b = svc->segment("s00", "key").dump();
  EXPECT_EQ(a, b);
  // A refill changes the fill hash and therefore the payload.
  svc->refill("s00", std::nullopt, "oracle_full", "key");
  const json c = svc->segment("s00", "key");
  EXPECT_NE(c.dump(), a);
  EXPECT_EQ(c["par"], 0.0);
}

TEST_F(ServiceTest, SegmentPredictionInsideHole) {
  seed_store(8);
  auto svc = make();
  for (int i = 0; i < 8; ++i) {
    const std::string id = "s0" + std::to_string(i);
    const json r = svc->segment(id, "key");
    const Sample s = load(id);
    const Mask m = decode64(r["mask"]);
    EXPECT_TRUE(is_subset(m, s.hole));
    EXPECT_FALSE(m.is_empty());
    const Image overlay = decode64_image(r["overlay"]);
    const Mask edge = inner_boundary(m);
    for (int y = 0; y < kH; ++y)
      for (int x = 0; x < kW; ++x)
        ASSERT_EQ(overlay.pixel(x, y), (edge(x, y) ? Rgb{255, 105, 180} : s.fill->pixel(x, y)));
  }
}

TEST_F(ServiceTest, SegmentErrors) {
  seed_store(1, false);
  auto svc = make();
  expect_code(ErrorCode::kPrecondition, [&] { svc->segment("s00", "key"); });
  expect_code(ErrorCode::kNotFound, [&] { svc->segment("s00", "missing"); });
  expect_code(ErrorCode::kNotFound, [&] { svc->segment("nope", "key"); });
  expect_code(ErrorCode::kPrecondition, [&] { svc->refill("s00", std::nullopt, "diffusion", "key"); });
}

TEST_F(ServiceTest, RefillOverrideOutsideHoleIsNoop) {
  seed_store(1);
  auto svc = make();
  const Image before = *load("s00").fill;
  const json r = svc->refill("s00", testing::solid_block(kW, kH, 26, 26, 30, 30), "oracle_full", std::nullopt);
  EXPECT_TRUE(r["noop"]);
  EXPECT_EQ(*load("s00").fill, before);
  expect_code(ErrorCode::kNotFound, [&] { svc->trace("s00"); });
}

TEST_F(ServiceTest, RefillWithFullOracleScoresZero) {
  seed_store(1);
  auto svc = make();
  const json r = svc->refill("s00", std::nullopt, "oracle_full", "key");
  EXPECT_FALSE(r["noop"]);
  EXPECT_EQ(r["par"], 0.0);
  const Sample s = load("s00");
  EXPECT_EQ(*s.fill, s.image);
}

TEST_F(ServiceTest, OverrideEqualToHoleIsFreshFill) {
  seed_store(1);
  auto svc = make();
  const Sample s = load("s00");
  const json r = svc->refill("s00", s.hole, "diffusion", std::nullopt);
  const Image want = toy_diffusion_fill(*s.fill, s.hole, 50);
  EXPECT_EQ(*load("s00").fill, want);
  EXPECT_EQ(decode64_image(r["fill"]), want);
}

TEST_F(ServiceTest, RefillNeverTouchesOutsideHole) {
  seed_store(4);
  auto svc = make();
  std::mt19937_64 rng(9);
  for (int i = 0; i < 4; ++i) {
    const std::string id = "s0" + std::to_string(i);
    const Sample orig = load(id);
    for (int round = 0; round < 3; ++round) {
      const std::optional<Mask> override =
          round == 1 ? std::optional<Mask>(testing::random_blocks(rng, kW, kH, 4)) : std::nullopt;
      svc->refill(id, override, round == 2 ? "diffusion" : "oracle_half", "key");
    }
    const json t = svc->trace(id);
    ASSERT_GE(t["steps"].size(), 1u);
    for (const auto& step : t["steps"]) {
      const Image f = decode64_image(step["fill"]);
      ASSERT_TRUE(equal_outside(f, *orig.fill, orig.hole));
      ASSERT_TRUE(is_subset(decode64(step["artifact_mask"]), orig.hole));
    }
    ASSERT_TRUE(equal_outside(*load(id).fill, *orig.fill, orig.hole));
  }
}

TEST_F(ServiceTest, SteeredOracleRefillsDoNotIncreasePar) {
  seed_store(3);
  auto svc = make();
  for (int i = 0; i < 3; ++i) {
    const std::string id = "s0" + std::to_string(i);
    double last = 1.0;
    for (int round = 0; round < 3; ++round) {
      const json r = svc->refill(id, std::nullopt, "oracle_half", "key");
      if (r["noop"]) break;
      const double p = r["par"];
      EXPECT_LE(p, last);
      last = p;
    }
    const json t = svc->trace(id);
    EXPECT_EQ(t["pars"].size(), t["steps"].size());
  }
}

TEST_F(ServiceTest, RefillClearsStaleLabel) {
  seed_store(1);
  auto svc = make();
  svc->submit_label("s00", testing::solid_block(kW, kH, 6, 8, 10, 10), "ann");
  svc->refill("s00", std::nullopt, "oracle_half", "key");
  const Sample s = load("s00");
  EXPECT_FALSE(s.label.has_value());
  EXPECT_EQ(s.revisions.size(), 1u);
}

#ifdef PARKIT_FAKE_BACKEND
TEST_F(ServiceTest, BackendFailureCarriesStderr) {
  seed_store(1);
  auto svc = make();
  try {
    svc->refill("s00", std::nullopt, "failing", "key");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackend);
    EXPECT_NE(std::string(e.what()).find("CUDA out of memory"), std::string::npos);
  }
}
#endif

TEST_F(ServiceTest, RefillArgumentErrors) {
  seed_store(1);
  auto svc = make();
  expect_code(ErrorCode::kNotFound, [&] { svc->refill("s00", std::nullopt, "gpu", "key"); });
  expect_code(ErrorCode::kNotFound, [&] { svc->refill("s00", std::nullopt, "diffusion", "nope"); });
  expect_code(ErrorCode::kShapeMismatch, [&] { svc->refill("s00", Mask(4, 4), "diffusion", "key"); });
}

Image flat(std::uint8_t v) { return Image(8, 8, {v, v, v}); }

TEST_F(ServiceTest, FifthVoteFreezesStrongPreference) {
  auto svc = make();
  svc->add_pair("p1", flat(10), flat(20));
  for (int i = 0; i < 4; ++i) svc->vote("p1", i < 3 ? Side::kA : Side::kB, "v" + std::to_string(i));
  EXPECT_TRUE(svc->pair("p1")["strong_preference"].is_null());
  const json r = svc->vote("p1", Side::kA, "v4");
  EXPECT_TRUE(r["closed"]);
  EXPECT_EQ(r["strong_preference"], "A");
  expect_code(ErrorCode::kConflict, [&] { svc->vote("p1", Side::kB, "v9"); });
  EXPECT_EQ(svc->pair("p1"), r);
}

TEST_F(ServiceTest, SplitVoteHasNoStrongPreference) {
  auto svc = make();
  svc->add_pair("p", flat(1), flat(2));
  const Side seq[] = {Side::kA, Side::kB, Side::kA, Side::kB, Side::kA};
  json r;
  for (int i = 0; i < 5; ++i) r = svc->vote("p", seq[i], "v" + std::to_string(i));
  EXPECT_EQ(r["strong_preference"], "none");
  EXPECT_EQ(r["votes_a"], 3);
}

TEST_F(ServiceTest, DuplicateVoteRejected) {
  auto svc = make();
  svc->add_pair("p", flat(1), flat(2));
  svc->vote("p", Side::kA, "v");
  expect_code(ErrorCode::kConflict, [&] { svc->vote("p", Side::kB, "v"); });
  EXPECT_EQ(svc->pair("p")["votes"].size(), 1u);
  expect_code(ErrorCode::kNotFound, [&] { svc->vote("q", Side::kA, "v"); });
  expect_code(ErrorCode::kInvalidArgument, [&] { svc->vote("p", Side::kNone, "w"); });
}

TEST_F(ServiceTest, VotesSurviveRestart) {
  {
    auto svc = make();
    svc->add_pair("p", flat(1), flat(2));
    for (int i = 0; i < 5; ++i) svc->vote("p", Side::kB, "v" + std::to_string(i));
  }
  auto svc = make();
  const json r = svc->pair("p");
  EXPECT_EQ(r["strong_preference"], "B");
  expect_code(ErrorCode::kConflict, [&] { svc->vote("p", Side::kA, "late"); });
}

TEST_F(ServiceTest, VoteServingsRandomizeOrderIndependently) {
  auto svc = make();
  for (int i = 0; i < 40; ++i) svc->add_pair("p" + std::to_string(100 + i), flat(10), flat(200));
  int a_left = 0;
  for (int v = 0; v < 200; ++v) {
    const std::string voter = "voter" + std::to_string(v);
    const auto task = svc->next_task("vote", voter);
    ASSERT_TRUE(task);
    const auto again = svc->next_task("vote", voter);
    ASSERT_EQ((*task)["serving_id"], (*again)["serving_id"]);
    const bool left_is_a = decode64_image((*task)["left"]) == flat(10);
    a_left += left_is_a;
    // Choosing the left image must be recorded as the side shown there.
    const json rec = svc->vote_serving((*task)["serving_id"], true);
    const auto& last = rec["votes"].back();
    EXPECT_EQ(last["voter_id"], voter);
    EXPECT_EQ(last["chosen"], left_is_a ? "A" : "B");
  }
  EXPECT_FALSE(svc->next_task("vote", "extra"));
  // Binomial(200, 0.5): mean 100, sigma ~7.07.
  EXPECT_NEAR(a_left, 100, 3 * 7.08);
  const auto servings = svc->servings();
  ASSERT_EQ(servings.size(), 200u);
  int recorded_a = 0;
  for (const auto& s : servings) recorded_a += s["left"] == "A";
  EXPECT_EQ(recorded_a, a_left);
}

TEST_F(ServiceTest, SampleOmitsHoleUnlessAsked) {
  seed_store(1);
  auto svc = make();
  EXPECT_FALSE(svc->sample("s00", false).contains("hole"));
  const json j = svc->sample("s00", true);
  EXPECT_EQ(decode64(j["hole"]), load("s00").hole);
}

TEST_F(ServiceTest, ConcurrentLabelAndSegment) {
  seed_store(4);
  auto svc = make();
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t)
    ts.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        const std::string id = "s0" + std::to_string((t + i) % 4);
        svc->submit_label(id, testing::solid_block(kW, kH, 5, 7, 8 + i, 12), "ann" + std::to_string(t));
        svc->segment(id, "key");
      }
    });
  for (auto& t : ts) t.join();
  for (int i = 0; i < 4; ++i) {
    const Sample s = load("s0" + std::to_string(i));
    EXPECT_TRUE(is_subset(*s.label, s.hole));
  }
}

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(service::http_status_for(ErrorCode::kNotFound), 404);
  EXPECT_EQ(service::http_status_for(ErrorCode::kConflict), 409);
  EXPECT_EQ(service::http_status_for(ErrorCode::kPrecondition), 412);
  EXPECT_EQ(service::http_status_for(ErrorCode::kValidation), 400);
  EXPECT_EQ(service::http_status_for(ErrorCode::kBackend), 502);
  EXPECT_EQ(service::http_status_for(ErrorCode::kTimeout), 504);
}

class HttpTest : public ServiceTest {
 protected:
  void start() {
    svc_ = make();
    service::mount(server_, *svc_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  std::unique_ptr<Service> svc_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, LabelRoundTrip) {
  seed_store(1);
  start();
  auto cli = client();
  auto task = cli.Get("/v1/tasks/label?annotator_id=ann");
  ASSERT_TRUE(task);
  ASSERT_EQ(task->status, 200);
  const json t = json::parse(task->body);
  EXPECT_FALSE(t.contains("hole"));
  const Mask brush = testing::solid_block(kW, kH, 0, 0, 12, 12);
  const json body = {{"sample_id", t["sample_id"]},
                     {"annotator_id", "ann"},
                     {"raw_label", base64_encode(encode_mask_png(brush))}};
  auto r = cli.Post("/v1/labels", body.dump(), "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const Sample s = load("s00");
  EXPECT_EQ(*s.label, intersect(brush, s.hole));

  auto empty = cli.Get("/v1/tasks/label?annotator_id=ann");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 204);

  auto plain = cli.Get("/v1/samples/s00");
  ASSERT_TRUE(plain);
  EXPECT_FALSE(json::parse(plain->body).contains("hole"));
  auto full = cli.Get("/v1/samples/s00?include_hole=1");
  ASSERT_TRUE(full);
  EXPECT_TRUE(json::parse(full->body).contains("hole"));
}

TEST_F(HttpTest, ErrorStatuses) {
  seed_store(1, false);
  start();
  auto cli = client();
  EXPECT_EQ(cli.Get("/v1/samples/nope")->status, 404);
  EXPECT_EQ(cli.Get("/v1/tasks/other?annotator_id=a")->status, 404);
  EXPECT_EQ(cli.Get("/v1/tasks/label")->status, 400);
  auto seg = cli.Post("/v1/segment", R"({"sample_id":"s00","model_id":"key"})", "application/json");
  EXPECT_EQ(seg->status, 412);
  EXPECT_EQ(json::parse(seg->body)["error"]["code"], std::string(error_code_name(ErrorCode::kPrecondition)));
  EXPECT_EQ(cli.Post("/v1/segment", "{not json", "application/json")->status, 400);
  EXPECT_EQ(cli.Post("/v1/labels", R"({"sample_id":"s00"})", "application/json")->status, 400);
  EXPECT_EQ(cli.Get("/v1/traces/s00")->status, 404);
}

TEST_F(HttpTest, VoteAndRefillEndpoints) {
  seed_store(1);
  start();
  svc_->add_pair("p", flat(3), flat(4));
  auto cli = client();
  auto task = cli.Get("/v1/tasks/vote?annotator_id=v0");
  ASSERT_EQ(task->status, 200);
  const json t = json::parse(task->body);
  auto v = cli.Post("/v1/votes", json{{"serving_id", t["serving_id"]}, {"choice", "right"}}.dump(),
                    "application/json");
  ASSERT_EQ(v->status, 200) << v->body;
  auto dup = cli.Post("/v1/votes", R"({"pair_id":"p","chosen":"A","voter_id":"v0"})", "application/json");
  EXPECT_EQ(dup->status, 409);

  auto r = cli.Post("/v1/refill", R"({"sample_id":"s00","backend_id":"oracle_full","model_id":"key"})",
                    "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(json::parse(r->body)["par"], 0.0);
  auto tr = cli.Get("/v1/traces/s00");
  ASSERT_EQ(tr->status, 200);
  EXPECT_EQ(json::parse(tr->body)["steps"].size(), 1u);
}

}  // namespace
}  // namespace parkit
