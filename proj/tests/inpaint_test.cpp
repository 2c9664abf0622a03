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

#include "parkit/inpaint.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "parkit/error.hpp"
#include "test_support.hpp"

#ifndef PARKIT_FAKE_BACKEND
#error "PARKIT_FAKE_BACKEND must point at the fake backend executable"
#endif

namespace parkit {
namespace {

using testing::random_blocks;
using testing::random_image;
using testing::random_mask;
using testing::solid_block;

ErrorCode code_of(const std::function<void()>& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

ExternalCommandConfig fake(const std::string& mode) {
  ExternalCommandConfig c;
  c.command = {PARKIT_FAKE_BACKEND, mode};
  return c;
}

TEST(InpaintTest, EmptyHoleIsIdentityForEveryBackend) {
  std::mt19937_64 rng(1);
  const Image img = random_image(rng, 12, 9);
  const Mask none(12, 9);
  EXPECT_EQ(ToyDiffusionInpainter().fill(img, none), img);
  EXPECT_EQ(OracleInpainter(0.0, 3, img).fill(img, none), img);
  // Must not even spawn the backend.
  EXPECT_EQ(ExternalCommandInpainter(fake("fail")).fill(img, none), img);
}

TEST(InpaintTest, CompositingContractOnRandomInputs) {
  std::mt19937_64 rng(2);
  ExternalCommandInpainter ext(fake("ok"));
  for (int t = 0; t < 20; ++t) {
    const Image img = random_image(rng, 20, 16);
    Mask hole = random_blocks(rng, 20, 16, 2);
    if (area(hole) == hole.pixel_count()) hole.set(0, 0, false);
    const Image truth = random_image(rng, 20, 16);
    for (const Image& out : {ToyDiffusionInpainter(50).fill(img, hole),
                             OracleInpainter(0.5, t, truth).fill(img, hole),
                             t < 5 ? ext.fill(img, hole) : img}) {
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 20; ++x)
          if (!hole(x, y)) {
            ASSERT_EQ(out.pixel(x, y), img.pixel(x, y));
          }
    }
  }
}

TEST(InpaintTest, ShapeMismatchIsRejected) {
  EXPECT_EQ(code_of([] { ToyDiffusionInpainter().fill(Image(4, 4), Mask(4, 5)); }),
            ErrorCode::kShapeMismatch);
}

TEST(DiffusionTest, ConstantImageStaysConstant) {
  const Image img(16, 16, {77, 140, 3});
  const Mask hole = solid_block(16, 16, 3, 2, 12, 14);
  EXPECT_EQ(toy_diffusion_fill(img, hole), img);
}

TEST(DiffusionTest, UniformGrayBoundaryGivesGray) {
  Image img(16, 16, {128, 128, 128});
  const Mask hole = solid_block(16, 16, 4, 4, 11, 11);
  for (int y = 4; y <= 11; ++y)
    for (int x = 4; x <= 11; ++x) img.set_pixel(x, y, {0, 255, 9});
  const Image out = toy_diffusion_fill(img, hole);
  for (int y = 4; y <= 11; ++y)
    for (int x = 4; x <= 11; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.channel(x, y, c), 128, 1);
}

TEST(DiffusionTest, ZeroItersGivesBoundaryMean) {
  Image img(5, 3, {0, 0, 0});
  for (int x = 0; x < 5; ++x) img.set_pixel(x, 0, {90, 30, 60});
  const Mask hole = solid_block(5, 3, 2, 1, 2, 1);
  // Ring: (2,0) (1,1) (3,1) (2,2) -> mean of {90,0,0,0} etc.
  const Image out = toy_diffusion_fill(img, hole, 0);
  const Rgb expect{static_cast<std::uint8_t>(std::lround(90 / 4.0)), static_cast<std::uint8_t>(std::lround(30 / 4.0)),
                   static_cast<std::uint8_t>(std::lround(60 / 4.0))};
  EXPECT_EQ(out.pixel(2, 1), expect);
}

TEST(DiffusionTest, FullFrameHoleIsRejected) {
  EXPECT_EQ(code_of([] { toy_diffusion_fill(Image(4, 4), Mask::full(4, 4)); }),
            ErrorCode::kPrecondition);
}

// Solves the discrete Laplace system for the hole pixels directly.
TEST(DiffusionTest, MatchesDirectLaplaceSolveOnHalfPlanes) {
  constexpr int n = 8;
  Image img(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const std::uint8_t v = x < n / 2 ? 0 : 255;
      img.set_pixel(x, y, {v, v, v});
    }
  const Mask hole = solid_block(n, n, 1, 1, 6, 6);
  std::vector<int> idx(n * n, -1);
  int m = 0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (hole(x, y)) idx[y * n + x] = m++;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const int i = idx[y * n + x];
      if (i < 0) continue;
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= n || q[1] >= n) continue;
        a(i, i) += 1;
        const int j = idx[q[1] * n + q[0]];
        if (j >= 0)
          a(i, j) -= 1;
        else
          b(i) += img.channel(q[0], q[1], 0);
      }
    }
  const Eigen::VectorXd sol = a.partialPivLu().solve(b);
  const Image out = toy_diffusion_fill(img, hole, 2000);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const int i = idx[y * n + x];
      if (i < 0) continue;
      EXPECT_NEAR(out.channel(x, y, 0), sol(i), 1.0) << x << "," << y;
      if (x > 1 && hole(x - 1, y)) {
        EXPECT_GE(out.channel(x, y, 0), out.channel(x - 1, y, 0));
      }
    }
  EXPECT_LT(out.channel(1, 3, 0), out.channel(6, 3, 0));
}

TEST(DiffusionTest, MaximumPrincipleOnRandomInputs) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 25; ++t) {
    const Image img = random_image(rng, 14, 11);
    Mask hole = random_mask(rng, 14, 11, 0.5);
    hole.set(0, 0, false);
    const Image out = toy_diffusion_fill(img, hole, 1 + t * 20);
    int lo[3] = {255, 255, 255}, hi[3] = {0, 0, 0};
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 14; ++x) {
        if (hole(x, y)) continue;
        const bool ring = (x > 0 && hole(x - 1, y)) || (x < 13 && hole(x + 1, y)) ||
                          (y > 0 && hole(x, y - 1)) || (y < 10 && hole(x, y + 1));
        if (!ring) continue;
        for (int c = 0; c < 3; ++c) {
          lo[c] = std::min<int>(lo[c], img.channel(x, y, c));
          hi[c] = std::max<int>(hi[c], img.channel(x, y, c));
        }
      }
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 14; ++x)
        if (hole(x, y))
          for (int c = 0; c < 3; ++c) {
            EXPECT_GE(out.channel(x, y, c), lo[c]);
            EXPECT_LE(out.channel(x, y, c), hi[c]);
          }
  }
}

TEST(OracleFillTest, FullRestoreEqualsTruth) {
  std::mt19937_64 rng(6);
  const Image img = random_image(rng, 10, 10), truth = random_image(rng, 10, 10);
  const Mask hole = random_mask(rng, 10, 10, 0.4);
  EXPECT_EQ(oracle_fill(img, hole, truth, 1.0, 3), composite(truth, img, hole));
}

TEST(OracleFillTest, ZeroRestorePaintsKeyColor) {
  std::mt19937_64 rng(7);
  const Image img = random_image(rng, 10, 10);
  const Mask hole = random_mask(rng, 10, 10, 0.4);
  EXPECT_EQ(oracle_fill(img, hole, img, 0.0, 3), composite(Image(10, 10, kMagenta), img, hole));
}

TEST(OracleFillTest, HalfRestoreIsBinomial) {
  const Image img(100, 100, {1, 2, 3});
  const Mask hole = Mask::full(100, 100);
  const Image out = oracle_fill(img, hole, img, 0.5, 11);
  int restored = 0;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) restored += out.pixel(x, y) == img.pixel(x, y);
  // 3 sigma of Binomial(10000, 0.5) is 150.
  EXPECT_NEAR(restored, 5000, 150);
}

TEST(OracleFillTest, DeterministicPerSeed) {
  std::mt19937_64 rng(8);
  const Image img = random_image(rng, 16, 16);
  const Mask hole = random_mask(rng, 16, 16, 0.5);
  EXPECT_EQ(oracle_fill(img, hole, img, 0.5, 4), oracle_fill(img, hole, img, 0.5, 4));
  EXPECT_NE(oracle_fill(img, hole, img, 0.5, 4), oracle_fill(img, hole, img, 0.5, 5));
  EXPECT_THROW(oracle_fill(img, hole, img, 1.5, 4), Error);
}

TEST(ExternalCommandTest, SuccessfulBackendIsComposited) {
  std::mt19937_64 rng(9);
  const Image img = random_image(rng, 8, 6);
  const Mask hole = solid_block(8, 6, 2, 2, 4, 3);
  const Image out = ExternalCommandInpainter(fake("ok")).fill(img, hole);
  EXPECT_TRUE(equal_outside(out, img, hole));
  EXPECT_EQ(out.pixel(3, 2), (Rgb{200, 100, 50}));
}

TEST(ExternalCommandTest, NonzeroExitCarriesStderr) {
  std::string what;
  EXPECT_EQ(code_of([&] { ExternalCommandInpainter(fake("fail")).fill(Image(4, 4), solid_block(4, 4, 1, 1, 1, 1)); }, &what),
            ErrorCode::kBackend);
  EXPECT_NE(what.find("CUDA out of memory"), std::string::npos) << what;
  EXPECT_NE(what.find("exit code 3"), std::string::npos) << what;
}

TEST(ExternalCommandTest, MalformedOutputIsBackendError) {
  const Mask hole = solid_block(4, 4, 1, 1, 1, 1);
  EXPECT_EQ(code_of([&] { ExternalCommandInpainter(fake("garbage")).fill(Image(4, 4), hole); }),
            ErrorCode::kBackend);
  EXPECT_EQ(code_of([&] { ExternalCommandInpainter(fake("badsize")).fill(Image(4, 4), hole); }),
            ErrorCode::kBackend);
}

TEST(ExternalCommandTest, MissingExecutableIsBackendError) {
  ExternalCommandConfig c;
  c.command = {"/nonexistent/parkit-backend"};
  std::string what;
  EXPECT_EQ(code_of([&] { ExternalCommandInpainter(c).fill(Image(4, 4), solid_block(4, 4, 1, 1, 1, 1)); }, &what),
            ErrorCode::kBackend);
  EXPECT_NE(what.find("exec failed"), std::string::npos) << what;
}

TEST(ExternalCommandTest, TimeoutKillsBackend) {
  ExternalCommandConfig c = fake("sleep");
  c.timeout = std::chrono::milliseconds(300);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { ExternalCommandInpainter(c).fill(Image(4, 4), solid_block(4, 4, 1, 1, 1, 1)); }),
            ErrorCode::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
}

TEST(ExternalCommandTest, ConcurrentFillsRespectPool) {
  ExternalCommandConfig c = fake("ok");
  c.max_concurrent = 2;
  ExternalCommandInpainter inp(c);
  std::mt19937_64 rng(10);
  const Image img = random_image(rng, 8, 8);
  const Mask hole = solid_block(8, 8, 1, 1, 5, 5);
  std::vector<std::thread> threads;
  std::vector<Image> outs(6, Image(1, 1));
  for (int i = 0; i < 6; ++i) threads.emplace_back([&, i] { outs[i] = inp.fill(img, hole); });
  for (auto& t : threads) t.join();
  for (const auto& o : outs) EXPECT_TRUE(equal_outside(o, img, hole));
}

TEST(MakeInpainterTest, KnownAndUnknownKinds) {
  InpainterSpec s;
  EXPECT_EQ(make_inpainter(s)->kind(), "toy_diffusion");
  s.kind = "oracle";
  EXPECT_THROW(make_inpainter(s), Error);
  EXPECT_EQ(make_inpainter(s, Image(2, 2))->kind(), "oracle");
  s.kind = "lama";
  EXPECT_THROW(make_inpainter(s), Error);
}

}  // namespace
}  // namespace parkit
