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

#include "parkit/evaluation.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "parkit/error.hpp"
#include "parkit/synth.hpp"
#include "test_support.hpp"

namespace parkit {
namespace {

using testing::random_mask;
using testing::solid_block;

Mask from_points(int w, int h, std::initializer_list<std::pair<int, int>> pts) {
  Mask m(w, h);
  for (auto [x, y] : pts) m.set(x, y);
  return m;
}

TEST(ParTest, Examples) {
  const Mask hole = solid_block(5, 5, 1, 1, 3, 3);
  EXPECT_DOUBLE_EQ(par(Mask(5, 5), hole), 0.0);
  EXPECT_DOUBLE_EQ(par(hole, hole), 1.0);
  EXPECT_DOUBLE_EQ(par(from_points(5, 5, {{1, 1}, {2, 2}, {3, 3}, {0, 0}}), hole), 3.0 / 9.0);
  EXPECT_THROW(par(hole, Mask(5, 5)), Error);
  EXPECT_THROW(par(Mask(4, 5), hole), Error);
}

TEST(ParTest, MatchesPixelCountOracleAndIsScaleFree) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const Mask a = random_mask(rng, 12, 9, 0.4);
    Mask h = random_mask(rng, 12, 9, 0.5);
    h.set(0, 0);
    int in = 0, total = 0;
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 12; ++x) {
        total += h(x, y);
        in += h(x, y) && a(x, y);
      }
    EXPECT_DOUBLE_EQ(par(a, h), static_cast<double>(in) / total);
    EXPECT_DOUBLE_EQ(par(resize_nearest(a, 24, 18), resize_nearest(h, 24, 18)), par(a, h));
  }
}

TEST(SegScoresTest, IdenticalNonEmptyIsPerfect) {
  std::mt19937_64 rng(2);
  std::vector<Mask> m = {random_mask(rng, 8, 8, 0.5), random_mask(rng, 8, 8, 0.5)};
  const auto s = seg_scores(m, m);
  EXPECT_DOUBLE_EQ(*s.iou, 100);
  EXPECT_DOUBLE_EQ(*s.precision, 100);
  EXPECT_DOUBLE_EQ(*s.recall, 100);
  EXPECT_DOUBLE_EQ(*s.fscore, 100);
}

TEST(SegScoresTest, TwoByTwoEnumeration) {
  const std::vector<Mask> p = {from_points(2, 2, {{0, 0}, {0, 1}})};
  const std::vector<Mask> g = {from_points(2, 2, {{0, 1}, {1, 1}})};
  const auto s = seg_scores(p, g);
  EXPECT_NEAR(*s.iou, 100.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(*s.precision, 50);
  EXPECT_DOUBLE_EQ(*s.recall, 50);
  EXPECT_DOUBLE_EQ(*s.fscore, 50);
}

TEST(SegScoresTest, PooledMatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  std::vector<Mask> preds, gts;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (int t = 0; t < 200; ++t) {
    std::uniform_real_distribution<double> d(0.0, 0.6);
    preds.push_back(random_mask(rng, 16, 16, d(rng)));
    gts.push_back(random_mask(rng, 16, 16, d(rng)));
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const bool p = preds.back()(x, y), g = gts.back()(x, y);
        tp += p && g;
        fp += p && !g;
        fn += !p && g;
      }
  }
  const auto s = seg_scores(preds, gts);
  const double P = 100.0 * tp / (tp + fp), R = 100.0 * tp / (tp + fn);
  EXPECT_EQ(*s.iou, 100.0 * tp / (tp + fp + fn));
  EXPECT_EQ(*s.precision, P);
  EXPECT_EQ(*s.recall, R);
  EXPECT_EQ(*s.fscore, 2 * P * R / (P + R));
}

TEST(SegScoresTest, ZeroDenominatorsAreNull) {
  const std::vector<Mask> empty = {Mask(4, 4)};
  const auto s = seg_scores(empty, empty);
  EXPECT_FALSE(s.iou || s.precision || s.recall || s.fscore);
  const std::vector<Mask> gt = {solid_block(4, 4, 0, 0, 1, 1)};
  const auto miss = seg_scores(empty, gt);
  EXPECT_FALSE(miss.precision.has_value());
  EXPECT_DOUBLE_EQ(*miss.recall, 0.0);
  EXPECT_DOUBLE_EQ(*miss.iou, 0.0);
  EXPECT_FALSE(miss.fscore.has_value());
  EXPECT_NE(seg_scores_json(s).find("null"), std::string::npos);
}

TEST(SegScoresTest, PerImageAveragesDefinedScores) {
  const std::vector<Mask> p = {solid_block(2, 2, 0, 0, 1, 1), Mask(2, 2)};
  const std::vector<Mask> g = {solid_block(2, 2, 0, 0, 0, 1), Mask(2, 2)};
  const auto s = seg_scores(p, g, Accumulation::kPerImage);
  EXPECT_DOUBLE_EQ(*s.iou, 50.0);
  EXPECT_DOUBLE_EQ(*s.precision, 50.0);
  EXPECT_DOUBLE_EQ(*s.recall, 100.0);
  EXPECT_THROW(seg_scores(std::vector<Mask>{Mask(2, 2)}, std::vector<Mask>{}), Error);
}

TEST(FscoreTest, ReproducesPublishedTriples) {
  struct Row {
    double p, r, f;
  };
  const Row rows[] = {{58.45, 58.56, 58.51}, {63.01, 59.69, 61.30}, {59.78, 66.71, 63.05},
                      {64.92, 57.43, 60.94}, {66.22, 58.29, 62.00}, {66.07, 60.16, 62.98},
                      {62.01, 64.91, 63.43}, {59.59, 68.49, 63.73}, {75.07, 53.73, 62.64},
                      {60.40, 58.36, 59.36}, {61.47, 47.93, 53.86}};
  for (const auto& row : rows) EXPECT_NEAR(*fscore_from(row.p, row.r), row.f, 0.01) << row.p << "," << row.r;
  EXPECT_FALSE(fscore_from(0, 0).has_value());
}

TEST(StrongPreferenceTest, AllSplitsOfFive) {
  for (int a = 0; a <= 5; ++a) {
    const Side expect = a >= 4 ? Side::kA : (5 - a >= 4 ? Side::kB : Side::kNone);
    EXPECT_EQ(strong_preference(a, 5 - a), expect) << a;
  }
  EXPECT_THROW(strong_preference(3, 3), Error);
  EXPECT_THROW(strong_preference(4, 0), Error);
  EXPECT_THROW(strong_preference(-1, 6), Error);
}

TEST(CorrelationTest, HandComputedPercentages) {
  std::vector<CorrelationPair> pairs = {{"p1", 0.1, 0.3, Side::kA}, {"p2", 0.5, 0.2, Side::kB},
                                        {"p3", 0.2, 0.4, Side::kB}};
  const auto r = metric_correlation(pairs, Polarity::kLowerBetter);
  EXPECT_NEAR(*r.percentage, 200.0 / 3.0, 1e-9);
  EXPECT_EQ(r.tie_count, 0u);
  EXPECT_EQ(r.rows.size(), 3u);
  EXPECT_FALSE(r.rows[2].match);
  const auto flipped = metric_correlation(pairs, Polarity::kHigherBetter);
  EXPECT_NEAR(*flipped.percentage, 100.0 / 3.0, 1e-9);
}

TEST(CorrelationTest, TwentyConstructedPairsWithTies) {
  // 5 ties; of the other 15, the metric agrees with humans on pairs i % 3 != 0.
  std::vector<CorrelationPair> pairs;
  int agree = 0, decided = 0;
  for (int i = 0; i < 20; ++i) {
    CorrelationPair p{"p" + std::to_string(i), 0.5, 0.5, i % 2 ? Side::kA : Side::kB};
    if (i >= 5) {
      const bool match = i % 3 != 0;
      const bool a_better = (p.human == Side::kA) == match;
      p.score_a = a_better ? 0.1 * (i % 4) : 0.9;
      p.score_b = a_better ? 0.9 : 0.1 * (i % 4);
      agree += match;
      ++decided;
    }
    pairs.push_back(p);
  }
  const auto r = metric_correlation(pairs, Polarity::kLowerBetter);
  EXPECT_EQ(r.tie_count, 5u);
  EXPECT_NEAR(*r.percentage, 100.0 * agree / decided, 1e-9);
  EXPECT_NE(correlation_csv(r).find("p19"), std::string::npos);
}

TEST(CorrelationTest, RankInvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<CorrelationPair> pairs;
  for (int i = 0; i < 60; ++i) pairs.push_back({"p" + std::to_string(i), u(rng), u(rng), i % 3 ? Side::kA : Side::kB});
  const auto base = metric_correlation(pairs, Polarity::kLowerBetter);
  for (auto f : {+[](double x) { return std::exp(3 * x); }, +[](double x) { return std::log(x); },
                 +[](double x) { return x * x * x + 7; }}) {
    auto t = pairs;
    for (auto& p : t) {
      p.score_a = f(p.score_a);
      p.score_b = f(p.score_b);
    }
    const auto r = metric_correlation(t, Polarity::kLowerBetter);
    EXPECT_EQ(r.percentage, base.percentage);
    EXPECT_EQ(r.tie_count, base.tie_count);
  }
}

TEST(CorrelationTest, AllTiesIsNull) {
  const std::vector<CorrelationPair> pairs = {{"a", 1, 1, Side::kA}};
  EXPECT_FALSE(metric_correlation(pairs, Polarity::kHigherBetter).percentage.has_value());
  const std::vector<CorrelationPair> bad = {{"a", 1, 2, Side::kNone}};
  EXPECT_THROW(metric_correlation(bad, Polarity::kHigherBetter), Error);
}

TEST(HoleSizeTest, SingleBinAndArithmetic) {
  const std::vector<double> edges = {0.0, 0.1, 0.2, 1.0};
  const std::vector<HoleSizeSample> s = {{"a", "natural", 0.15, 0.2}, {"b", "natural", 0.12, 0.4}};
  const auto r = par_vs_holesize(s, edges);
  ASSERT_EQ(r.bins.size(), 3u);
  EXPECT_DOUBLE_EQ(*r.bins[1].by_class.at("natural").mean_par, 0.3);
  EXPECT_DOUBLE_EQ(*r.bins[1].all.mean_par, 0.3);
  EXPECT_FALSE(r.bins[0].all.mean_par.has_value());
  EXPECT_FALSE(r.bins[2].all.mean_par.has_value());
  EXPECT_FALSE(r.bins[1].by_class.at("man_made").mean_par.has_value());
  EXPECT_NE(holesize_json(r).find("null"), std::string::npos);
  const std::vector<HoleSizeSample> edge = {{"c", "man_made", 1.0, 0.5}};
  EXPECT_EQ(par_vs_holesize(edge, edges).bins[2].all.count, 1u);
}

TEST(HoleSizeTest, RejectsBadEdges) {
  const std::vector<double> bad1 = {0.0, 0.5}, bad2 = {0.0, 0.6, 0.5, 1.0};
  EXPECT_THROW(par_vs_holesize({}, bad1), Error);
  EXPECT_THROW(par_vs_holesize({}, bad2), Error);
}

TEST(HoleSizeTest, ProportionalArtifactsGiveNonDecreasingTrend) {
  SynthConfig c;
  c.width = c.height = 64;
  c.perfect_fraction = 0.0;
  c.label_ratio_slope = 1.5;
  c.hole.ratio_lo = 0.05;
  c.hole.ratio_hi = 0.4;
  std::vector<HoleSizeSample> samples;
  for (const auto& s : synth_generate(21, 120, c)) {
    const double hr = static_cast<double>(area(s.hole)) / s.hole.pixel_count();
    samples.push_back({s.id, *s.scene_class, hr, par(*s.label, s.hole)});
  }
  const std::vector<double> edges = {0.0, 0.1, 0.2, 0.3, 1.0};
  const auto r = par_vs_holesize(samples, edges);
  std::optional<double> prev;
  for (const auto& b : r.bins) {
    if (!b.all.mean_par) continue;
    if (prev) EXPECT_GE(*b.all.mean_par, *prev);
    prev = b.all.mean_par;
  }
}

TEST(SceneClassTest, DefaultTableAndOverrides) {
  const auto& t = default_scene_class_table();
  EXPECT_EQ(scene_class_for("building", t), "man_made");
  EXPECT_EQ(scene_class_for("desert", t), "natural");
  EXPECT_FALSE(scene_class_for("ocean", t).has_value());
  EXPECT_EQ(t.size(), 14u);
  const auto custom = load_scene_class_table(R"({"ocean": "natural"})");
  EXPECT_EQ(scene_class_for("ocean", custom), "natural");
  EXPECT_THROW(load_scene_class_table(R"({"ocean": "wet"})"), Error);
}

}  // namespace
}  // namespace parkit
