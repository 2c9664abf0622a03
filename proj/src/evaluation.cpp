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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "parkit/error.hpp"

namespace parkit {

using json = nlohmann::json;

double par(const Mask& artifact, const Mask& hole) {
  require_same_shape(artifact, hole, "par");
  const std::size_t h = area(hole);
  require(h > 0, ErrorCode::kInvalidArgument, "par: hole is empty");
  return static_cast<double>(area(intersect(artifact, hole))) / static_cast<double>(h);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt, "confusion");
  ConfusionCounts c;
  const auto& p = pred.bits();
  const auto& g = gt.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int code = (p[i] ? 2 : 0) | (g[i] ? 1 : 0);
    switch (code) {
      case 3: ++c.tp; break;
      case 2: ++c.fp; break;
      case 1: ++c.fn; break;
      default: ++c.tn; break;
    }
  }
  return c;
}

namespace {

std::optional<double> pct(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> fscore_from(double precision, double recall) {
  require(precision >= 0 && recall >= 0, ErrorCode::kInvalidArgument, "fscore_from: negative input");
  if (precision + recall == 0) return std::nullopt;
  return 2 * precision * recall / (precision + recall);
}

SegScores scores_from(const ConfusionCounts& c) {
  SegScores s;
  s.iou = pct(c.tp, c.tp + c.fp + c.fn);
  s.precision = pct(c.tp, c.tp + c.fp);
  s.recall = pct(c.tp, c.tp + c.fn);
  if (s.precision && s.recall) s.fscore = fscore_from(*s.precision, *s.recall);
  return s;
}

SegScores seg_scores(std::span<const Mask> preds, std::span<const Mask> gts, Accumulation mode) {
  require(preds.size() == gts.size(), ErrorCode::kShapeMismatch,
          "seg_scores: " + std::to_string(preds.size()) + " predictions vs " +
              std::to_string(gts.size()) + " ground truths");
  if (mode == Accumulation::kPooled) {
    ConfusionCounts total;
    for (std::size_t i = 0; i < preds.size(); ++i) total += confusion(preds[i], gts[i]);
    return scores_from(total);
  }
  double sum[4] = {0, 0, 0, 0};
  std::size_t n[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const SegScores s = scores_from(confusion(preds[i], gts[i]));
    const std::optional<double>* f[4] = {&s.iou, &s.precision, &s.recall, &s.fscore};
    for (int k = 0; k < 4; ++k)
      if (*f[k]) {
        sum[k] += **f[k];
        ++n[k];
      }
  }
  auto mean = [&](int k) { return n[k] ? std::optional<double>(sum[k] / n[k]) : std::nullopt; };
  return {mean(0), mean(1), mean(2), mean(3)};
}

std::string side_name(Side s) {
  switch (s) {
    case Side::kA: return "A";
    case Side::kB: return "B";
    case Side::kNone: return "none";
  }
  return "none";
}

Side parse_side(const std::string& name) {
  if (name == "A" || name == "a") return Side::kA;
  if (name == "B" || name == "b") return Side::kB;
  if (name == "none") return Side::kNone;
  fail(ErrorCode::kValidation, "unknown side '" + name + "'");
}

Side strong_preference(int votes_a, int votes_b) {
  require(votes_a >= 0 && votes_b >= 0 && votes_a + votes_b == 5, ErrorCode::kInvalidArgument,
          "strong_preference needs exactly 5 votes, got " + std::to_string(votes_a) + "+" +
              std::to_string(votes_b));
  if (votes_a >= 4) return Side::kA;
  if (votes_b >= 4) return Side::kB;
  return Side::kNone;
}

Polarity parse_polarity(const std::string& name) {
  if (name == "higher_better") return Polarity::kHigherBetter;
  if (name == "lower_better") return Polarity::kLowerBetter;
  fail(ErrorCode::kValidation, "unknown polarity '" + name + "'");
}

CorrelationReport metric_correlation(std::span<const CorrelationPair> pairs, Polarity polarity) {
  CorrelationReport r;
  r.n_pairs = pairs.size();
  for (const auto& p : pairs) {
    require(p.human != Side::kNone, ErrorCode::kInvalidArgument,
            "metric_correlation: pair " + p.pair_id + " has no human preference");
    require(std::isfinite(p.score_a) && std::isfinite(p.score_b), ErrorCode::kInvalidArgument,
            "metric_correlation: pair " + p.pair_id + " has a non-finite score");
    CorrelationRow row{p.pair_id, Side::kNone, p.human, false, false};
    if (p.score_a == p.score_b) {
      row.tie = true;
      ++r.tie_count;
    } else {
      const bool a_higher = p.score_a > p.score_b;
      row.metric = (a_higher == (polarity == Polarity::kHigherBetter)) ? Side::kA : Side::kB;
      row.match = row.metric == p.human;
      if (row.match) ++r.n_matched;
    }
    r.rows.push_back(row);
  }
  const std::size_t decided = r.n_pairs - r.tie_count;
  if (decided > 0) r.percentage = 100.0 * static_cast<double>(r.n_matched) / static_cast<double>(decided);
  return r;
}

HoleSizeReport par_vs_holesize(std::span<const HoleSizeSample> samples, std::span<const double> edges) {
  require(edges.size() >= 2 && edges.front() == 0.0 && edges.back() == 1.0, ErrorCode::kInvalidArgument,
          "par_vs_holesize: bin edges must start at 0 and end at 1");
  for (std::size_t i = 1; i < edges.size(); ++i)
    require(edges[i] > edges[i - 1], ErrorCode::kInvalidArgument,
            "par_vs_holesize: bin edges must be strictly increasing");
  HoleSizeReport r;
  r.classes = {"man_made", "natural"};
  for (const auto& s : samples)
    if (std::find(r.classes.begin(), r.classes.end(), s.scene_class) == r.classes.end())
      r.classes.push_back(s.scene_class);
  std::vector<std::map<std::string, double>> sums(edges.size() - 1);
  std::vector<double> all_sums(edges.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    HoleSizeBin b;
    b.lo = edges[i];
    b.hi = edges[i + 1];
    for (const auto& c : r.classes) b.by_class[c] = {};
    r.bins.push_back(b);
  }
  for (const auto& s : samples) {
    require(s.hole_ratio >= 0 && s.hole_ratio <= 1, ErrorCode::kInvalidArgument,
            "par_vs_holesize: hole ratio of " + s.id + " outside [0,1]");
    std::size_t bin = static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), s.hole_ratio) - edges.begin());
    bin = std::min(bin == 0 ? 0 : bin - 1, r.bins.size() - 1);
    ++r.bins[bin].by_class[s.scene_class].count;
    ++r.bins[bin].all.count;
    sums[bin][s.scene_class] += s.par;
    all_sums[bin] += s.par;
  }
  for (std::size_t i = 0; i < r.bins.size(); ++i) {
    for (auto& [cls, cell] : r.bins[i].by_class)
      if (cell.count) cell.mean_par = sums[i][cls] / static_cast<double>(cell.count);
    if (r.bins[i].all.count) r.bins[i].all.mean_par = all_sums[i] / static_cast<double>(r.bins[i].all.count);
  }
  return r;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream o;
  o.precision(10);
  o << *v;
  return o.str();
}

}  // namespace

std::string seg_scores_json(const SegScores& s, const ConfusionCounts* pooled) {
  json j = {{"iou", opt(s.iou)}, {"precision", opt(s.precision)}, {"recall", opt(s.recall)},
            {"fscore", opt(s.fscore)}};
  if (pooled) j["counts"] = {{"tp", pooled->tp}, {"fp", pooled->fp}, {"fn", pooled->fn}, {"tn", pooled->tn}};
  return j.dump(2) + "\n";
}

std::string correlation_json(const CorrelationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"pair_id", row.pair_id}, {"metric", side_name(row.metric)},
                    {"human", side_name(row.human)}, {"tie", row.tie}, {"match", row.match}});
  json j = {{"percentage", opt(r.percentage)}, {"tie_count", r.tie_count}, {"n_pairs", r.n_pairs},
            {"n_matched", r.n_matched}, {"rows", rows}};
  return j.dump(2) + "\n";
}

std::string correlation_csv(const CorrelationReport& r) {
  std::ostringstream o;
  o << "pair_id,metric,human,tie,match\n";
  for (const auto& row : r.rows)
    o << row.pair_id << ',' << side_name(row.metric) << ',' << side_name(row.human) << ','
      << (row.tie ? 1 : 0) << ',' << (row.match ? 1 : 0) << '\n';
  return o.str();
}

std::string holesize_json(const HoleSizeReport& r) {
  json bins = json::array();
  for (const auto& b : r.bins) {
    json classes = json::object();
    for (const auto& [cls, cell] : b.by_class) classes[cls] = {{"count", cell.count}, {"mean_par", opt(cell.mean_par)}};
    bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"classes", classes},
                    {"all", {{"count", b.all.count}, {"mean_par", opt(b.all.mean_par)}}}});
  }
  return json{{"classes", r.classes}, {"bins", bins}}.dump(2) + "\n";
}

std::string holesize_csv(const HoleSizeReport& r) {
  std::ostringstream o;
  o << "bin_lo,bin_hi,scene_class,count,mean_par\n";
  for (const auto& b : r.bins) {
    for (const auto& [cls, cell] : b.by_class)
      o << b.lo << ',' << b.hi << ',' << cls << ',' << cell.count << ',' << csv_opt(cell.mean_par) << '\n';
    o << b.lo << ',' << b.hi << ",all," << b.all.count << ',' << csv_opt(b.all.mean_par) << '\n';
  }
  return o.str();
}

const std::map<std::string, std::string>& default_scene_class_table() {
  static const std::map<std::string, std::string> table = {
      {"building", "man_made"}, {"room", "man_made"},    {"shop", "man_made"},
      {"stadium", "man_made"},  {"studio", "man_made"},  {"factory", "man_made"},
      {"sky", "natural"},       {"land", "natural"},     {"mountain", "natural"},
      {"forest", "natural"},    {"garden", "natural"},   {"pasture", "natural"},
      {"beach", "natural"},     {"desert", "natural"}};
  return table;
}

std::map<std::string, std::string> load_scene_class_table(const std::string& json_text) {
  std::map<std::string, std::string> table;
  try {
    const json j = json::parse(json_text);
    require(j.is_object(), ErrorCode::kValidation, "scene class table must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      const std::string cls = v.get<std::string>();
      require(cls == "man_made" || cls == "natural", ErrorCode::kValidation,
              "scene class for '" + k + "' must be man_made or natural");
      table[k] = cls;
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed scene class table: ") + e.what());
  }
  return table;
}

std::optional<std::string> scene_class_for(const std::string& category,
                                           const std::map<std::string, std::string>& table) {
  const auto it = table.find(category);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace parkit
