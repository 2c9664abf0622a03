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

#include "parkit/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "parkit/error.hpp"
#include "parkit/image_io.hpp"

namespace parkit {

using json = nlohmann::json;

void SegConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::kInvalidArgument, "SegConfig: " + msg); };
  check(backbone_id == "small" || backbone_id == "medium", "backbone_id must be small or medium");
  check(head_id == "pyramid" || head_id == "fcn", "head_id must be pyramid or fcn");
  check(max_iters > 0, "max_iters must be > 0");
  check(min_lr > 0 && min_lr <= base_lr, "need 0 < min_lr <= base_lr");
  check(flip_prob >= 0 && flip_prob <= 1, "flip_prob must be in [0,1]");
  check(jpeg_prob >= 0 && jpeg_prob <= 1, "jpeg_prob must be in [0,1]");
  check(jpeg_quality_lo >= 1 && jpeg_quality_lo <= jpeg_quality_hi && jpeg_quality_hi <= 100,
        "jpeg quality range must satisfy 1 <= lo <= hi <= 100");
  check(momentum >= 0 && momentum < 1, "momentum must be in [0,1)");
  check(weight_decay >= 0, "weight_decay must be >= 0");
  check(lr_power > 0, "lr_power must be > 0");
  check(aux_head_weight >= 0, "aux_head_weight must be >= 0");
  check(input_size >= 16 && input_size % 4 == 0, "input_size must be a multiple of 4 and >= 16");
  check(batch_size >= 1, "batch_size must be >= 1");
  check(pretrain_iters >= 0, "pretrain_iters must be >= 0");
  check(val_interval >= 1 && log_interval >= 1, "intervals must be >= 1");
}

nn::Architecture SegConfig::architecture() const {
  const int in = include_hole_channel ? 4 : 3;
  nn::Architecture a = backbone_id == "medium" ? nn::Architecture::medium(in) : nn::Architecture::small(in);
  if (head_id == "fcn") a.pyramid_bins.clear();
  return a;
}

namespace {

json config_json(const SegConfig& c) {
  return {{"backbone_id", c.backbone_id},
          {"head_id", c.head_id},
          {"aux_head_weight", c.aux_head_weight},
          {"max_iters", c.max_iters},
          {"base_lr", c.base_lr},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"lr_power", c.lr_power},
          {"min_lr", c.min_lr},
          {"flip_prob", c.flip_prob},
          {"jpeg_aug", c.jpeg_aug},
          {"jpeg_prob", c.jpeg_prob},
          {"jpeg_quality_lo", c.jpeg_quality_lo},
          {"jpeg_quality_hi", c.jpeg_quality_hi},
          {"input_size", c.input_size},
          {"batch_size", c.batch_size},
          {"include_hole_channel", c.include_hole_channel},
          {"seed", c.seed},
          {"pretrain_iters", c.pretrain_iters},
          {"val_interval", c.val_interval},
          {"log_interval", c.log_interval}};
}

SegConfig config_from(const json& j) {
  require(j.is_object(), ErrorCode::kValidation, "SegConfig JSON must be an object");
  SegConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "backbone_id") c.backbone_id = v.get<std::string>();
    else if (key == "head_id") c.head_id = v.get<std::string>();
    else if (key == "aux_head_weight") c.aux_head_weight = v.get<double>();
    else if (key == "max_iters") c.max_iters = v.get<int>();
    else if (key == "base_lr") c.base_lr = v.get<double>();
    else if (key == "momentum") c.momentum = v.get<double>();
    else if (key == "weight_decay") c.weight_decay = v.get<double>();
    else if (key == "lr_power") c.lr_power = v.get<double>();
    else if (key == "min_lr") c.min_lr = v.get<double>();
    else if (key == "flip_prob") c.flip_prob = v.get<double>();
    else if (key == "jpeg_aug") c.jpeg_aug = v.get<bool>();
    else if (key == "jpeg_prob") c.jpeg_prob = v.get<double>();
    else if (key == "jpeg_quality_lo") c.jpeg_quality_lo = v.get<int>();
    else if (key == "jpeg_quality_hi") c.jpeg_quality_hi = v.get<int>();
    else if (key == "input_size") c.input_size = v.get<int>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "include_hole_channel") c.include_hole_channel = v.get<bool>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "pretrain_iters") c.pretrain_iters = v.get<int>();
    else if (key == "val_interval") c.val_interval = v.get<int>();
    else if (key == "log_interval") c.log_interval = v.get<int>();
    else fail(ErrorCode::kValidation, "SegConfig: unknown key '" + key + "'");
  }
  return c;
}

}  // namespace

std::string seg_config_to_json(const SegConfig& c) { return config_json(c).dump(2) + "\n"; }

SegConfig seg_config_from_json(std::string_view text) {
  SegConfig c;
  try {
    c = config_from(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed SegConfig JSON: ") + e.what());
  }
  c.validate();
  return c;
}

double poly_lr(const SegConfig& c, int iter) {
  require(iter >= 0 && iter <= c.max_iters, ErrorCode::kInvalidArgument,
          "poly_lr: iter " + std::to_string(iter) + " outside [0, " + std::to_string(c.max_iters) + "]");
  const double frac = 1.0 - static_cast<double>(iter) / c.max_iters;
  return std::max(c.min_lr, c.base_lr * std::pow(frac, c.lr_power));
}

namespace {

constexpr float kMean = 0.5f;
constexpr float kScale = 4.0f;  // 1 / 0.25

void write_input(const Image& image, const Mask* hole, bool hole_channel, nn::Tensor<float>& x, int n) {
  const int w = image.width(), h = image.height();
  float* dst = x.image(n);
  const std::size_t plane = x.plane();
  const auto data = image.data();
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c) dst[c * plane + i] = (data[i * 3 + c] / 255.0f - kMean) * kScale;
  if (hole_channel) {
    float* hc = dst + 3 * plane;
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) hc[static_cast<std::size_t>(y) * w + xx] = hole && (*hole)(xx, y) ? 1.0f : 0.0f;
  }
}

}  // namespace

SegModel::SegModel(const SegConfig& config, std::uint64_t init_seed)
    : config_(config), net_((config.validate(), config.architecture()), init_seed) {}

void SegModel::set_selection(std::optional<double> best_val_iou, int best_iter) {
  best_val_iou_ = best_val_iou;
  best_iter_ = best_iter;
}

Mask SegModel::detect(const Image& image, const Mask* hole) const {
  const int s = config_.input_size;
  const bool resize = image.width() != s || image.height() != s;
  const Image in = resize ? resize_bilinear(image, s, s) : image;
  std::optional<Mask> hole_in;
  if (hole && config_.include_hole_channel) hole_in = resize ? resize_nearest(*hole, s, s) : *hole;
  nn::Tensor<float> x(1, config_.include_hole_channel ? 4 : 3, s, s);
  write_input(in, hole_in ? &*hole_in : nullptr, config_.include_hole_channel, x, 0);
  const auto out = net_.forward(x);
  Mask m(s, s);
  const std::size_t plane = out.main.plane();
  for (std::size_t i = 0; i < plane; ++i)
    if (out.main.v[plane + i] > out.main.v[i]) m.set(static_cast<int>(i % s), static_cast<int>(i / s));
  return resize ? resize_nearest(m, image.width(), image.height()) : m;
}

namespace {

constexpr char kMagic[8] = {'P', 'A', 'T', 'C', 'K', 'P', 'T', '1'};

}  // namespace

void SegModel::save(const std::filesystem::path& path) const {
  json header = {{"config", config_json(config_)},
                 {"best_iter", best_iter_},
                 {"parameter_count", net_.parameter_count()}};
  header["best_val_iou"] = best_val_iou_ ? json(*best_val_iou_) : json(nullptr);
  const std::string text = header.dump();
  std::ostringstream buf(std::ios::binary);
  buf.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  buf.write(reinterpret_cast<const char*>(&len), sizeof(len));
  buf.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : net_.params())
    buf.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  for (const auto* b : net_.buffers())
    buf.write(reinterpret_cast<const char*>(b->data()), static_cast<std::streamsize>(b->size() * sizeof(float)));
  const std::string bytes = buf.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

SegModel SegModel::load(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  const std::string where = "checkpoint " + path.string();
  require(bytes.size() >= 16 && std::memcmp(bytes.data(), kMagic, 8) == 0, ErrorCode::kValidation,
          where + ": bad magic");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, sizeof(len));
  require(len <= bytes.size() - 16, ErrorCode::kValidation, where + ": truncated header");
  json header;
  SegConfig config;
  try {
    header = json::parse(std::string(reinterpret_cast<const char*>(bytes.data() + 16), len));
    config = config_from(header.at("config"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, where + ": malformed header: " + e.what());
  }
  SegModel model(config, 0);
  std::size_t expected = model.net_.parameter_count();
  for (const auto* b : model.net_.buffers()) expected += b->size();
  const std::size_t offset = 16 + len;
  require(bytes.size() - offset == expected * sizeof(float), ErrorCode::kValidation,
          where + ": weight payload has " + std::to_string((bytes.size() - offset) / sizeof(float)) +
              " floats, architecture needs " + std::to_string(expected));
  std::size_t at = offset;
  for (auto* p : model.net_.params()) {
    std::memcpy(p->value.data(), bytes.data() + at, p->value.size() * sizeof(float));
    at += p->value.size() * sizeof(float);
  }
  for (auto* b : model.net_.buffers()) {
    std::memcpy(b->data(), bytes.data() + at, b->size() * sizeof(float));
    at += b->size() * sizeof(float);
  }
  const auto& best = header.value("best_val_iou", json(nullptr));
  model.set_selection(best.is_null() ? std::nullopt : std::optional<double>(best.get<double>()),
                      header.value("best_iter", -1));
  return model;
}

std::optional<double> validation_iou(const ArtifactDetector& model, std::span<const Sample> samples) {
  std::size_t inter = 0, uni = 0;
  for (const auto& s : samples) {
    require(s.label.has_value(), ErrorCode::kPrecondition, "validation sample " + s.id + " is unlabeled");
    const Mask pred = model.predict(s.inspected(), &s.hole);
    inter += area(intersect(pred, *s.label));
    uni += area(unite(pred, *s.label));
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct Example {
  Image image;
  Mask hole;
  Mask target;
};

Example prepare(const Image& image, const Mask& hole, const Mask& target, int size) {
  if (image.width() == size && image.height() == size) return {image, hole, target};
  return {resize_bilinear(image, size, size), resize_nearest(hole, size, size),
          resize_nearest(target, size, size)};
}

std::vector<Example> prepare_samples(std::span<const Sample> samples, int size, const char* what) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    require(s.label.has_value(), ErrorCode::kPrecondition,
            std::string(what) + " sample " + s.id + " has no label");
    require(s.label->same_shape(s.hole) && is_subset(*s.label, s.hole), ErrorCode::kPrecondition,
            std::string(what) + " sample " + s.id + " label is not canonicalized to its hole");
    out.push_back(prepare(s.inspected(), s.hole, *s.label, size));
  }
  return out;
}

class Trainer {
 public:
  Trainer(const SegConfig& cfg, SegModel& model)
      : cfg_(cfg), model_(model), rng_(cfg.seed ^ 0x5EC0FFEEULL), channels_(cfg.include_hole_channel ? 4 : 3) {}

  // Runs `iters` SGD steps over `pool` on a fresh poly schedule.
  void run(const std::vector<Example>& pool, int iters, std::span<const Sample> val,
           std::vector<TrainLogRow>& log, const TrainProgress& progress, bool select) {
    SegConfig sched = cfg_;
    sched.max_iters = iters;
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();
    const int s = cfg_.input_size;
    const int b = cfg_.batch_size;
    std::vector<std::uint8_t> targets(static_cast<std::size_t>(b) * s * s);
    nn::Tensor<float> x(b, channels_, s, s);
    nn::Tensor<float> d_main, d_aux;
    typename nn::SegNet<float>::Activations acts;
    double sum_main = 0, sum_aux = 0;
    int window = 0;

    for (int it = 0; it < iters; ++it) {
      for (int n = 0; n < b; ++n) {
        if (cursor >= order.size()) {
          std::shuffle(order.begin(), order.end(), rng_);
          cursor = 0;
        }
        load(pool[order[cursor++]], x, n, targets);
      }
      const double lr = poly_lr(sched, it);
      auto& net = model_.net();
      net.zero_grad();
      const auto out = net.forward(x, nn::Mode::kTraining, &acts);
      const double lm = nn::softmax_cross_entropy(out.main, targets, 1.0, &d_main);
      const double la = nn::softmax_cross_entropy(out.aux, targets, cfg_.aux_head_weight, &d_aux);
      if (!std::isfinite(lm) || !std::isfinite(la)) {
        std::ostringstream msg;
        msg << "non-finite loss at iter " << it << " (lr " << lr << ", loss_main " << lm
            << ", loss_aux " << la << ")";
        fail(ErrorCode::kNumerical, msg.str());
      }
      net.backward(acts, d_main, d_aux);
      net.update_running_stats(acts);
      step(lr);
      sum_main += lm;
      sum_aux += la;
      ++window;

      const bool last = it + 1 == iters;
      const bool do_val = select && !val.empty() && ((it + 1) % cfg_.val_interval == 0 || last);
      if ((it + 1) % cfg_.log_interval == 0 || last || do_val) {
        TrainLogRow row{it + 1, lr, sum_main / window, sum_aux / window, std::nullopt};
        if (do_val) {
          row.val_iou = validation_iou(model_, val);
          consider(row.val_iou.value_or(0.0), it + 1);
        }
        log.push_back(row);
        if (progress) progress(row);
        sum_main = sum_aux = 0;
        window = 0;
      }
    }
  }

  void finish(bool have_val) {
    if (!have_val || best_weights_.empty()) return;
    auto params = model_.net().params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_weights_[i];
    auto buffers = model_.net().buffers();
    for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i] = best_buffers_[i];
    model_.set_selection(best_iou_, best_iter_);
  }

 private:
  void load(const Example& ex, nn::Tensor<float>& x, int n, std::vector<std::uint8_t>& targets) {
    Image img = ex.image;
    Mask hole = ex.hole;
    Mask target = ex.target;
    if (std::bernoulli_distribution(cfg_.flip_prob)(rng_)) {
      img = flip_horizontal(img);
      hole = flip_horizontal(hole);
      target = flip_horizontal(target);
    }
    if (cfg_.jpeg_aug && std::bernoulli_distribution(cfg_.jpeg_prob)(rng_)) {
      const int q = std::uniform_int_distribution<int>(cfg_.jpeg_quality_lo, cfg_.jpeg_quality_hi)(rng_);
      img = jpeg_roundtrip(img, q);
    }
    write_input(img, &hole, cfg_.include_hole_channel, x, n);
    const std::size_t plane = x.plane();
    const auto& bits = target.bits();
    for (std::size_t i = 0; i < plane; ++i) targets[n * plane + i] = bits[i] ? 1 : 0;
  }

  void step(double lr) {
    const float mu = static_cast<float>(cfg_.momentum);
    const float wd = static_cast<float>(cfg_.weight_decay);
    const float eta = static_cast<float>(lr);
    for (auto* p : model_.net().params()) {
      const std::size_t n = p->size();
      float* w = p->value.data();
      float* v = p->velocity.data();
      const float* g = p->grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = mu * v[i] + g[i] + wd * w[i];
        w[i] -= eta * v[i];
      }
    }
  }

  void consider(double iou, int iter) {
    if (!best_weights_.empty() && iou <= best_iou_) return;
    best_iou_ = iou;
    best_iter_ = iter;
    best_weights_.clear();
    for (const auto* p : model_.net().params()) best_weights_.push_back(p->value);
    best_buffers_.clear();
    for (const auto* b : model_.net().buffers()) best_buffers_.push_back(*b);
  }

  const SegConfig& cfg_;
  SegModel& model_;
  std::mt19937_64 rng_;
  int channels_;
  std::vector<nn::Buffer<float>> best_weights_;
  std::vector<nn::Buffer<float>> best_buffers_;
  double best_iou_ = 0;
  int best_iter_ = -1;
};

}  // namespace

TrainResult train(const SegConfig& config, std::span<const Sample> train_samples,
                  std::span<const Sample> val_samples, const TrainExtras& extras,
                  const TrainProgress& progress) {
  config.validate();
  require(!train_samples.empty(), ErrorCode::kInvalidArgument, "train: empty train set");
  const int s = config.input_size;
  std::vector<Example> pool = prepare_samples(train_samples, s, "train");
  for (const auto& img : extras.real_negatives) {
    const Mask none(img.width(), img.height());
    pool.push_back(prepare(img, none, none, s));
  }
  for (const auto& v : val_samples)
    require(v.label.has_value(), ErrorCode::kPrecondition, "validation sample " + v.id + " has no label");

  TrainResult result{SegModel(config, config.seed), {}, {}};
  Trainer trainer(config, result.model);
  if (config.pretrain_iters > 0 && !extras.pseudo_pretrain.empty()) {
    const auto pseudo = prepare_samples(extras.pseudo_pretrain, s, "pseudo-label");
    trainer.run(pseudo, config.pretrain_iters, {}, result.pretrain_log, {}, false);
  }
  trainer.run(pool, config.max_iters, val_samples, result.log, progress, true);
  trainer.finish(!val_samples.empty());
  if (val_samples.empty()) result.model.set_selection(std::nullopt, config.max_iters);
  return result;
}

std::string train_log_csv(std::span<const TrainLogRow> rows) {
  std::ostringstream out;
  out.precision(8);
  out << "iter,lr,loss_main,loss_aux,val_IoU\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << r.lr << ',' << r.loss_main << ',' << r.loss_aux << ',';
    if (r.val_iou) out << *r.val_iou;
    out << '\n';
  }
  return out.str();
}

}  // namespace parkit
