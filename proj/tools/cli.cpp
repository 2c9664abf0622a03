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

#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "parkit/dataset.hpp"
#include "parkit/detector.hpp"
#include "parkit/error.hpp"
#include "parkit/evaluation.hpp"
#include "parkit/image_io.hpp"
#include "parkit/inpaint.hpp"
#include "parkit/iterfill.hpp"
#include "parkit/seed.hpp"
#include "parkit/segmenter.hpp"
#include "parkit/service.hpp"
#include "parkit/synth.hpp"

namespace parkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first error.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard g(mu);
          if (!first) first = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

json resolved_config(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    const std::string key = opt->get_lnames().empty() ? name : opt->get_lnames().front();
    if (key.empty() || key == "help" || key == "help-all") continue;
    if (opt->get_type_size() == 0) {
      cfg[key] = opt->count() > 0;
      continue;
    }
    const auto& res = opt->results();
    if (res.empty()) {
      const std::string d = opt->get_default_str();
      cfg[key] = d.empty() ? json(nullptr) : json(d);
    } else if (opt->get_items_expected_max() > 1 || res.size() > 1) {
      cfg[key] = res;
    } else {
      cfg[key] = res.front();
    }
  }
  return cfg;
}

void write_manifest(const fs::path& out, const CLI::App& sub, const json& outputs) {
  fs::create_directories(out);
  json m = {{"tool", "parkit"}, {"subcommand", sub.get_name()}, {"config", resolved_config(sub)},
            {"outputs", outputs}};
  write_text(out / "manifest.json", m.dump(2) + "\n");
}

std::unique_ptr<ArtifactDetector> load_detector(const std::string& model_path, bool color_key) {
  if (color_key) return std::make_unique<ColorKeyDetector>();
  require(!model_path.empty(), ErrorCode::kInvalidArgument, "need --model or --color-key");
  return std::make_unique<SegModel>(SegModel::load(model_path));
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<Sample> select_part(std::vector<Sample> all, const std::string& split_path,
                                const std::string& part) {
  if (split_path.empty() || part == "all") return all;
  const SplitSpec sp = split_from_json(read_text(split_path));
  const std::vector<std::string>* ids = part == "train" ? &sp.train_ids
                                        : part == "val" ? &sp.val_ids
                                        : part == "test" ? &sp.test_ids
                                                         : nullptr;
  require(ids != nullptr, ErrorCode::kInvalidArgument, "unknown split part '" + part + "'");
  std::map<std::string, Sample*> by_id;
  for (auto& s : all) by_id.emplace(s.id, &s);
  std::vector<Sample> out;
  for (const auto& id : *ids) {
    auto it = by_id.find(id);
    require(it != by_id.end(), ErrorCode::kNotFound, "split id not in dataset: " + id);
    out.push_back(*it->second);
  }
  return out;
}

std::string fmt(double v) { return json(v).dump(); }

void emit(std::ostream& out, const std::string& text) {
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

struct FillFlags {
  std::string data, image, hole, truth, model, backend = "toy_diffusion", external;
  std::string out;
  bool color_key = false;
  int diffusion_iters = 400;
  double p = 0.5;
  std::uint64_t seed = 0;
  int timeout_ms = 120000;
  int max_concurrent = 2;
  int limit = 0;
  int jobs = 1;
};

void add_fill_flags(CLI::App* sub, FillFlags& f) {
  sub->add_option("--data", f.data, "Dataset root");
  sub->add_option("--image", f.image, "Single input image");
  sub->add_option("--hole", f.hole, "Hole mask for --image");
  sub->add_option("--truth", f.truth, "Truth image for the oracle backend with --image");
  sub->add_option("--limit", f.limit, "Use only the first N samples (0 = all)")->check(CLI::NonNegativeNumber);
  sub->add_option("--backend", f.backend, "toy_diffusion | oracle | external_command")
      ->check(CLI::IsMember({"toy_diffusion", "oracle", "external_command"}));
  sub->add_option("--diffusion-iters", f.diffusion_iters, "Toy diffusion iterations")->check(CLI::NonNegativeNumber);
  sub->add_option("--p", f.p, "Oracle restore fraction")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", f.seed, "Base seed; per-sample seeds derive from it");
  sub->add_option("--external-cmd", f.external, "External backend command prefix");
  sub->add_option("--timeout-ms", f.timeout_ms, "External backend timeout")->check(CLI::PositiveNumber);
  sub->add_option("--max-concurrent", f.max_concurrent, "External subprocess pool size")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "Output directory")->required();
  sub->add_option("--jobs", f.jobs, "Worker threads across images")->check(CLI::PositiveNumber);
}

InpainterSpec inpainter_spec(const FillFlags& f, std::uint64_t seed) {
  InpainterSpec spec;
  spec.kind = f.backend;
  spec.iters = f.diffusion_iters;
  spec.p = f.p;
  spec.seed = seed;
  spec.external.command = split_words(f.external);
  spec.external.timeout = std::chrono::milliseconds(f.timeout_ms);
  spec.external.max_concurrent = f.max_concurrent;
  return spec;
}

// Image, hole, truth triples from --data or --image/--hole.
struct FillJob {
  std::string id;
  Image image;
  Mask hole;
  std::optional<Image> truth;
};

std::vector<FillJob> fill_jobs(const FillFlags& f) {
  std::vector<FillJob> jobs;
  if (!f.data.empty()) {
    require(f.image.empty(), ErrorCode::kInvalidArgument, "--data and --image are exclusive");
    for (auto& s : load_dataset(f.data)) {
      if (s.hole.is_empty()) continue;
      jobs.push_back({s.id, s.image, s.hole, s.image});
      if (f.limit > 0 && static_cast<int>(jobs.size()) == f.limit) break;
    }
    return jobs;
  }
  require(!f.image.empty() && !f.hole.empty(), ErrorCode::kInvalidArgument,
          "need --data, or --image with --hole");
  FillJob j{"image", read_image(f.image), read_mask(f.hole), std::nullopt};
  if (!f.truth.empty()) j.truth = read_image(f.truth);
  jobs.push_back(std::move(j));
  return jobs;
}

using FillFn = std::function<IterFillTrace(const FillJob&, const Inpainter&)>;

int run_fill(const CLI::App& sub, const FillFlags& f, int max_iters, const FillFn& fn, std::ostream& out) {
  const std::vector<FillJob> jobs = fill_jobs(f);
  require(!jobs.empty(), ErrorCode::kInvalidArgument, "no samples with a non-empty hole");
  std::vector<IterFillTrace> traces(jobs.size(), IterFillTrace{Mask(1, 1), {}, Termination::kMaxIters, {}, {}});
  std::shared_ptr<Inpainter> shared;
  if (f.backend != "oracle") shared = make_inpainter(inpainter_spec(f, f.seed));
  parallel_for(jobs.size(), f.jobs, [&](std::size_t i) {
    const FillJob& j = jobs[i];
    std::unique_ptr<Inpainter> own;
    if (f.backend == "oracle") {
      require(j.truth.has_value(), ErrorCode::kInvalidArgument, "oracle backend needs --truth");
      own = make_inpainter(inpainter_spec(f, mix_seed(f.seed, i)), *j.truth);
    }
    traces[i] = fn(j, own ? *own : *shared);
    persist_trace(traces[i], fs::path(f.out) / "traces" / j.id);
  });
  json per = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json pars = json::array();
    for (const auto& s : traces[i].steps) pars.push_back(s.par);
    per.push_back({{"id", jobs[i].id},
                   {"pars", pars},
                   {"terminated_by", termination_name(traces[i].terminated_by)},
                   {"final_par", traces[i].final_par ? json(*traces[i].final_par) : json(nullptr)}});
  }
  const bool scored = std::all_of(traces.begin(), traces.end(),
                                  [](const IterFillTrace& t) { return t.final_par.has_value(); });
  json curve = {{"n", jobs.size()},
                {"par_curve", par_curve(traces, max_iters)},
                {"detected_par_curve", scored ? json(detected_par_curve(traces, max_iters)) : json(nullptr)},
                {"traces", per}};
  write_text(fs::path(f.out) / "curve.json", curve.dump(2) + "\n");
  write_manifest(f.out, sub, {"curve.json", "traces/"});
  json brief = {{"par_curve", curve["par_curve"]}, {"detected_par_curve", curve["detected_par_curve"]}};
  out << brief.dump() << "\n";
  return kOk;
}

std::vector<CorrelationPair> read_pairs(const std::string& path) {
  const std::string text = read_text(path);
  std::vector<CorrelationPair> pairs;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    for (const auto& e : json::parse(text))
      pairs.push_back({e.at("pair_id").get<std::string>(), e.at("score_a").get<double>(),
                       e.at("score_b").get<double>(), parse_side(e.at("human").get<std::string>())});
    return pairs;
  }
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kValidation, "empty pairs file");
  require(line.rfind("pair_id,score_a,score_b,human", 0) == 0, ErrorCode::kValidation,
          "pairs CSV header must be pair_id,score_a,score_b,human");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    require(cells.size() == 4, ErrorCode::kValidation, "bad pairs row: " + line);
    try {
      pairs.push_back({cells[0], std::stod(cells[1]), std::stod(cells[2]), parse_side(cells[3])});
    } catch (const std::logic_error&) {
      fail(ErrorCode::kValidation, "bad pairs row: " + line);
    }
  }
  return pairs;
}

std::vector<double> parse_edges(const std::string& s) {
  std::vector<double> edges;
  std::stringstream ss(s);
  for (std::string c; std::getline(ss, c, ',');) {
    try {
      edges.push_back(std::stod(c));
    } catch (const std::logic_error&) {
      fail(ErrorCode::kValidation, "bad bin edge '" + c + "'");
    }
  }
  return edges;
}

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kValidation:
    case ErrorCode::kPlacement: return kInvalid;
    default: return kFailure;
  }
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perceptual artifact toolkit", "parkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // dataset-synth
  CLI::App* synth = app.add_subcommand("dataset-synth", "Generate a synthetic labeled dataset");
  std::string synth_out, synth_kinds = "blob,line_break,checker,smear";
  int synth_n = 0, synth_jobs = 1;
  std::uint64_t synth_seed = 0;
  SynthConfig sc;
  synth->add_option("--out", synth_out, "Dataset root to write")->required();
  synth->add_option("--n", synth_n, "Sample count")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--width", sc.width, "Frame width")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--height", sc.height, "Frame height")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--perfect-fraction", sc.perfect_fraction, "Share of perfect fills")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  synth->add_option("--kinds", synth_kinds, "Comma-separated artifact kinds")->capture_default_str();
  synth->add_option("--label-ratio-lo", sc.label_ratio_lo)->capture_default_str();
  synth->add_option("--label-ratio-hi", sc.label_ratio_hi)->capture_default_str();
  synth->add_option("--label-ratio-slope", sc.label_ratio_slope)->capture_default_str();
  synth->add_option("--hole-ratio-lo", sc.hole.ratio_lo)->capture_default_str();
  synth->add_option("--hole-ratio-hi", sc.hole.ratio_hi)->capture_default_str();
  synth->add_option("--id-prefix", sc.id_prefix)->capture_default_str();
  synth->add_option("--jobs", synth_jobs, "Writer threads")->check(CLI::PositiveNumber);

  // dataset-stats
  CLI::App* stats = app.add_subcommand("dataset-stats", "Summarize a dataset");
  std::string stats_data, stats_out;
  stats->add_option("--data", stats_data, "Dataset root")->required();
  stats->add_option("--out", stats_out, "Optional output directory");

  // split
  CLI::App* split = app.add_subcommand("split", "8:1:1 train/val/test split");
  std::string split_from, split_ids, split_out;
  int split_n = 0;
  std::uint64_t split_seed = 0;
  auto* from_opt = split->add_option("--n-from", split_from, "Dataset root to take ids from");
  auto* ids_opt = split->add_option("--ids", split_ids, "File with one id per line");
  auto* n_opt = split->add_option("--n", split_n, "Use ids 00000..n-1")->check(CLI::PositiveNumber);
  from_opt->excludes(ids_opt)->excludes(n_opt);
  ids_opt->excludes(n_opt);
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--out", split_out, "Output directory")->required();

  // train
  CLI::App* tr = app.add_subcommand("train", "Train the artifact segmenter");
  std::string tr_data, tr_split, tr_out, tr_config, tr_pretrain, tr_negatives;
  std::optional<int> tr_iters, tr_batch, tr_input, tr_val_interval, tr_log_interval, tr_pretrain_iters;
  std::optional<std::string> tr_backbone, tr_head;
  std::optional<double> tr_lr, tr_aux;
  std::optional<std::uint64_t> tr_seed;
  bool tr_hole = false, tr_no_jpeg = false, tr_no_flip = false;
  tr->add_option("--data", tr_data, "Dataset root")->required();
  tr->add_option("--split", tr_split, "split.json; otherwise an 8:1:1 split with --seed");
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr->add_option("--config", tr_config, "Segmenter config JSON; flags override it");
  tr->add_option("--iters", tr_iters, "max_iters")->check(CLI::PositiveNumber);
  tr->add_option("--batch-size", tr_batch, "batch_size")->check(CLI::PositiveNumber);
  tr->add_option("--input-size", tr_input, "input_size")->check(CLI::PositiveNumber);
  tr->add_option("--backbone", tr_backbone, "small | medium");
  tr->add_option("--head", tr_head, "pyramid | fcn");
  tr->add_option("--base-lr", tr_lr, "base_lr");
  tr->add_option("--aux-weight", tr_aux, "aux_head_weight");
  tr->add_option("--val-interval", tr_val_interval, "val_interval");
  tr->add_option("--log-interval", tr_log_interval, "log_interval");
  tr->add_option("--seed", tr_seed, "Training and split seed");
  tr->add_flag("--hole-channel", tr_hole, "include_hole_channel");
  tr->add_flag("--no-jpeg", tr_no_jpeg, "Disable JPEG augmentation");
  tr->add_flag("--no-flip", tr_no_flip, "Disable flip augmentation");
  tr->add_option("--pretrain-data", tr_pretrain, "Pseudo-labeled dataset root");
  tr->add_option("--pretrain-iters", tr_pretrain_iters, "pretrain_iters");
  tr->add_option("--negatives", tr_negatives, "Directory of clean PNG images");

  // predict
  CLI::App* pr = app.add_subcommand("predict", "Predict artifact masks");
  std::string pr_model, pr_data, pr_image, pr_hole, pr_out, pr_split, pr_part = "all";
  bool pr_key = false;
  int pr_jobs = 1;
  pr->add_option("--model", pr_model, "Checkpoint");
  pr->add_flag("--color-key", pr_key, "Use the artifact-color detector instead of a model");
  pr->add_option("--data", pr_data, "Dataset root");
  pr->add_option("--split", pr_split, "split.json to select --part from");
  pr->add_option("--part", pr_part, "train | val | test | all")->capture_default_str();
  pr->add_option("--image", pr_image, "Single image");
  pr->add_option("--hole", pr_hole, "Hole mask for --image");
  pr->add_option("--out", pr_out, "Output directory")->required();
  pr->add_option("--jobs", pr_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // par
  CLI::App* pa = app.add_subcommand("par", "Perceptual artifact ratio of one mask pair");
  std::string pa_artifact, pa_hole;
  pa->add_option("--artifact", pa_artifact, "Artifact mask PNG")->required();
  pa->add_option("--hole", pa_hole, "Hole mask PNG")->required();

  // iterfill / onionfill
  CLI::App* it = app.add_subcommand("iterfill", "Iterative artifact-guided refill");
  FillFlags it_f;
  int it_max = 5;
  add_fill_flags(it, it_f);
  it->add_option("--model", it_f.model, "Checkpoint");
  it->add_flag("--color-key", it_f.color_key, "Use the artifact-color detector");
  it->add_option("--max-iters", it_max, "Fill iterations")->capture_default_str()->check(CLI::PositiveNumber);

  CLI::App* on = app.add_subcommand("onionfill", "Onion-peel refill baseline");
  FillFlags on_f;
  int on_steps = 5, on_erode = 3;
  add_fill_flags(on, on_f);
  on->add_option("--model", on_f.model, "Optional checkpoint to score each fill");
  on->add_flag("--color-key", on_f.color_key, "Score with the artifact-color detector");
  on->add_option("--steps", on_steps, "n_steps")->capture_default_str()->check(CLI::PositiveNumber);
  on->add_option("--erode-iters", on_erode, "erode_iters_per_step")->capture_default_str()->check(CLI::NonNegativeNumber);

  // eval-seg
  CLI::App* es = app.add_subcommand("eval-seg", "IoU / precision / recall / F-score");
  std::string es_data, es_pred, es_model, es_split, es_part = "all", es_mode = "pooled", es_out;
  bool es_key = false;
  es->add_option("--data", es_data, "Dataset root with labels")->required();
  es->add_option("--pred", es_pred, "Directory of <id>.png predicted masks");
  es->add_option("--model", es_model, "Predict with this checkpoint instead");
  es->add_flag("--color-key", es_key, "Predict with the artifact-color detector");
  es->add_option("--split", es_split, "split.json");
  es->add_option("--part", es_part, "train | val | test | all")->capture_default_str();
  es->add_option("--mode", es_mode, "pooled | per_image")
      ->capture_default_str()->check(CLI::IsMember({"pooled", "per_image"}));
  es->add_option("--out", es_out, "Optional output directory");

  // eval-corr
  CLI::App* ec = app.add_subcommand("eval-corr", "Agreement of a metric with human preference");
  std::string ec_pairs, ec_polarity, ec_out;
  ec->add_option("--pairs", ec_pairs, "JSON array or CSV of pair_id,score_a,score_b,human")->required();
  ec->add_option("--polarity", ec_polarity, "higher_better | lower_better")
      ->required()->check(CLI::IsMember({"higher_better", "lower_better"}));
  ec->add_option("--out", ec_out, "Optional output directory");

  // par-vs-holesize
  CLI::App* ph = app.add_subcommand("par-vs-holesize", "Mean PAR per hole-size bin and scene class");
  std::string ph_traces, ph_data, ph_edges = "0,0.1,0.2,0.3,1", ph_out, ph_table;
  int ph_step = 1;
  ph->add_option("--traces", ph_traces, "Trace directory written by iterfill")->required();
  ph->add_option("--data", ph_data, "Dataset root for scene classes")->required();
  ph->add_option("--edges", ph_edges, "Comma-separated hole-ratio bin edges")->capture_default_str();
  ph->add_option("--fill", ph_step, "Score the detection on this fill (1 = first)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  ph->add_option("--class-table", ph_table, "JSON category -> scene class table");
  ph->add_option("--out", ph_out, "Optional output directory");

  // serve
  CLI::App* sv = app.add_subcommand("serve", "Run the annotation HTTP service");
  std::string sv_store, sv_host = "127.0.0.1", sv_backends, sv_default;
  int sv_port = 8080, sv_lease = 30;
  std::uint64_t sv_seed = 0;
  std::vector<std::string> sv_models;
  bool sv_key = false;
  sv->add_option("--store", sv_store, "Sample store root")->required();
  sv->add_option("--host", sv_host)->capture_default_str();
  sv->add_option("--port", sv_port)->capture_default_str()->check(CLI::Range(0, 65535));
  sv->add_option("--model", sv_models, "id=checkpoint (repeatable)");
  sv->add_flag("--color-key-model", sv_key, "Register the artifact-color detector as 'color_key'");
  sv->add_option("--backends", sv_backends, "JSON file {id: {kind, iters, p, seed, command, timeout_ms}}");
  sv->add_option("--default-model", sv_default, "Model that scores refills");
  sv->add_option("--lease-minutes", sv_lease)->capture_default_str()->check(CLI::PositiveNumber);
  sv->add_option("--seed", sv_seed, "Vote-order seed");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kUsage;
  }

  try {
    if (*synth) {
      std::set<ArtifactKind> kinds;
      std::stringstream ks(synth_kinds);
      for (std::string k; std::getline(ks, k, ',');)
        if (!k.empty()) kinds.insert(parse_artifact_kind(k));
      sc.kinds = kinds;
      const std::vector<Sample> samples = synth_generate(synth_seed, synth_n, sc);
      parallel_for(samples.size(), synth_jobs, [&](std::size_t i) { persist_sample(samples[i], synth_out); });
      write_manifest(synth_out, *synth, json::array());
      emit(out, stats_to_json(dataset_stats(samples)));
      return kOk;
    }
    if (*stats) {
      const std::vector<Sample> samples = load_dataset(stats_data);
      const std::string text = stats_to_json(dataset_stats(samples));
      if (!stats_out.empty()) {
        write_text(fs::path(stats_out) / "stats.json", text);
        write_manifest(stats_out, *stats, {"stats.json"});
      }
      emit(out, text);
      return kOk;
    }
    if (*split) {
      std::vector<std::string> ids;
      if (!split_from.empty()) {
        ids = list_sample_ids(split_from);
      } else if (!split_ids.empty()) {
        std::istringstream in(read_text(split_ids));
        for (std::string line; std::getline(in, line);) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) ids.push_back(line);
        }
      } else {
        require(split_n > 0, ErrorCode::kInvalidArgument, "need --n-from, --ids or --n");
        for (int i = 0; i < split_n; ++i) {
          char buf[16];
          std::snprintf(buf, sizeof buf, "%05d", i);
          ids.push_back(buf);
        }
      }
      const SplitSpec sp = split_811(ids, split_seed);
      write_text(fs::path(split_out) / "split.json", split_to_json(sp));
      write_manifest(split_out, *split, {"split.json"});
      out << json{{"train", sp.train_ids.size()}, {"val", sp.val_ids.size()}, {"test", sp.test_ids.size()}}.dump()
          << "\n";
      return kOk;
    }
    if (*tr) {
      SegConfig cfg = tr_config.empty() ? SegConfig{} : seg_config_from_json(read_text(tr_config));
      if (tr_iters) cfg.max_iters = *tr_iters;
      if (tr_batch) cfg.batch_size = *tr_batch;
      if (tr_input) cfg.input_size = *tr_input;
      if (tr_backbone) cfg.backbone_id = *tr_backbone;
      if (tr_head) cfg.head_id = *tr_head;
      if (tr_lr) cfg.base_lr = *tr_lr;
      if (tr_aux) cfg.aux_head_weight = *tr_aux;
      if (tr_val_interval) cfg.val_interval = *tr_val_interval;
      if (tr_log_interval) cfg.log_interval = *tr_log_interval;
      if (tr_seed) cfg.seed = *tr_seed;
      if (tr_pretrain_iters) cfg.pretrain_iters = *tr_pretrain_iters;
      if (tr_hole) cfg.include_hole_channel = true;
      if (tr_no_jpeg) cfg.jpeg_aug = false;
      if (tr_no_flip) cfg.flip_prob = 0.0;
      cfg.validate();

      std::vector<Sample> all = load_dataset(tr_data);
      std::vector<std::string> ids;
      for (const auto& s : all) ids.push_back(s.id);
      const SplitSpec sp = tr_split.empty() ? split_811(ids, cfg.seed) : split_from_json(read_text(tr_split));
      fs::create_directories(tr_out);
      write_text(fs::path(tr_out) / "split.json", split_to_json(sp));
      const std::vector<Sample> train_set = select_part(all, fs::path(tr_out) / "split.json", "train");
      const std::vector<Sample> val_set = select_part(all, fs::path(tr_out) / "split.json", "val");
      TrainExtras extras;
      if (!tr_pretrain.empty()) extras.pseudo_pretrain = load_dataset(tr_pretrain);
      if (!tr_negatives.empty()) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(tr_negatives))
          if (e.path().extension() == ".png") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) extras.real_negatives.push_back(read_image(p));
      }
      const TrainResult result = train(cfg, train_set, val_set, extras, [&](const TrainLogRow& row) {
        err << "iter " << row.iter << " lr " << row.lr << " loss " << row.loss_main << " aux " << row.loss_aux;
        if (row.val_iou) err << " val_iou " << *row.val_iou;
        err << "\n";
      });
      result.model.save(fs::path(tr_out) / "model.ckpt");
      write_text(fs::path(tr_out) / "train_log.csv", train_log_csv(result.log));
      json outputs = {"model.ckpt", "train_log.csv", "seg_config.json", "split.json"};
      if (!result.pretrain_log.empty()) {
        write_text(fs::path(tr_out) / "pretrain_log.csv", train_log_csv(result.pretrain_log));
        outputs.push_back("pretrain_log.csv");
      }
      write_text(fs::path(tr_out) / "seg_config.json", seg_config_to_json(cfg));
      write_manifest(tr_out, *tr, outputs);
      json summary = {{"best_iter", result.model.best_iter()}};
      summary["best_val_iou"] = result.model.best_val_iou() ? json(*result.model.best_val_iou()) : json(nullptr);
      out << summary.dump() << "\n";
      return kOk;
    }
    if (*pr) {
      const auto det = load_detector(pr_model, pr_key);
      if (!pr_image.empty()) {
        require(pr_data.empty(), ErrorCode::kInvalidArgument, "--data and --image are exclusive");
        const Image img = read_image(pr_image);
        std::optional<Mask> hole;
        if (!pr_hole.empty()) hole = read_mask(pr_hole);
        const Mask m = det->predict(img, hole ? &*hole : nullptr);
        write_mask(fs::path(pr_out) / "artifacts.png", m);
        write_manifest(pr_out, *pr, {"artifacts.png"});
        out << (hole ? fmt(par(m, *hole)) : std::to_string(area(m))) << "\n";
        return kOk;
      }
      require(!pr_data.empty(), ErrorCode::kInvalidArgument, "need --data or --image");
      const std::vector<Sample> samples = select_part(load_dataset(pr_data), pr_split, pr_part);
      std::vector<json> rows(samples.size());
      fs::create_directories(fs::path(pr_out) / "masks");
      parallel_for(samples.size(), pr_jobs, [&](std::size_t i) {
        const Sample& s = samples[i];
        const Mask m = det->predict(s.inspected(), &s.hole);
        write_mask(fs::path(pr_out) / "masks" / (s.id + ".png"), m);
        rows[i] = {{"id", s.id}, {"artifact_area", area(m)},
                   {"par", s.hole.is_empty() ? json(nullptr) : json(par(m, s.hole))}};
      });
      const json j = rows;
      write_text(fs::path(pr_out) / "predictions.json", j.dump(2) + "\n");
      write_manifest(pr_out, *pr, {"masks/", "predictions.json"});
      out << j.dump() << "\n";
      return kOk;
    }
    if (*pa) {
      out << fmt(par(read_mask(pa_artifact), read_mask(pa_hole))) << "\n";
      return kOk;
    }
    if (*it) {
      const auto det = load_detector(it_f.model, it_f.color_key);
      return run_fill(*it, it_f, it_max, [&](const FillJob& j, const Inpainter& inp) {
        return iterative_fill(j.image, j.hole, inp, *det, it_max);
      }, out);
    }
    if (*on) {
      std::unique_ptr<ArtifactDetector> scorer;
      if (!on_f.model.empty() || on_f.color_key) scorer = load_detector(on_f.model, on_f.color_key);
      return run_fill(*on, on_f, on_steps, [&](const FillJob& j, const Inpainter& inp) {
        return onion_fill(j.image, j.hole, inp, on_steps, on_erode, scorer.get());
      }, out);
    }
    if (*es) {
      const std::vector<Sample> samples = select_part(load_dataset(es_data), es_split, es_part);
      std::unique_ptr<ArtifactDetector> det;
      if (!es_model.empty() || es_key) det = load_detector(es_model, es_key);
      require(det || !es_pred.empty(), ErrorCode::kInvalidArgument, "need --pred, --model or --color-key");
      std::vector<Mask> preds, gts;
      for (const auto& s : samples) {
        require(s.label.has_value(), ErrorCode::kPrecondition, "sample " + s.id + " has no label");
        preds.push_back(det ? det->predict(s.inspected(), &s.hole)
                            : intersect(read_mask(fs::path(es_pred) / (s.id + ".png")), s.hole));
        gts.push_back(*s.label);
      }
      ConfusionCounts pooled;
      for (std::size_t i = 0; i < preds.size(); ++i) pooled += confusion(preds[i], gts[i]);
      const Accumulation mode = es_mode == "pooled" ? Accumulation::kPooled : Accumulation::kPerImage;
      const std::string text = seg_scores_json(seg_scores(preds, gts, mode), &pooled);
      if (!es_out.empty()) {
        write_text(fs::path(es_out) / "seg_scores.json", text);
        write_manifest(es_out, *es, {"seg_scores.json"});
      }
      emit(out, text);
      return kOk;
    }
    if (*ec) {
      const CorrelationReport r = metric_correlation(read_pairs(ec_pairs), parse_polarity(ec_polarity));
      const std::string text = correlation_json(r);
      if (!ec_out.empty()) {
        write_text(fs::path(ec_out) / "correlation.json", text);
        write_text(fs::path(ec_out) / "correlation.csv", correlation_csv(r));
        write_manifest(ec_out, *ec, {"correlation.json", "correlation.csv"});
      }
      emit(out, text);
      return kOk;
    }
    if (*ph) {
      const auto table = ph_table.empty() ? default_scene_class_table() : load_scene_class_table(read_text(ph_table));
      std::vector<HoleSizeSample> rows;
      for (const auto& s : load_dataset(ph_data)) {
        const fs::path dir = fs::path(ph_traces) / s.id;
        if (!fs::exists(dir / "trace.json") || s.hole.is_empty()) continue;
        const IterFillTrace t = load_trace(dir);
        std::optional<std::string> cls = s.scene_class;
        if (auto c = s.provenance.find("category"); c != s.provenance.end()) {
          cls = scene_class_for(c->second, table);
        }
        require(cls.has_value(), ErrorCode::kValidation, "sample " + s.id + " has no scene class");
        const std::vector<IterFillTrace> one{t};
        const double p = detected_par_curve(one, ph_step).back();
        rows.push_back({s.id, *cls, static_cast<double>(area(s.hole)) / static_cast<double>(s.hole.pixel_count()), p});
      }
      require(!rows.empty(), ErrorCode::kNotFound, "no traces matched dataset samples");
      const HoleSizeReport r = par_vs_holesize(rows, parse_edges(ph_edges));
      const std::string text = holesize_json(r);
      if (!ph_out.empty()) {
        write_text(fs::path(ph_out) / "par_vs_holesize.json", text);
        write_text(fs::path(ph_out) / "par_vs_holesize.csv", holesize_csv(r));
        write_manifest(ph_out, *ph, {"par_vs_holesize.json", "par_vs_holesize.csv"});
      }
      emit(out, text);
      return kOk;
    }
    if (*sv) {
      service::ServiceConfig cfg;
      cfg.store_root = sv_store;
      cfg.lease = std::chrono::minutes(sv_lease);
      cfg.seed = sv_seed;
      cfg.default_model = sv_default;
      for (const auto& m : sv_models) {
        const auto eq = m.find('=');
        require(eq != std::string::npos && eq > 0, ErrorCode::kInvalidArgument, "--model wants id=path, got " + m);
        cfg.models[m.substr(0, eq)] = std::make_shared<SegModel>(SegModel::load(m.substr(eq + 1)));
      }
      if (sv_key) cfg.models["color_key"] = std::make_shared<ColorKeyDetector>();
      cfg.backends["toy_diffusion"] = InpainterSpec{};
      InpainterSpec oracle;
      oracle.kind = "oracle";
      cfg.backends["oracle"] = oracle;
      if (!sv_backends.empty()) {
        for (const auto& [id, b] : json::parse(read_text(sv_backends)).items()) {
          InpainterSpec spec;
          spec.kind = b.value("kind", spec.kind);
          spec.iters = b.value("iters", spec.iters);
          spec.p = b.value("p", spec.p);
          spec.seed = b.value("seed", spec.seed);
          spec.external.command = b.value("command", std::vector<std::string>{});
          spec.external.timeout = std::chrono::milliseconds(b.value("timeout_ms", 120000));
          spec.external.max_concurrent = b.value("max_concurrent", 2);
          cfg.backends[id] = spec;
        }
      }
      service::Service svc(std::move(cfg));
      httplib::Server server;
      service::mount(server, svc);
      const int port = sv_port == 0 ? server.bind_to_any_port(sv_host) : (server.bind_to_port(sv_host, sv_port) ? sv_port : -1);
      require(port > 0, ErrorCode::kIo, "cannot bind " + sv_host + ":" + std::to_string(sv_port));
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      err << json{{"listening", sv_host + ":" + std::to_string(port)}}.dump() << std::endl;
      server.listen_after_bind();
      g_server = nullptr;
      return kOk;
    }
  } catch (const Error& e) {
    print_error(err, std::string(error_code_name(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    print_error(err, "validation", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return kFailure;
  }
  return kUsage;
}

}  // namespace parkit::cli
