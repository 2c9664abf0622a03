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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parkit/image.hpp"
#include "parkit/mask.hpp"

namespace parkit {

// Base for every fill backend. fill() owns validation and compositing, so
// a backend can never touch pixels outside the hole.
class Inpainter {
 public:
  virtual ~Inpainter() = default;

  // Output equals `image` bit-exactly wherever hole = 0. An empty hole
  // returns the input unchanged without calling the backend.
  Image fill(const Image& image, const Mask& hole) const;

  virtual std::string kind() const = 0;

 protected:
  // Backend output; only its hole pixels are kept. Must match image size.
  virtual Image generate(const Image& image, const Mask& hole) const = 0;
};

// Jacobi iterations of 4-neighbor averaging with the outside pixels held
// fixed. Hole pixels start at the per-channel mean of the boundary ring.
Image toy_diffusion_fill(const Image& image, const Mask& hole, int iters = 400);

class ToyDiffusionInpainter final : public Inpainter {
 public:
  explicit ToyDiffusionInpainter(int iters = 400);
  std::string kind() const override { return "toy_diffusion"; }
  int iters() const { return iters_; }

 protected:
  Image generate(const Image& image, const Mask& hole) const override;

 private:
  int iters_;
};

// Each hole pixel takes the truth value with probability p, otherwise
// kMagenta. The draw for a pixel depends only on (seed, hole, pixel index),
// so refilling a different hole gives fresh independent draws.
Image oracle_fill(const Image& image, const Mask& hole, const Image& truth, double p,
                  std::uint64_t seed);

class OracleInpainter final : public Inpainter {
 public:
  OracleInpainter(double p, std::uint64_t seed, Image truth);
  std::string kind() const override { return "oracle"; }

 protected:
  Image generate(const Image& image, const Mask& hole) const override;

 private:
  double p_;
  std::uint64_t seed_;
  Image truth_;
};

struct ExternalCommandConfig {
  // argv prefix; the adapter appends --image <in> --mask <mask> --out <out>.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{120000};
  int max_concurrent = 2;
  // Scratch files go here; defaults to the system temp directory.
  std::optional<std::filesystem::path> scratch_dir;
};

class ExternalCommandInpainter final : public Inpainter {
 public:
  explicit ExternalCommandInpainter(ExternalCommandConfig config);
  ~ExternalCommandInpainter() override;
  std::string kind() const override { return "external_command"; }

 protected:
  Image generate(const Image& image, const Mask& hole) const override;

 private:
  struct Pool;
  ExternalCommandConfig config_;
  std::unique_ptr<Pool> pool_;
};

// Named backend description used by the CLI and the service.
struct InpainterSpec {
  std::string kind = "toy_diffusion";  // toy_diffusion | oracle | external_command
  int iters = 400;
  double p = 0.5;
  std::uint64_t seed = 0;
  ExternalCommandConfig external;
};

// The oracle kind needs `truth`.
std::unique_ptr<Inpainter> make_inpainter(const InpainterSpec& spec,
                                          std::optional<Image> truth = std::nullopt);

}  // namespace parkit
