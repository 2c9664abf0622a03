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

#include "parkit/image.hpp"
#include "parkit/mask.hpp"

namespace parkit {

// Anything that maps a filled image to a binary artifact mask. Implementations
// must be safe for concurrent calls.
class ArtifactDetector {
 public:
  virtual ~ArtifactDetector() = default;

  // `hole` may be null. Models that take the hole as an input channel read
  // it; the result is not yet clipped to it.
  virtual Mask detect(const Image& image, const Mask* hole) const = 0;

  // Shape-checked detect(), unclipped.
  Mask predict_raw(const Image& image, const Mask* hole = nullptr) const;
  // predict_raw() restricted to `hole` when one is given.
  Mask predict(const Image& image, const Mask* hole = nullptr) const;
};

// Flags exactly the pixels painted with a key color. Pairs with the oracle
// inpainter, which paints unrestored pixels magenta.
class ColorKeyDetector final : public ArtifactDetector {
 public:
  explicit ColorKeyDetector(Rgb key = kMagenta) : key_(key) {}
  Mask detect(const Image& image, const Mask* hole) const override;

 private:
  Rgb key_;
};

// Always returns the same mask (or nothing); handy for wiring tests.
class FixedMaskDetector final : public ArtifactDetector {
 public:
  explicit FixedMaskDetector(Mask mask) : mask_(std::move(mask)) {}
  Mask detect(const Image& image, const Mask* hole) const override;

 private:
  Mask mask_;
};

}  // namespace parkit
