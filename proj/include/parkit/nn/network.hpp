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

#include <cstdint>
#include <string>
#include <vector>

#include "parkit/nn/tensor.hpp"

namespace parkit::nn {

// Encoder with two stride-2 stages, an auxiliary FCN head on the half-
// resolution features, and a pyramid-pooling head on the quarter-resolution
// features. Both heads emit two-class logits at input resolution.
struct Architecture {
  int in_channels = 3;
  int stem = 16;
  int mid = 32;
  int deep = 48;
  int aux_hidden = 16;
  int fuse = 32;
  std::vector<int> pyramid_bins = {1, 2, 4, 8};  // empty = plain FCN head
  int pyramid_channels = 12;

  static Architecture small(int in_channels);
  static Architecture medium(int in_channels);

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class Mode { kInference, kTraining };

// Every 3x3 conv except the classifiers is followed by batch norm and ReLU.
template <typename T>
class SegNet {
 public:
  struct Activations {
    Tensor<T> input, a1, a2, a3, a4, a5;
    Tensor<T> aux_hidden, aux_low;
    std::vector<Tensor<T>> pooled, pyramid, pyramid_up;
    Tensor<T> concat, fused, main_low;
    typename BatchNorm2d<T>::Cache bn[7];
  };

  struct Output {
    Tensor<T> main;
    Tensor<T> aux;
  };

  SegNet(const Architecture& arch, std::uint64_t seed);

  // Training mode normalizes with batch statistics. Pass `acts` to keep
  // what backward needs.
  Output forward(const Tensor<T>& x, Mode mode = Mode::kInference, Activations* acts = nullptr) const;
  void backward(const Activations& acts, const Tensor<T>& d_main, const Tensor<T>& d_aux);
  // Folds the batch statistics of a training forward into the running ones.
  void update_running_stats(const Activations& acts);

  std::vector<Param<T>*> params();
  std::vector<const Param<T>*> params() const;
  // Non-trainable state (running statistics), in a fixed order.
  std::vector<Buffer<T>*> buffers();
  std::vector<const Buffer<T>*> buffers() const;
  void zero_grad();
  std::size_t parameter_count() const;

  const Architecture& arch() const { return arch_; }

 private:
  Architecture arch_;
  Conv2d<T> c1_, c2_, c3_, c4_, c5_;
  Conv2d<T> aux1_, aux2_;
  std::vector<Conv2d<T>> pyramid_;
  Conv2d<T> fuse_, cls_;
  // c1..c5, aux1, fuse
  BatchNorm2d<T> bn_[7];
};

}  // namespace parkit::nn
