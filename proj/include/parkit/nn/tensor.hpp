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

// Minimal CPU tensor ops with hand-written backward passes. Layout is NCHW,
// contiguous. Templated on the scalar so gradient checks can run in double.

#pragma once

#include <cstddef>
#include <cstdint>
#include <new>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

namespace parkit::nn {

// Fixed 64-byte alignment keeps vectorized kernels on the same code path
// for every allocation, so results are bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

template <typename T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  Buffer<T> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_), v(size_of(n_, c_, h_, w_)) {}

  static std::size_t size_of(int n, int c, int h, int w) {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t image_stride() const { return static_cast<std::size_t>(c) * h * w; }

  T& at(int ni, int ci, int y, int x) {
    return v[((static_cast<std::size_t>(ni) * c + ci) * h + y) * w + x];
  }
  T at(int ni, int ci, int y, int x) const {
    return v[((static_cast<std::size_t>(ni) * c + ci) * h + y) * w + x];
  }
  T* image(int ni) { return v.data() + ni * image_stride(); }
  const T* image(int ni) const { return v.data() + ni * image_stride(); }
};

template <typename T>
struct Param {
  Buffer<T> value;
  Buffer<T> grad;
  Buffer<T> velocity;

  explicit Param(std::size_t size = 0) : value(size), grad(size), velocity(size) {}
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// Square-kernel convolution with bias, stride and zero padding.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);

  void init_he(std::mt19937_64& rng);
  void init_normal(std::mt19937_64& rng, double stddev);

  int out_size(int in) const { return (in + 2 * padding_ - kernel_) / stride_ + 1; }
  Tensor<T> forward(const Tensor<T>& x) const;
  // Accumulates parameter gradients; returns dL/dx.
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& dy);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

  Param<T> weight;  // [out][in][k][k]
  Param<T> bias;    // [out]

 private:
  void im2col(const T* x, int h, int w, T* col) const;
  void col2im(const T* col, int h, int w, T* dx) const;

  int in_ = 0;
  int out_ = 0;
  int kernel_ = 1;
  int stride_ = 1;
  int padding_ = 0;
};

// Per-channel batch normalization with learned scale and shift.
template <typename T>
class BatchNorm2d {
 public:
  struct Cache {
    Buffer<T> mean;
    Buffer<T> var;
    Buffer<T> inv_std;
    Tensor<T> xhat;
  };

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5);

  // Normalizes with the batch statistics and records them in `cache`.
  Tensor<T> forward_train(const Tensor<T>& x, Cache& cache) const;
  // Normalizes with the running statistics.
  Tensor<T> forward_eval(const Tensor<T>& x) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);
  void update_running(const Cache& cache);

  Param<T> gamma;
  Param<T> beta;
  Buffer<T> running_mean;
  Buffer<T> running_var;

 private:
  int channels_ = 0;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
};

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
// dy masked by y > 0, where y is the forward output.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy);

// Adaptive average pooling to bins x bins cells.
template <typename T>
Tensor<T> adaptive_avg_pool(const Tensor<T>& x, int bins);
template <typename T>
Tensor<T> adaptive_avg_pool_backward(const Tensor<T>& dy, int in_h, int in_w);

// Bilinear resize with half-pixel centers (no corner alignment).
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int out_h, int out_w);
template <typename T>
Tensor<T> resize_bilinear_backward(const Tensor<T>& dy, int in_h, int in_w);

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts);
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& dy, std::span<const int> channels);

// Mean two-class cross-entropy over all pixels; targets hold 0/1 per pixel
// in NHW order. Writes dL/dlogits scaled by `weight` into grad when non-null.
template <typename T>
double softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::uint8_t> targets,
                             double weight, std::type_identity_t<Tensor<T>>* grad);

}  // namespace parkit::nn
