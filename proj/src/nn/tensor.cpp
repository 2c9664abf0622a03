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

#include "parkit/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "parkit/error.hpp"

namespace parkit::nn {
namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

}  // namespace

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : weight(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel),
      bias(static_cast<std::size_t>(out_channels)),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding) {}

template <typename T>
void Conv2d<T>::init_he(std::mt19937_64& rng) {
  init_normal(rng, std::sqrt(2.0 / (static_cast<double>(in_) * kernel_ * kernel_)));
}

template <typename T>
void Conv2d<T>::init_normal(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& w : weight.value) w = static_cast<T>(dist(rng));
  std::fill(bias.value.begin(), bias.value.end(), T(0));
}

template <typename T>
void Conv2d<T>::im2col(const T* x, int h, int w, T* col) const {
  const int oh = out_size(h);
  const int ow = out_size(w);
  const std::size_t cols = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < in_; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < kernel_; ++ky) {
      for (int kx = 0; kx < kernel_; ++kx) {
        T* row = col + (static_cast<std::size_t>((c * kernel_ + ky) * kernel_ + kx)) * cols;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride_ - padding_ + ky;
          T* dst = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, T(0));
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride_ - padding_ + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void Conv2d<T>::col2im(const T* col, int h, int w, T* dx) const {
  const int oh = out_size(h);
  const int ow = out_size(w);
  const std::size_t cols = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < in_; ++c) {
    T* dxc = dx + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < kernel_; ++ky) {
      for (int kx = 0; kx < kernel_; ++kx) {
        const T* row = col + (static_cast<std::size_t>((c * kernel_ + ky) * kernel_ + kx)) * cols;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride_ - padding_ + ky;
          if (iy < 0 || iy >= h) continue;
          const T* src = row + static_cast<std::size_t>(oy) * ow;
          T* dst = dxc + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride_ - padding_ + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) const {
  require(x.c == in_, ErrorCode::kShapeMismatch, "conv input channel mismatch");
  const int oh = out_size(x.h);
  const int ow = out_size(x.w);
  Tensor<T> y(x.n, out_, oh, ow);
  const int k = in_ * kernel_ * kernel_;
  const int p = oh * ow;
  const bool pointwise = kernel_ == 1 && stride_ == 1 && padding_ == 0;
  Buffer<T> col(pointwise ? 0 : static_cast<std::size_t>(k) * p);
  CMapRM<T> wmat(weight.value.data(), out_, k);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bias.value.data(), out_);
  for (int ni = 0; ni < x.n; ++ni) {
    const T* src = x.image(ni);
    if (!pointwise) {
      im2col(src, x.h, x.w, col.data());
      src = col.data();
    }
    MapRM<T> out(y.image(ni), out_, p);
    out.noalias() = wmat * CMapRM<T>(src, k, p);
    out.colwise() += bvec;
  }
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& x, const Tensor<T>& dy) {
  const int oh = out_size(x.h);
  const int ow = out_size(x.w);
  require(dy.c == out_ && dy.h == oh && dy.w == ow && dy.n == x.n, ErrorCode::kShapeMismatch,
          "conv backward shape mismatch");
  Tensor<T> dx(x.n, x.c, x.h, x.w);
  const int k = in_ * kernel_ * kernel_;
  const int p = oh * ow;
  const bool pointwise = kernel_ == 1 && stride_ == 1 && padding_ == 0;
  Buffer<T> col(pointwise ? 0 : static_cast<std::size_t>(k) * p);
  Buffer<T> dcol(pointwise ? 0 : static_cast<std::size_t>(k) * p);
  CMapRM<T> wmat(weight.value.data(), out_, k);
  MapRM<T> dw(weight.grad.data(), out_, k);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias.grad.data(), out_);
  for (int ni = 0; ni < x.n; ++ni) {
    const T* src = x.image(ni);
    if (!pointwise) {
      im2col(src, x.h, x.w, col.data());
      src = col.data();
    }
    CMapRM<T> g(dy.image(ni), out_, p);
    dw.noalias() += g * CMapRM<T>(src, k, p).transpose();
    db += g.rowwise().sum();
    if (pointwise) {
      MapRM<T>(dx.image(ni), k, p).noalias() = wmat.transpose() * g;
    } else {
      MapRM<T>(dcol.data(), k, p).noalias() = wmat.transpose() * g;
      col2im(dcol.data(), x.h, x.w, dx.image(ni));
    }
  }
  return dx;
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels, double momentum, double eps)
    : gamma(static_cast<std::size_t>(channels)),
      beta(static_cast<std::size_t>(channels)),
      running_mean(static_cast<std::size_t>(channels), T(0)),
      running_var(static_cast<std::size_t>(channels), T(1)),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {
  require(channels > 0, ErrorCode::kInvalidArgument, "BatchNorm2d needs channels > 0");
  std::fill(gamma.value.begin(), gamma.value.end(), T(1));
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward_train(const Tensor<T>& x, Cache& cache) const {
  require(x.c == channels_, ErrorCode::kShapeMismatch, "BatchNorm2d channel mismatch");
  const std::size_t plane = x.plane();
  const double count = static_cast<double>(plane) * x.n;
  cache.mean.assign(channels_, T(0));
  cache.var.assign(channels_, T(0));
  cache.inv_std.assign(channels_, T(0));
  cache.xhat = Tensor<T>(x.n, x.c, x.h, x.w);
  Tensor<T> y(x.n, x.c, x.h, x.w);
  for (int c = 0; c < channels_; ++c) {
    double sum = 0, sq = 0;
    for (int n = 0; n < x.n; ++n) {
      const T* p = x.image(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    }
    const double mean = sum / count;
    for (int n = 0; n < x.n; ++n) {
      const T* p = x.image(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
    }
    const double var = sq / count;
    const double inv = 1.0 / std::sqrt(var + eps_);
    cache.mean[c] = static_cast<T>(mean);
    cache.var[c] = static_cast<T>(var);
    cache.inv_std[c] = static_cast<T>(inv);
    const T g = gamma.value[c], b = beta.value[c];
    for (int n = 0; n < x.n; ++n) {
      const T* p = x.image(n) + c * plane;
      T* h = cache.xhat.image(n) + c * plane;
      T* q = y.image(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        h[i] = static_cast<T>((p[i] - mean) * inv);
        q[i] = g * h[i] + b;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward_eval(const Tensor<T>& x) const {
  require(x.c == channels_, ErrorCode::kShapeMismatch, "BatchNorm2d channel mismatch");
  const std::size_t plane = x.plane();
  Tensor<T> y(x.n, x.c, x.h, x.w);
  for (int c = 0; c < channels_; ++c) {
    const T scale = static_cast<T>(gamma.value[c] / std::sqrt(running_var[c] + eps_));
    const T shift = beta.value[c] - scale * running_mean[c];
    for (int n = 0; n < x.n; ++n) {
      const T* p = x.image(n) + c * plane;
      T* q = y.image(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) q[i] = scale * p[i] + shift;
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const std::size_t plane = dy.plane();
  const double count = static_cast<double>(plane) * dy.n;
  Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0, sum_dy_xhat = 0;
    for (int n = 0; n < dy.n; ++n) {
      const T* g = dy.image(n) + c * plane;
      const T* h = cache.xhat.image(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += g[i];
        sum_dy_xhat += g[i] * h[i];
      }
    }
    gamma.grad[c] += static_cast<T>(sum_dy_xhat);
    beta.grad[c] += static_cast<T>(sum_dy);
    const double k = gamma.value[c] * cache.inv_std[c];
    const double m_dy = sum_dy / count, m_dyh = sum_dy_xhat / count;
    for (int n = 0; n < dy.n; ++n) {
      const T* g = dy.image(n) + c * plane;
      const T* h = cache.xhat.image(n) + c * plane;
      T* d = dx.image(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) d[i] = static_cast<T>(k * (g[i] - m_dy - h[i] * m_dyh));
    }
  }
  return dx;
}

template <typename T>
void BatchNorm2d<T>::update_running(const Cache& cache) {
  const T m = static_cast<T>(momentum_);
  for (int c = 0; c < channels_; ++c) {
    running_mean[c] = (1 - m) * running_mean[c] + m * cache.mean[c];
    running_var[c] = (1 - m) * running_var[c] + m * cache.var[c];
  }
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.v) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (!(y.v[i] > T(0))) dx.v[i] = T(0);
  }
  return dx;
}

namespace {

inline int bin_start(int i, int bins, int size) { return (i * size) / bins; }
inline int bin_end(int i, int bins, int size) { return ((i + 1) * size + bins - 1) / bins; }

}  // namespace

template <typename T>
Tensor<T> adaptive_avg_pool(const Tensor<T>& x, int bins) {
  Tensor<T> y(x.n, x.c, bins, bins);
  for (int ni = 0; ni < x.n; ++ni) {
    for (int c = 0; c < x.c; ++c) {
      for (int by = 0; by < bins; ++by) {
        const int y0 = bin_start(by, bins, x.h), y1 = bin_end(by, bins, x.h);
        for (int bx = 0; bx < bins; ++bx) {
          const int x0 = bin_start(bx, bins, x.w), x1 = bin_end(bx, bins, x.w);
          T sum = 0;
          for (int yy = y0; yy < y1; ++yy)
            for (int xx = x0; xx < x1; ++xx) sum += x.at(ni, c, yy, xx);
          y.at(ni, c, by, bx) = sum / static_cast<T>((y1 - y0) * (x1 - x0));
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> adaptive_avg_pool_backward(const Tensor<T>& dy, int in_h, int in_w) {
  const int bins = dy.h;
  Tensor<T> dx(dy.n, dy.c, in_h, in_w);
  for (int ni = 0; ni < dy.n; ++ni) {
    for (int c = 0; c < dy.c; ++c) {
      for (int by = 0; by < bins; ++by) {
        const int y0 = bin_start(by, bins, in_h), y1 = bin_end(by, bins, in_h);
        for (int bx = 0; bx < bins; ++bx) {
          const int x0 = bin_start(bx, bins, in_w), x1 = bin_end(bx, bins, in_w);
          const T g = dy.at(ni, c, by, bx) / static_cast<T>((y1 - y0) * (x1 - x0));
          for (int yy = y0; yy < y1; ++yy)
            for (int xx = x0; xx < x1; ++xx) dx.at(ni, c, yy, xx) += g;
        }
      }
    }
  }
  return dx;
}

namespace {

struct Taps {
  std::vector<int> i0;
  std::vector<int> i1;
  std::vector<double> frac;
};

Taps bilinear_taps(int in, int out) {
  Taps t;
  t.i0.resize(out);
  t.i1.resize(out);
  t.frac.resize(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0) src = 0;
    int i0 = static_cast<int>(src);
    if (i0 > in - 1) i0 = in - 1;
    t.i0[o] = i0;
    t.i1[o] = std::min(i0 + 1, in - 1);
    t.frac[o] = src - i0;
  }
  return t;
}

}  // namespace

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int out_h, int out_w) {
  if (x.h == out_h && x.w == out_w) return x;
  const Taps ty = bilinear_taps(x.h, out_h);
  const Taps tx = bilinear_taps(x.w, out_w);
  Tensor<T> y(x.n, x.c, out_h, out_w);
  for (int ni = 0; ni < x.n; ++ni) {
    for (int c = 0; c < x.c; ++c) {
      const T* src = x.image(ni) + static_cast<std::size_t>(c) * x.plane();
      T* dst = y.image(ni) + static_cast<std::size_t>(c) * y.plane();
      for (int oy = 0; oy < out_h; ++oy) {
        const T fy = static_cast<T>(ty.frac[oy]);
        const T* r0 = src + static_cast<std::size_t>(ty.i0[oy]) * x.w;
        const T* r1 = src + static_cast<std::size_t>(ty.i1[oy]) * x.w;
        for (int ox = 0; ox < out_w; ++ox) {
          const T fx = static_cast<T>(tx.frac[ox]);
          const int a = tx.i0[ox], b = tx.i1[ox];
          dst[static_cast<std::size_t>(oy) * out_w + ox] =
              (1 - fy) * ((1 - fx) * r0[a] + fx * r0[b]) + fy * ((1 - fx) * r1[a] + fx * r1[b]);
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> resize_bilinear_backward(const Tensor<T>& dy, int in_h, int in_w) {
  if (dy.h == in_h && dy.w == in_w) return dy;
  const Taps ty = bilinear_taps(in_h, dy.h);
  const Taps tx = bilinear_taps(in_w, dy.w);
  Tensor<T> dx(dy.n, dy.c, in_h, in_w);
  for (int ni = 0; ni < dy.n; ++ni) {
    for (int c = 0; c < dy.c; ++c) {
      const T* src = dy.image(ni) + static_cast<std::size_t>(c) * dy.plane();
      T* dst = dx.image(ni) + static_cast<std::size_t>(c) * dx.plane();
      for (int oy = 0; oy < dy.h; ++oy) {
        const T fy = static_cast<T>(ty.frac[oy]);
        T* r0 = dst + static_cast<std::size_t>(ty.i0[oy]) * in_w;
        T* r1 = dst + static_cast<std::size_t>(ty.i1[oy]) * in_w;
        for (int ox = 0; ox < dy.w; ++ox) {
          const T fx = static_cast<T>(tx.frac[ox]);
          const int a = tx.i0[ox], b = tx.i1[ox];
          const T g = src[static_cast<std::size_t>(oy) * dy.w + ox];
          r0[a] += (1 - fy) * (1 - fx) * g;
          r0[b] += (1 - fy) * fx * g;
          r1[a] += fy * (1 - fx) * g;
          r1[b] += fy * fx * g;
        }
      }
    }
  }
  return dx;
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  const auto& first = *parts[0];
  int channels = 0;
  for (const auto* p : parts) {
    require(p->n == first.n && p->h == first.h && p->w == first.w, ErrorCode::kShapeMismatch,
            "concat shape mismatch");
    channels += p->c;
  }
  Tensor<T> y(first.n, channels, first.h, first.w);
  for (int ni = 0; ni < first.n; ++ni) {
    T* dst = y.image(ni);
    for (const auto* p : parts) {
      const T* src = p->image(ni);
      dst = std::copy(src, src + p->image_stride(), dst);
    }
  }
  return y;
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& dy, std::span<const int> channels) {
  std::vector<Tensor<T>> out;
  for (int c : channels) out.emplace_back(dy.n, c, dy.h, dy.w);
  for (int ni = 0; ni < dy.n; ++ni) {
    const T* src = dy.image(ni);
    for (auto& part : out) {
      std::copy(src, src + part.image_stride(), part.image(ni));
      src += part.image_stride();
    }
  }
  return out;
}

template <typename T>
double softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::uint8_t> targets,
                             double weight, std::type_identity_t<Tensor<T>>* grad) {
  require(logits.c == 2, ErrorCode::kShapeMismatch, "cross entropy expects two classes");
  const std::size_t plane = logits.plane();
  require(targets.size() == plane * logits.n, ErrorCode::kShapeMismatch,
          "target size does not match logits");
  if (grad) *grad = Tensor<T>(logits.n, 2, logits.h, logits.w);
  const double inv = 1.0 / static_cast<double>(targets.size());
  double total = 0.0;
  for (int ni = 0; ni < logits.n; ++ni) {
    const T* l0 = logits.image(ni);
    const T* l1 = l0 + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const double a = l0[i], b = l1[i];
      const double m = std::max(a, b);
      const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
      const int t = targets[ni * plane + i];
      total += lse - (t ? b : a);
      if (grad) {
        const double p1 = std::exp(b - lse);
        T* g0 = grad->image(ni);
        g0[i] = static_cast<T>(weight * inv * ((1.0 - p1) - (t == 0 ? 1.0 : 0.0)));
        g0[plane + i] = static_cast<T>(weight * inv * (p1 - (t == 1 ? 1.0 : 0.0)));
      }
    }
  }
  return total * inv;
}

#define PARKIT_INSTANTIATE(T)                                                              \
  template class Conv2d<T>;                                                                \
  template class BatchNorm2d<T>;                                                           \
  template Tensor<T> relu(const Tensor<T>&);                                               \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> adaptive_avg_pool(const Tensor<T>&, int);                             \
  template Tensor<T> adaptive_avg_pool_backward(const Tensor<T>&, int, int);               \
  template Tensor<T> resize_bilinear(const Tensor<T>&, int, int);                          \
  template Tensor<T> resize_bilinear_backward(const Tensor<T>&, int, int);                 \
  template Tensor<T> concat_channels(std::span<const Tensor<T>* const>);                  \
  template std::vector<Tensor<T>> split_channels(const Tensor<T>&, std::span<const int>); \
  template double softmax_cross_entropy(const Tensor<T>&, std::span<const std::uint8_t>,  \
                                        double, Tensor<T>*);

PARKIT_INSTANTIATE(float)
PARKIT_INSTANTIATE(double)

#undef PARKIT_INSTANTIATE

}  // namespace parkit::nn
