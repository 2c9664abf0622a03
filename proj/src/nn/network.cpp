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

#include "parkit/nn/network.hpp"

#include "parkit/error.hpp"

namespace parkit::nn {

Architecture Architecture::small(int in_channels) {
  Architecture a;
  a.in_channels = in_channels;
  return a;
}

Architecture Architecture::medium(int in_channels) {
  Architecture a;
  a.in_channels = in_channels;
  a.stem = 24;
  a.mid = 48;
  a.deep = 64;
  a.aux_hidden = 24;
  a.fuse = 48;
  a.pyramid_channels = 16;
  return a;
}

template <typename T>
SegNet<T>::SegNet(const Architecture& arch, std::uint64_t seed)
    : arch_(arch),
      c1_(arch.in_channels, arch.stem, 3, 1, 1),
      c2_(arch.stem, arch.mid, 3, 2, 1),
      c3_(arch.mid, arch.mid, 3, 1, 1),
      c4_(arch.mid, arch.deep, 3, 2, 1),
      c5_(arch.deep, arch.deep, 3, 1, 1),
      aux1_(arch.mid, arch.aux_hidden, 3, 1, 1),
      aux2_(arch.aux_hidden, 2, 1, 1, 0),
      fuse_(arch.deep + arch.pyramid_channels * static_cast<int>(arch.pyramid_bins.size()),
            arch.fuse, 3, 1, 1),
      cls_(arch.fuse, 2, 1, 1, 0),
      bn_{BatchNorm2d<T>(arch.stem), BatchNorm2d<T>(arch.mid), BatchNorm2d<T>(arch.mid),
          BatchNorm2d<T>(arch.deep), BatchNorm2d<T>(arch.deep), BatchNorm2d<T>(arch.aux_hidden),
          BatchNorm2d<T>(arch.fuse)} {
  for (std::size_t i = 0; i < arch.pyramid_bins.size(); ++i) {
    pyramid_.emplace_back(arch.deep, arch.pyramid_channels, 1, 1, 0);
  }
  std::mt19937_64 rng(seed);
  for (auto* conv : {&c1_, &c2_, &c3_, &c4_, &c5_, &aux1_, &fuse_}) conv->init_he(rng);
  for (auto& conv : pyramid_) conv.init_he(rng);
  aux2_.init_normal(rng, 0.01);
  cls_.init_normal(rng, 0.01);
}

template <typename T>
typename SegNet<T>::Output SegNet<T>::forward(const Tensor<T>& x, Mode mode, Activations* acts) const {
  require(x.c == arch_.in_channels, ErrorCode::kShapeMismatch, "network input channel mismatch");
  Activations local;
  Activations& a = acts ? *acts : local;
  auto block = [&](const Conv2d<T>& conv, int i, const Tensor<T>& in) {
    const Tensor<T> z = conv.forward(in);
    return relu(mode == Mode::kTraining ? bn_[i].forward_train(z, a.bn[i]) : bn_[i].forward_eval(z));
  };
  a.input = x;
  a.a1 = block(c1_, 0, x);
  a.a2 = block(c2_, 1, a.a1);
  a.a3 = block(c3_, 2, a.a2);
  a.a4 = block(c4_, 3, a.a3);
  a.a5 = block(c5_, 4, a.a4);

  a.aux_hidden = block(aux1_, 5, a.a3);
  a.aux_low = aux2_.forward(a.aux_hidden);

  a.pooled.clear();
  a.pyramid.clear();
  a.pyramid_up.clear();
  std::vector<const Tensor<T>*> parts = {&a.a5};
  for (std::size_t i = 0; i < pyramid_.size(); ++i) {
    a.pooled.push_back(adaptive_avg_pool(a.a5, arch_.pyramid_bins[i]));
    a.pyramid.push_back(relu(pyramid_[i].forward(a.pooled.back())));
    a.pyramid_up.push_back(resize_bilinear(a.pyramid.back(), a.a5.h, a.a5.w));
  }
  for (const auto& t : a.pyramid_up) parts.push_back(&t);
  a.concat = concat_channels<T>(parts);
  a.fused = block(fuse_, 6, a.concat);
  a.main_low = cls_.forward(a.fused);

  Output out;
  out.main = resize_bilinear(a.main_low, x.h, x.w);
  out.aux = resize_bilinear(a.aux_low, x.h, x.w);
  return out;
}

template <typename T>
void SegNet<T>::backward(const Activations& a, const Tensor<T>& d_main, const Tensor<T>& d_aux) {
  auto block = [&](Conv2d<T>& conv, int i, const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& g) {
    return conv.backward(in, bn_[i].backward(a.bn[i], relu_backward(out, g)));
  };
  Tensor<T> g = resize_bilinear_backward(d_main, a.main_low.h, a.main_low.w);
  g = cls_.backward(a.fused, g);
  g = block(fuse_, 6, a.concat, a.fused, g);

  std::vector<int> channels = {a.a5.c};
  for (const auto& t : a.pyramid_up) channels.push_back(t.c);
  auto pieces = split_channels(g, channels);
  Tensor<T> d_deep = std::move(pieces[0]);
  for (std::size_t i = 0; i < pyramid_.size(); ++i) {
    Tensor<T> gp = resize_bilinear_backward(pieces[i + 1], a.pyramid[i].h, a.pyramid[i].w);
    gp = pyramid_[i].backward(a.pooled[i], relu_backward(a.pyramid[i], gp));
    Tensor<T> back = adaptive_avg_pool_backward(gp, a.a5.h, a.a5.w);
    for (std::size_t j = 0; j < d_deep.v.size(); ++j) d_deep.v[j] += back.v[j];
  }

  g = block(c5_, 4, a.a4, a.a5, d_deep);
  Tensor<T> d_mid = block(c4_, 3, a.a3, a.a4, g);

  Tensor<T> ga = resize_bilinear_backward(d_aux, a.aux_low.h, a.aux_low.w);
  ga = aux2_.backward(a.aux_hidden, ga);
  ga = block(aux1_, 5, a.a3, a.aux_hidden, ga);
  for (std::size_t j = 0; j < d_mid.v.size(); ++j) d_mid.v[j] += ga.v[j];

  g = block(c3_, 2, a.a2, a.a3, d_mid);
  g = block(c2_, 1, a.a1, a.a2, g);
  block(c1_, 0, a.input, a.a1, g);
}

template <typename T>
void SegNet<T>::update_running_stats(const Activations& acts) {
  for (int i = 0; i < 7; ++i) bn_[i].update_running(acts.bn[i]);
}

template <typename T>
std::vector<Param<T>*> SegNet<T>::params() {
  std::vector<Param<T>*> out;
  auto add = [&out](Conv2d<T>& c) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  };
  for (auto* c : {&c1_, &c2_, &c3_, &c4_, &c5_, &aux1_, &aux2_}) add(*c);
  for (auto& c : pyramid_) add(c);
  add(fuse_);
  add(cls_);
  for (auto& bn : bn_) {
    out.push_back(&bn.gamma);
    out.push_back(&bn.beta);
  }
  return out;
}

template <typename T>
std::vector<Buffer<T>*> SegNet<T>::buffers() {
  std::vector<Buffer<T>*> out;
  for (auto& bn : bn_) {
    out.push_back(&bn.running_mean);
    out.push_back(&bn.running_var);
  }
  return out;
}

template <typename T>
std::vector<const Buffer<T>*> SegNet<T>::buffers() const {
  auto mut = const_cast<SegNet<T>*>(this)->buffers();
  return std::vector<const Buffer<T>*>(mut.begin(), mut.end());
}

template <typename T>
std::vector<const Param<T>*> SegNet<T>::params() const {
  auto mut = const_cast<SegNet<T>*>(this)->params();
  return std::vector<const Param<T>*>(mut.begin(), mut.end());
}

template <typename T>
void SegNet<T>::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

template <typename T>
std::size_t SegNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : params()) n += p->size();
  return n;
}

template class SegNet<float>;
template class SegNet<double>;

}  // namespace parkit::nn
