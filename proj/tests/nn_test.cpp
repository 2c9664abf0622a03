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

#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "parkit/nn/network.hpp"
#include "parkit/nn/tensor.hpp"

namespace parkit::nn {
namespace {

template <typename T>
Tensor<T> random_tensor(std::mt19937_64& rng, int n, int c, int h, int w) {
  Tensor<T> t(n, c, h, w);
  std::normal_distribution<double> d(0.0, 1.0);
  for (auto& v : t.v) v = static_cast<T>(d(rng));
  return t;
}

std::vector<std::uint8_t> random_targets(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> t(n);
  for (auto& v : t) v = static_cast<std::uint8_t>(rng() % 2);
  return t;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1e-7, std::abs(a) + std::abs(b));
}

Architecture tiny_arch() {
  Architecture a;
  a.in_channels = 3;
  a.stem = 3;
  a.mid = 4;
  a.deep = 5;
  a.aux_hidden = 3;
  a.fuse = 4;
  a.pyramid_bins = {1, 2, 3};
  a.pyramid_channels = 2;
  return a;
}

double compound_loss(const SegNet<double>& net, const Tensor<double>& x,
                     const std::vector<std::uint8_t>& t) {
  auto out = net.forward(x, Mode::kTraining);
  return softmax_cross_entropy(out.main, t, 1.0, nullptr) +
         0.4 * softmax_cross_entropy(out.aux, t, 0.4, nullptr);
}

TEST(NetworkGradientTest, CompoundLossMatchesFiniteDifferences) {
  std::mt19937_64 rng(2024);
  SegNet<double> net(tiny_arch(), 77);
  // Shift biases so few units sit on the ReLU kink.
  for (auto* p : net.params())
    for (auto& v : p->value) v += 0.05;
  Tensor<double> x = random_tensor<double>(rng, 2, 3, 12, 10);
  auto targets = random_targets(rng, 2u * 12 * 10);

  net.zero_grad();
  SegNet<double>::Activations acts;
  auto out = net.forward(x, Mode::kTraining, &acts);
  Tensor<double> gm, ga;
  softmax_cross_entropy(out.main, targets, 1.0, &gm);
  softmax_cross_entropy(out.aux, targets, 0.4, &ga);
  net.backward(acts, gm, ga);

  const double eps = 1e-5;
  int checked = 0;
  double worst = 0.0;
  for (auto* p : net.params()) {
    for (std::size_t i = 0; i < p->size(); i += 1 + p->size() / 6) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = compound_loss(net, x, targets);
      p->value[i] = saved - eps;
      const double down = compound_loss(net, x, targets);
      p->value[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      if (std::abs(numeric) < 1e-9 && std::abs(p->grad[i]) < 1e-9) continue;
      worst = std::max(worst, relative_error(numeric, p->grad[i]));
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
  EXPECT_LT(worst, 1e-3);
}

TEST(NetworkGradientTest, TwoLayerToyHead) {
  // conv -> relu -> conv logits (main) with an aux 1x1 head on the hidden
  // layer, loss = main + 0.4 * aux.
  std::mt19937_64 rng(5);
  Conv2d<double> hidden(3, 4, 3, 1, 1), head(4, 2, 1, 1, 0), aux(4, 2, 1, 1, 0);
  hidden.init_he(rng);
  head.init_normal(rng, 0.3);
  aux.init_normal(rng, 0.3);
  for (auto& b : hidden.bias.value) b = 0.1;
  Tensor<double> x = random_tensor<double>(rng, 1, 3, 7, 6);
  auto t = random_targets(rng, 42);
  auto loss = [&] {
    auto h = relu(hidden.forward(x));
    return softmax_cross_entropy(head.forward(h), t, 1.0, nullptr) +
           0.4 * softmax_cross_entropy(aux.forward(h), t, 1.0, nullptr);
  };
  auto h = relu(hidden.forward(x));
  Tensor<double> gm, ga;
  softmax_cross_entropy(head.forward(h), t, 1.0, &gm);
  softmax_cross_entropy(aux.forward(h), t, 0.4, &ga);
  Tensor<double> dh = head.backward(h, gm);
  Tensor<double> dh2 = aux.backward(h, ga);
  for (std::size_t i = 0; i < dh.v.size(); ++i) dh.v[i] += dh2.v[i];
  hidden.backward(x, relu_backward(h, dh));

  const double eps = 1e-6;
  for (Conv2d<double>* conv : {&hidden, &head, &aux}) {
    for (Param<double>* p : {&conv->weight, &conv->bias}) {
      for (std::size_t i = 0; i < p->size(); ++i) {
        const double saved = p->value[i];
        p->value[i] = saved + eps;
        const double up = loss();
        p->value[i] = saved - eps;
        const double down = loss();
        p->value[i] = saved;
        const double numeric = (up - down) / (2 * eps);
        if (std::abs(numeric) < 1e-10 && std::abs(p->grad[i]) < 1e-10) continue;
        EXPECT_LT(relative_error(numeric, p->grad[i]), 1e-3) << "param " << i;
      }
    }
  }
}

TEST(TensorOpsTest, BilinearAndPoolBackwardAreAdjoint) {
  // <op(x), y> == <x, op_backward(y)> for linear ops.
  std::mt19937_64 rng(8);
  Tensor<double> x = random_tensor<double>(rng, 2, 3, 5, 7);
  Tensor<double> y = random_tensor<double>(rng, 2, 3, 11, 13);
  auto fx = resize_bilinear(x, 11, 13);
  auto by = resize_bilinear_backward(y, 5, 7);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < fx.v.size(); ++i) lhs += fx.v[i] * y.v[i];
  for (std::size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * by.v[i];
  EXPECT_NEAR(lhs, rhs, 1e-9);

  Tensor<double> p = random_tensor<double>(rng, 2, 3, 3, 3);
  auto px = adaptive_avg_pool(x, 3);
  auto bp = adaptive_avg_pool_backward(p, 5, 7);
  lhs = rhs = 0;
  for (std::size_t i = 0; i < px.v.size(); ++i) lhs += px.v[i] * p.v[i];
  for (std::size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * bp.v[i];
  EXPECT_NEAR(lhs, rhs, 1e-9);
}

TEST(TensorOpsTest, ConvMatchesDirectSum) {
  std::mt19937_64 rng(3);
  Conv2d<double> conv(2, 3, 3, 2, 1);
  conv.init_he(rng);
  for (auto& b : conv.bias.value) b = 0.25;
  Tensor<double> x = random_tensor<double>(rng, 1, 2, 7, 6);
  auto y = conv.forward(x);
  ASSERT_EQ(y.h, 4);
  ASSERT_EQ(y.w, 3);
  for (int o = 0; o < 3; ++o)
    for (int oy = 0; oy < y.h; ++oy)
      for (int ox = 0; ox < y.w; ++ox) {
        double s = 0.25;
        for (int c = 0; c < 2; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = oy * 2 - 1 + ky, ix = ox * 2 - 1 + kx;
              if (iy < 0 || ix < 0 || iy >= 7 || ix >= 6) continue;
              s += conv.weight.value[((o * 2 + c) * 3 + ky) * 3 + kx] * x.at(0, c, iy, ix);
            }
        EXPECT_NEAR(y.at(0, o, oy, ox), s, 1e-12);
      }
}

TEST(TensorOpsTest, CrossEntropyOfUniformLogitsIsLog2) {
  Tensor<float> logits(1, 2, 2, 2);
  std::vector<std::uint8_t> t = {0, 1, 1, 0};
  EXPECT_NEAR(softmax_cross_entropy(logits, t, 1.0, nullptr), std::log(2.0), 1e-6);
}

TEST(NetworkTest, OutputsTwoClassesAtInputResolution) {
  SegNet<float> net(Architecture::small(3), 1);
  std::mt19937_64 rng(1);
  auto x = random_tensor<float>(rng, 2, 3, 64, 48);
  const auto t0 = std::chrono::steady_clock::now();
  auto out = net.forward(x);
  EXPECT_EQ(out.main.c, 2);
  EXPECT_EQ(out.main.h, 64);
  EXPECT_EQ(out.main.w, 48);
  EXPECT_EQ(out.aux.h, 64);
  EXPECT_EQ(out.aux.w, 48);
  (void)t0;
}

}  // namespace
}  // namespace parkit::nn
