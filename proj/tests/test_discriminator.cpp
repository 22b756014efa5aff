// tests/test_discriminator.cpp
//
// Copyright 2026 The sganlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "sgan/gan/discriminator.hpp"

using namespace sgan;
using namespace sgan::gan;
using namespace sgan::nn;

namespace {

DiscriminatorConfig toy_config(long max_res = 32, long channels = 8) {
  DiscriminatorConfig cfg;
  cfg.channels = channels;
  cfg.num_classes = 2;
  cfg.max_res = max_res;
  return cfg;
}

}  // namespace

TEST_CASE("minibatch_stddev appends a zero channel for identical samples") {
  Tensor x({4, 3, 4, 4});
  for (long i = 0; i < x.numel(); ++i) x[i] = 1.25;
  Variable y = minibatch_stddev(Variable::constant(x));
  REQUIRE(y.value().shape() == std::vector<long>({4, 4, 4, 4}));
  for (long n = 0; n < 4; ++n)
    for (long i = 0; i < 16; ++i)
      CHECK(y.value()[(n * 4 + 3) * 16 + i] ==
            doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("minibatch_stddev of two samples offset by 2 appends ones") {
  RandomEngine rng(3);
  Tensor a = rng.normal_tensor({1, 2, 4, 4});
  Tensor x({2, 2, 4, 4});
  for (long i = 0; i < a.numel(); ++i) {
    x[i] = a[i];
    x[a.numel() + i] = a[i] + 2.0;
  }
  Variable y = minibatch_stddev(Variable::constant(x));
  for (long n = 0; n < 2; ++n)
    for (long i = 0; i < 16; ++i)
      CHECK(std::abs(y.value()[(n * 3 + 2) * 16 + i] - 1.0) < 1e-6);
}

TEST_CASE("minibatch_stddev channel is constant and shared across the batch") {
  RandomEngine rng(5);
  Tensor x = rng.normal_tensor({3, 2, 4, 4});
  Variable y = minibatch_stddev(Variable::constant(x));
  const double v = y.value()[(0 * 3 + 2) * 16];
  for (long n = 0; n < 3; ++n)
    for (long i = 0; i < 16; ++i)
      CHECK(y.value()[(n * 3 + 2) * 16 + i] == v);
}

TEST_CASE("inject_class prepends 16 constant planes") {
  RandomEngine rng(7);
  Tensor x = rng.normal_tensor({2, 8, 4, 4});
  Tensor emb = rng.normal_tensor({2, 16});
  Variable y = inject_class(Variable::constant(x), Variable::constant(emb));
  REQUIRE(y.value().shape() == std::vector<long>({2, 24, 4, 4}));
  for (long n = 0; n < 2; ++n)
    for (long c = 0; c < 16; ++c)
      for (long i = 0; i < 16; ++i)
        CHECK(y.value()[(n * 24 + c) * 16 + i] == emb[n * 16 + c]);

  Variable z = inject_class(Variable::constant(x),
                            Variable::constant(Tensor::zeros({2, 16})));
  for (long n = 0; n < 2; ++n)
    for (long c = 0; c < 16; ++c)
      for (long i = 0; i < 16; ++i)
        CHECK(z.value()[(n * 24 + c) * 16 + i] == 0.0);
}

TEST_CASE("discriminator produces finite per-sample scores") {
  Discriminator d(toy_config(), 11);
  RandomEngine rng(13);
  Tensor mels = rng.normal_tensor({32, 1, 16, 16});
  std::vector<long> labels(32);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
  Variable s = d.forward(Variable::constant(mels), labels, 16, 1.0);
  REQUIRE(s.value().shape() == std::vector<long>({32}));
  CHECK(s.value().all_finite());
}

TEST_CASE("alpha = 0 equals evaluating the lower stage on pooled input") {
  Discriminator d(toy_config(), 17);
  RandomEngine rng(19);
  Tensor mels = rng.normal_tensor({4, 1, 16, 16});
  std::vector<long> labels = {0, 1, 1, 0};
  Variable faded = d.forward(Variable::constant(mels), labels, 16, 0.0);
  Variable pooled = avgpool2(Variable::constant(mels));
  Variable low = d.forward(pooled, labels, 8, 1.0);
  for (long i = 0; i < 4; ++i)
    CHECK(faded.value()[i] == low.value()[i]);
}

TEST_CASE("discriminator is deterministic") {
  Discriminator d(toy_config(), 23);
  RandomEngine rng(29);
  Tensor mels = rng.normal_tensor({3, 1, 32, 32});
  std::vector<long> labels = {1, 0, 1};
  Variable a = d.forward(Variable::constant(mels), labels, 32, 0.5);
  Variable b = d.forward(Variable::constant(mels), labels, 32, 0.5);
  for (long i = 0; i < 3; ++i) CHECK(a.value()[i] == b.value()[i]);
}

TEST_CASE("discriminator rejects bad labels, alpha, and shapes") {
  Discriminator d(toy_config(), 31);
  RandomEngine rng(37);
  Tensor mels = rng.normal_tensor({2, 1, 16, 16});
  CHECK_THROWS_AS(d.forward(Variable::constant(mels), {0, 5}, 16, 1.0), Error);
  CHECK_THROWS_AS(d.forward(Variable::constant(mels), {0, 1}, 16, 1.5), Error);
  CHECK_THROWS_AS(d.forward(Variable::constant(mels), {0, 1}, 32, 1.0), Error);
}

TEST_CASE("critic input gradient matches finite differences") {
  DiscriminatorConfig cfg = toy_config(8, 4);
  Discriminator d(cfg, 41);
  RandomEngine rng(43);
  Tensor x0 = rng.normal_tensor({2, 1, 8, 8});
  std::vector<long> labels = {0, 1};

  Variable x(x0.clone(), true);
  Variable s = sum_all(d.forward(x, labels, 8, 1.0));
  Tensor g = grad_tensors(s, {x})[0];

  Tensor gn = numeric_grad(
      [&](const Tensor& xt) {
        NoGradGuard off;
        return sum_all(d.forward(Variable::constant(xt), labels, 8, 1.0))
            .scalar();
      },
      x0, 1e-5);

  double worst = 0.0;
  for (long i = 0; i < g.numel(); ++i) {
    const double denom = std::max(1e-6, std::abs(gn[i]));
    worst = std::max(worst, std::abs(g[i] - gn[i]) / denom);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("discriminator weight init is standard normal with zero biases") {
  DiscriminatorConfig cfg;  // full width
  Discriminator d(cfg, 47);
  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  for (const Param& p : d.params().entries()) {
    const Tensor& t = p.var.value();
    if (p.is_weight) {
      for (long i = 0; i < t.numel(); ++i) {
        sum += t[i];
        sum2 += t[i] * t[i];
      }
      n += t.numel();
    } else {
      for (long i = 0; i < t.numel(); ++i) CHECK(t[i] == 0.0);
    }
  }
  REQUIRE(n >= 10000);
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(sum2 / n - mean * mean - 1.0) < 0.05);
}
