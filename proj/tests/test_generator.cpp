// tests/test_generator.cpp
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
#include "sgan/gan/generator.hpp"

using namespace sgan;
using namespace sgan::gan;
using namespace sgan::nn;

namespace {

GeneratorConfig toy_config(long max_res = 32) {
  GeneratorConfig cfg;
  cfg.channels = 8;
  cfg.num_classes = 2;
  cfg.max_res = max_res;
  return cfg;
}

void zero_param(ParamStore& store, const std::string& name) {
  Tensor& t = store.at(name).var.node()->value;
  for (long i = 0; i < t.numel(); ++i) t[i] = 0.0;
}

}  // namespace

TEST_CASE("normalize_latent divides by the population std of the elements") {
  Variable z = Variable::constant(Tensor::from({1, 2}, {3.0, -3.0}));
  Variable n = normalize_latent(z);
  CHECK(n.value()[0] == doctest::Approx(1.0));
  CHECK(n.value()[1] == doctest::Approx(-1.0));
}

TEST_CASE("normalize_latent handles constant vectors without NaN") {
  Variable z = Variable::constant(Tensor::full({1, 8}, 2.0));
  Variable n = normalize_latent(z);
  CHECK(n.value().all_finite());
  Variable zero = Variable::constant(Tensor::zeros({1, 8}));
  CHECK(normalize_latent(zero).value().all_finite());
}

TEST_CASE("normalize_latent yields unit population std for non-constant input") {
  RandomEngine rng(3);
  Variable z = Variable::constant(rng.normal_tensor({4, 128}));
  Variable n = normalize_latent(z);
  for (long r = 0; r < 4; ++r) {
    double mean = 0.0;
    for (long i = 0; i < 128; ++i) mean += n.value()[r * 128 + i];
    mean /= 128.0;
    double var = 0.0;
    for (long i = 0; i < 128; ++i) {
      const double d = n.value()[r * 128 + i] - mean;
      var += d * d;
    }
    var /= 128.0;
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mapping network output shape and class dependence") {
  Generator g(toy_config(), 11);
  RandomEngine rng(5);
  Variable z = Variable::constant(rng.normal_tensor({3, 128}));
  Variable w0 = g.map_latent(z, {0, 0, 0});
  Variable w1 = g.map_latent(z, {1, 1, 1});
  REQUIRE(w0.value().shape() == std::vector<long>({3, 128}));
  bool differs = false;
  for (long i = 0; i < w0.value().numel() && !differs; ++i)
    differs = w0.value()[i] != w1.value()[i];
  CHECK(differs);
}

TEST_CASE("mapping network with zero weights and biases maps to zero") {
  GeneratorConfig cfg = toy_config();
  Generator g(cfg, 11);
  for (int layer = 0; layer < 8; ++layer) {
    zero_param(g.params(), "g.map.fc" + std::to_string(layer) + ".weight");
    zero_param(g.params(), "g.map.fc" + std::to_string(layer) + ".bias");
  }
  RandomEngine rng(5);
  Variable z = Variable::constant(rng.normal_tensor({2, 128}));
  Variable w = g.map_latent(z, {0, 1});
  for (long i = 0; i < w.value().numel(); ++i) CHECK(w.value()[i] == 0.0);
}

TEST_CASE("adain identity style gives zero mean, unit std per channel") {
  RandomEngine rng(17);
  Variable x = Variable::constant(rng.normal_tensor({2, 8, 16, 16}));
  Variable ones = Variable::constant(Tensor::ones({2, 8}));
  Variable zeros = Variable::constant(Tensor::zeros({2, 8}));
  Variable y = adain(x, ones, zeros);
  for (long n = 0; n < 2; ++n)
    for (long c = 0; c < 8; ++c) {
      const double* p = y.value().data() + (n * 8 + c) * 256;
      double mean = 0.0;
      for (long i = 0; i < 256; ++i) mean += p[i];
      mean /= 256.0;
      double var = 0.0;
      for (long i = 0; i < 256; ++i) var += (p[i] - mean) * (p[i] - mean);
      var /= 256.0;
      CHECK(std::abs(mean) < 1e-4);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-3);
    }
}

TEST_CASE("adain matches the hand-computed 2x2 example") {
  Variable x = Variable::constant(
      Tensor::from({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0}));
  Variable ys = Variable::constant(Tensor::full({1, 1}, 2.0));
  Variable yb = Variable::constant(Tensor::full({1, 1}, 1.0));
  Variable y = adain(x, ys, yb);
  CHECK(y.value()[0] == doctest::Approx(-1.6833).epsilon(1e-4));
  CHECK(y.value()[1] == doctest::Approx(0.1056).epsilon(1e-3));
  CHECK(y.value()[2] == doctest::Approx(1.8944).epsilon(1e-4));
  CHECK(y.value()[3] == doctest::Approx(3.6833).epsilon(1e-4));
}

TEST_CASE("adain of a constant map returns the style bias") {
  Variable x = Variable::constant(Tensor::full({1, 2, 4, 4}, 5.0));
  Variable ys = Variable::constant(Tensor::full({1, 2}, 3.0));
  Variable yb = Variable::constant(
      Tensor::from({1, 2}, {0.25, -0.75}));
  Variable y = adain(x, ys, yb);
  for (long c = 0; c < 2; ++c)
    for (long i = 0; i < 16; ++i)
      CHECK(y.value()[c * 16 + i] == doctest::Approx(c == 0 ? 0.25 : -0.75));
}

TEST_CASE("noise_inject adds the scaled broadcast noise") {
  RandomEngine rng(23);
  Tensor x0 = rng.normal_tensor({2, 4, 8, 8});
  Variable x = Variable::constant(x0);

  Variable zero_scale = Variable::constant(Tensor::zeros({4}));
  Variable noise = Variable::constant(rng.normal_tensor({2, 1, 8, 8}));
  Variable same = noise_inject(x, noise, zero_scale);
  for (long i = 0; i < x0.numel(); ++i) CHECK(same.value()[i] == x0[i]);

  Variable unit_scale = Variable::constant(Tensor::ones({4}));
  Variable ones = Variable::constant(Tensor::ones({2, 1, 8, 8}));
  Variable inc = noise_inject(x, ones, unit_scale);
  for (long i = 0; i < x0.numel(); ++i)
    CHECK(inc.value()[i] == doctest::Approx(x0[i] + 1.0));

  Variable other = Variable::constant(rng.normal_tensor({2, 1, 8, 8}));
  Variable a = noise_inject(x, noise, unit_scale);
  Variable b = noise_inject(x, other, unit_scale);
  bool differs = false;
  for (long i = 0; i < x0.numel() && !differs; ++i)
    differs = a.value()[i] != b.value()[i];
  CHECK(differs);

  Variable bad = Variable::constant(Tensor::ones({2, 1, 4, 4}));
  CHECK_THROWS_AS(noise_inject(x, bad, unit_scale), Error);
}

TEST_CASE("style affine head: zero weights give identity modulation") {
  ParamStore store;
  RandomEngine rng(31);
  Tensor bias = Tensor::zeros({16});
  for (long i = 0; i < 8; ++i) bias[i] = 1.0;
  EqLinear affine(store, "affine", 128, 16, 1.0, 1.0, rng, bias);
  zero_param(store, "affine.weight");

  Variable w = Variable::constant(rng.normal_tensor({3, 128}));
  Variable y = affine.forward(w);
  REQUIRE(y.value().shape() == std::vector<long>({3, 16}));  // 2 x channels
  for (long n = 0; n < 3; ++n) {
    for (long c = 0; c < 8; ++c) CHECK(y.value()[n * 16 + c] == 1.0);
    for (long c = 8; c < 16; ++c) CHECK(y.value()[n * 16 + c] == 0.0);
  }
}

TEST_CASE("style affine is affine: interpolation commutes") {
  ParamStore store;
  RandomEngine rng(37);
  EqLinear affine(store, "affine", 16, 12, 1.0, 1.0, rng);
  Tensor w1 = rng.normal_tensor({2, 16});
  Tensor w2 = rng.normal_tensor({2, 16});
  const double a = 0.3;
  Tensor mix({2, 16});
  for (long i = 0; i < 32; ++i) mix[i] = a * w1[i] + (1 - a) * w2[i];
  Variable y_mix = affine.forward(Variable::constant(mix));
  Variable y1 = affine.forward(Variable::constant(w1));
  Variable y2 = affine.forward(Variable::constant(w2));
  for (long i = 0; i < y_mix.value().numel(); ++i)
    CHECK(y_mix.value()[i] ==
          doctest::Approx(a * y1.value()[i] + (1 - a) * y2.value()[i]));
}

TEST_CASE("synthesis output shapes cover every stage") {
  Generator g(toy_config(128), 41);
  RandomEngine rng(43);
  Variable z = Variable::constant(rng.normal_tensor({2, 128}));
  for (long stage : {8L, 16L, 32L, 64L, 128L}) {
    RandomEngine noise_rng(7);
    auto noises = g.sample_noises(stage, 2, noise_rng);
    Variable out = g.forward(z, {0, 1}, stage, 1.0, noises);
    CHECK(out.value().shape() == std::vector<long>({2, 1, stage, stage}));
    CHECK(out.value().all_finite());
  }
}

TEST_CASE("alpha = 0 reproduces the upsampled previous-stage output") {
  Generator g(toy_config(32), 47);
  RandomEngine rng(49);
  Variable z = Variable::constant(rng.normal_tensor({2, 128}));
  std::vector<long> labels = {0, 1};

  RandomEngine noise_rng(9);
  auto noises16 = g.sample_noises(16, 2, noise_rng);
  std::vector<Variable> noises8(noises16.begin(), noises16.begin() + 4);

  Variable low = g.forward(z, labels, 8, 1.0, noises8);
  Variable faded = g.forward(z, labels, 16, 0.0, noises16);
  Variable up = upsample2_bilinear(low);
  REQUIRE(faded.value().numel() == up.value().numel());
  for (long i = 0; i < up.value().numel(); ++i)
    CHECK(faded.value()[i] == up.value()[i]);
}

TEST_CASE("fade is exactly the linear blend of its endpoints") {
  Generator g(toy_config(32), 53);
  RandomEngine rng(59);
  Variable z = Variable::constant(rng.normal_tensor({1, 128}));
  RandomEngine noise_rng(11);
  auto noises = g.sample_noises(16, 1, noise_rng);

  Variable at0 = g.forward(z, {0}, 16, 0.0, noises);
  Variable at1 = g.forward(z, {0}, 16, 1.0, noises);
  for (double a : {0.25, 0.5, 0.75}) {
    Variable mid = g.forward(z, {0}, 16, a, noises);
    for (long i = 0; i < mid.value().numel(); ++i)
      CHECK(mid.value()[i] ==
            doctest::Approx((1 - a) * at0.value()[i] + a * at1.value()[i])
                .epsilon(1e-12));
  }
}

TEST_CASE("generator forward is deterministic for fixed inputs") {
  Generator g(toy_config(16), 61);
  RandomEngine rng(67);
  Variable z = Variable::constant(rng.normal_tensor({2, 128}));
  RandomEngine n1(13), n2(13);
  auto noises_a = g.sample_noises(16, 2, n1);
  auto noises_b = g.sample_noises(16, 2, n2);
  Variable a = g.forward(z, {1, 0}, 16, 1.0, noises_a);
  Variable b = g.forward(z, {1, 0}, 16, 1.0, noises_b);
  for (long i = 0; i < a.value().numel(); ++i)
    CHECK(a.value()[i] == b.value()[i]);
}

TEST_CASE("generator rejects alpha outside [0,1] and fade at the first stage") {
  Generator g(toy_config(16), 71);
  RandomEngine rng(73);
  Variable z = Variable::constant(rng.normal_tensor({1, 128}));
  RandomEngine noise_rng(15);
  auto noises = g.sample_noises(8, 1, noise_rng);
  CHECK_THROWS_AS(g.forward(z, {0}, 8, 1.5, noises), Error);
  CHECK_THROWS_AS(g.forward(z, {0}, 8, 0.5, noises), Error);
}

TEST_CASE("style_mix_sources partitions blocks at the crossover") {
  CHECK(style_mix_sources(6, 6) == std::vector<int>({0, 0, 0, 0, 0, 0}));
  CHECK(style_mix_sources(0, 6) == std::vector<int>({1, 1, 1, 1, 1, 1}));
  CHECK(style_mix_sources(2, 6) == std::vector<int>({0, 0, 1, 1, 1, 1}));
  CHECK_THROWS_AS(style_mix_sources(7, 6), Error);
}

TEST_CASE("select_rows mixes per-sample latents") {
  Tensor a = Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor b = Tensor::from({2, 2}, {9.0, 8.0, 7.0, 6.0});
  Variable mixed = select_rows({1, 0}, Variable::constant(a),
                               Variable::constant(b));
  CHECK(mixed.value()[0] == 1.0);
  CHECK(mixed.value()[1] == 2.0);
  CHECK(mixed.value()[2] == 7.0);
  CHECK(mixed.value()[3] == 6.0);
}

TEST_CASE("full-width weight init is standard normal, biases and const zero") {
  GeneratorConfig cfg;  // 128 channels, the full architecture
  Generator g(cfg, 101);
  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  for (const Param& p : g.params().entries()) {
    const Tensor& t = p.var.value();
    if (p.is_weight) {
      for (long i = 0; i < t.numel(); ++i) {
        sum += t[i];
        sum2 += t[i] * t[i];
      }
      n += t.numel();
    } else {
      // biases: zero except the style-scale head halves
      if (p.name.find("affine") == std::string::npos)
        for (long i = 0; i < t.numel(); ++i) CHECK(t[i] == 0.0);
    }
  }
  REQUIRE(n >= 10000);
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);

  const Tensor& c = g.params().at("g.synth.const").var.value();
  for (long i = 0; i < c.numel(); ++i) CHECK(c[i] == 0.0);
}
