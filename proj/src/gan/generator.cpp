// src/gan/generator.cpp
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

#include "sgan/gan/generator.hpp"

#include <cmath>

namespace sgan::gan {

using namespace sgan::nn;

namespace {

constexpr long kBaseRes = 4;
constexpr long kMinStage = 8;
long log2_long(long v) {
  long l = 0;
  while ((1L << l) < v) ++l;
  if ((1L << l) != v) throw Error("resolution must be a power of two");
  return l;
}

}  // namespace

long Generator::blocks_for(long stage_res) {
  if (stage_res < kMinStage) throw Error("stage resolution below 8");
  return log2_long(stage_res) - 1;
}

Generator::Generator(const GeneratorConfig& cfg, std::uint64_t init_seed)
    : cfg_(cfg) {
  RandomEngine rng(init_seed);
  const long c = cfg_.channels;
  const double gain = std::sqrt(2.0);

  class_embed_ = Embedding(store_, "g.embed", cfg_.num_classes,
                           cfg_.class_embed_dim, rng);

  const long map_in = cfg_.latent_dim + cfg_.class_embed_dim;
  for (int layer = 0; layer < 8; ++layer)
    mapping_.emplace_back(store_, "g.map.fc" + std::to_string(layer), map_in,
                          cfg_.latent_dim, gain, cfg_.mapping_lr_scale, rng);

  const_map_ = store_.add("g.synth.const", Tensor::zeros({c, kBaseRes, kBaseRes}),
                          1.0, false);

  // Style affines open with an exact identity: scale head biased to one.
  Tensor style_bias = Tensor::zeros({2 * c});
  for (long i = 0; i < c; ++i) style_bias[i] = 1.0;

  for (long res = kBaseRes; res <= cfg_.max_res; res *= 2) {
    Block blk;
    blk.res = res;
    const std::string base = "g.synth.b" + std::to_string(res);
    if (res > kBaseRes)
      blk.conv_a = EqConv(store_, base + ".conv_a", c, c, 3, 1, gain, 1.0, rng);
    blk.conv_b = EqConv(store_, base + ".conv_b", c, c, 3, 1, gain, 1.0, rng);
    blk.noise_scale_a =
        store_.add(base + ".noise_a", rng.normal_tensor({c}), 1.0, true);
    blk.noise_scale_b =
        store_.add(base + ".noise_b", rng.normal_tensor({c}), 1.0, true);
    blk.affine_a = EqLinear(store_, base + ".affine_a", cfg_.latent_dim, 2 * c,
                            1.0, 1.0, rng, style_bias.clone());
    blk.affine_b = EqLinear(store_, base + ".affine_b", cfg_.latent_dim, 2 * c,
                            1.0, 1.0, rng, style_bias.clone());
    blocks_.push_back(std::move(blk));
  }

  for (long res = kMinStage; res <= cfg_.max_res; res *= 2)
    heads_.emplace(res, EqConv(store_, "g.head" + std::to_string(res), c, 1, 1,
                               1, 1.0, 1.0, rng));
}

nn::Variable Generator::map_latent(const nn::Variable& z,
                                   const std::vector<long>& labels) const {
  if (z.value().rank() != 2 || z.value().dim(1) != cfg_.latent_dim)
    throw Error("map_latent: z must be (N, " + std::to_string(cfg_.latent_dim) + ")");
  if (static_cast<long>(labels.size()) != z.value().dim(0))
    throw Error("map_latent: label count mismatch");
  for (long l : labels)
    if (l < 0 || l >= cfg_.num_classes) throw Error("map_latent: label out of range");
  Variable cemb = class_embed_.forward(labels);
  Variable h = normalize_latent(z);
  for (const EqLinear& fc : mapping_)
    h = leaky_relu(fc.forward(concat_axis1(h, cemb)), kLeakySlope);
  return h;
}

std::vector<nn::Variable> Generator::sample_noises(long stage_res, long batch,
                                                   RandomEngine& rng) const {
  std::vector<Variable> noises;
  const long n_blocks = blocks_for(stage_res);
  for (long b = 0; b < n_blocks; ++b) {
    const long res = blocks_[static_cast<size_t>(b)].res;
    noises.push_back(Variable::constant(rng.normal_tensor({batch, 1, res, res})));
    noises.push_back(Variable::constant(rng.normal_tensor({batch, 1, res, res})));
  }
  return noises;
}

std::pair<nn::Variable, nn::Variable> Generator::style_of(
    const EqLinear& affine, const nn::Variable& w) const {
  Variable y = affine.forward(w);
  const long c = cfg_.channels;
  return {narrow_axis1(y, 0, c), narrow_axis1(y, c, c)};
}

nn::Variable Generator::synthesize(const std::vector<nn::Variable>& per_block_w,
                                   long stage_res, double alpha,
                                   const std::vector<nn::Variable>& noises) const {
  if (alpha < 0.0 || alpha > 1.0)
    throw Error("synthesize: alpha must lie in [0, 1]");
  if (stage_res > cfg_.max_res) throw Error("synthesize: stage beyond max resolution");
  const long n_blocks = blocks_for(stage_res);
  if (static_cast<long>(per_block_w.size()) != n_blocks)
    throw Error("synthesize: need one latent per active block");
  if (static_cast<long>(noises.size()) != 2 * n_blocks)
    throw Error("synthesize: need two noise images per active block");
  if (stage_res == kMinStage && alpha < 1.0)
    throw Error("synthesize: the first stage has no previous head to fade from");

  const long batch = per_block_w[0].value().dim(0);
  Variable x = broadcast_batch(const_map_, batch);
  Variable prev_features;

  for (long b = 0; b < n_blocks; ++b) {
    const Block& blk = blocks_[static_cast<size_t>(b)];
    const Variable& w = per_block_w[static_cast<size_t>(b)];
    if (b > 0) {
      x = upsample2_bilinear(x);
      x = blk.conv_a.forward(x);
    }
    x = noise_inject(x, noises[static_cast<size_t>(2 * b)], blk.noise_scale_a);
    x = leaky_relu(x, kLeakySlope);
    auto [sa, ba] = style_of(blk.affine_a, w);
    x = adain(x, sa, ba);

    x = blk.conv_b.forward(x);
    x = noise_inject(x, noises[static_cast<size_t>(2 * b + 1)], blk.noise_scale_b);
    x = leaky_relu(x, kLeakySlope);
    auto [sb, bb] = style_of(blk.affine_b, w);
    x = adain(x, sb, bb);

    if (blk.res * 2 == stage_res) prev_features = x;
  }

  Variable current = heads_.at(stage_res).forward(x);
  if (alpha >= 1.0) return current;
  Variable low =
      upsample2_bilinear(heads_.at(stage_res / 2).forward(prev_features));
  return add(scale(low, 1.0 - alpha), scale(current, alpha));
}

nn::Variable Generator::forward(const nn::Variable& z,
                                const std::vector<long>& labels,
                                long stage_res, double alpha,
                                const std::vector<nn::Variable>& noises) const {
  Variable w = map_latent(z, labels);
  std::vector<Variable> per_block(static_cast<size_t>(blocks_for(stage_res)), w);
  return synthesize(per_block, stage_res, alpha, noises);
}

}  // namespace sgan::gan
