// src/gan/discriminator.cpp
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

#include "sgan/gan/discriminator.hpp"

#include <cmath>

namespace sgan::gan {

using namespace sgan::nn;

namespace {

constexpr long kMinStage = 8;
constexpr long kFinalRes = 4;

long log2_long(long v) {
  long l = 0;
  while ((1L << l) < v) ++l;
  if ((1L << l) != v) throw Error("resolution must be a power of two");
  return l;
}

}  // namespace

long Discriminator::blocks_for(long stage_res) {
  if (stage_res < kMinStage) throw Error("stage resolution below 8");
  return log2_long(stage_res) - 2;
}

Discriminator::Discriminator(const DiscriminatorConfig& cfg,
                             std::uint64_t init_seed)
    : cfg_(cfg) {
  RandomEngine rng(init_seed);
  const long c = cfg_.channels;
  const long e = cfg_.class_embed_dim;
  const double gain = std::sqrt(2.0);

  class_embed_ = Embedding(store_, "d.embed", cfg_.num_classes, e, rng);

  for (long res = kMinStage; res <= cfg_.max_res; res *= 2)
    heads_.emplace(res, EqConv(store_, "d.head" + std::to_string(res), 1, c, 1,
                               1, gain, 1.0, rng));

  for (long res = cfg_.max_res; res >= kMinStage; res /= 2) {
    Block blk;
    blk.res = res;
    const std::string base = "d.b" + std::to_string(res);
    blk.conv_a = EqConv(store_, base + ".conv_a", c + e, c, 3, 1, gain, 1.0, rng);
    blk.conv_b = EqConv(store_, base + ".conv_b", c, c, 3, 1, gain, 1.0, rng);
    blocks_.push_back(std::move(blk));
  }

  final_conv_ = EqConv(store_, "d.final.conv", c + 1, c, 3, 1, gain, 1.0, rng);
  fc1_ = EqLinear(store_, "d.final.fc1", c * kFinalRes * kFinalRes, c, gain,
                  1.0, rng);
  fc2_ = EqLinear(store_, "d.final.fc2", c, 1, 1.0, 1.0, rng);
}

nn::Variable Discriminator::run_block(const Block& blk, nn::Variable x,
                                      const nn::Variable& cemb) const {
  x = inject_class(x, cemb);
  x = leaky_relu(blk.conv_a.forward(x), kLeakySlope);
  x = leaky_relu(blk.conv_b.forward(x), kLeakySlope);
  return avgpool2(x);
}

nn::Variable Discriminator::forward(const nn::Variable& mels,
                                    const std::vector<long>& labels,
                                    long stage_res, double alpha) const {
  const Tensor& tx = mels.value();
  if (tx.rank() != 4 || tx.dim(1) != 1 || tx.dim(2) != stage_res ||
      tx.dim(3) != stage_res)
    throw Error("discriminator: input must be (N,1," +
                std::to_string(stage_res) + "," + std::to_string(stage_res) +
                "), got " + tx.shape_str());
  if (alpha < 0.0 || alpha > 1.0)
    throw Error("discriminator: alpha must lie in [0, 1]");
  if (stage_res == kMinStage && alpha < 1.0)
    throw Error("discriminator: the first stage has no lower head to fade from");
  if (static_cast<long>(labels.size()) != tx.dim(0))
    throw Error("discriminator: label count mismatch");
  for (long l : labels)
    if (l < 0 || l >= cfg_.num_classes)
      throw Error("discriminator: label out of range");

  Variable cemb = class_embed_.forward(labels);

  size_t bi = 0;
  while (bi < blocks_.size() && blocks_[bi].res != stage_res) ++bi;
  if (bi == blocks_.size()) throw Error("discriminator: no block at this stage");

  Variable x = leaky_relu(heads_.at(stage_res).forward(mels), kLeakySlope);
  x = run_block(blocks_[bi], x, cemb);

  if (alpha < 1.0) {
    Variable low = leaky_relu(
        heads_.at(stage_res / 2).forward(avgpool2(mels)), kLeakySlope);
    x = add(scale(x, alpha), scale(low, 1.0 - alpha));
  }

  for (size_t i = bi + 1; i < blocks_.size(); ++i)
    x = run_block(blocks_[i], x, cemb);

  x = minibatch_stddev(x);
  x = leaky_relu(final_conv_.forward(x), kLeakySlope);
  const long n = x.value().dim(0);
  x = reshape(x, {n, cfg_.channels * kFinalRes * kFinalRes});
  x = leaky_relu(fc1_.forward(x), kLeakySlope);
  Variable s = fc2_.forward(x);  // (N,1), plain linear
  return reshape(s, {n});
}

}  // namespace sgan::gan
