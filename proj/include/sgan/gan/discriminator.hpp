// sgan/gan/discriminator.hpp
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

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sgan/gan/layers.hpp"

namespace sgan::gan {

struct DiscriminatorConfig {
  long channels = 128;
  long class_embed_dim = 16;
  long num_classes = 10;
  long max_res = 128;
};

// Class-conditioned critic, mirror-symmetric to the generator: per block
// the class embedding is concatenated up front, two 3x3 convolutions
// follow, then average-pool downsampling; the 4x4 tail applies the
// minibatch-std layer, one convolution, and two linear layers.
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& cfg, std::uint64_t init_seed);

  const DiscriminatorConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  static long blocks_for(long stage_res);

  // (N,1,r,r) mels -> (N) critic scores.
  nn::Variable forward(const nn::Variable& mels, const std::vector<long>& labels,
                       long stage_res, double alpha) const;

 private:
  struct Block {
    long res = 0;
    EqConv conv_a;  // (C + embed) -> C
    EqConv conv_b;  // C -> C
  };

  nn::Variable run_block(const Block& blk, nn::Variable x,
                         const nn::Variable& cemb) const;

  DiscriminatorConfig cfg_;
  ParamStore store_;
  Embedding class_embed_;
  std::map<long, EqConv> heads_;  // from-spectrogram per resolution
  std::vector<Block> blocks_;     // decreasing resolution, max_res .. 8
  EqConv final_conv_;             // (C+1) -> C at 4x4
  EqLinear fc1_, fc2_;
};

}  // namespace sgan::gan
