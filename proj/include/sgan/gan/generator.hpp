// sgan/gan/generator.hpp
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

struct GeneratorConfig {
  long latent_dim = 128;
  long class_embed_dim = 16;
  long channels = 128;
  long num_classes = 10;
  long max_res = 128;
  double mapping_lr_scale = 0.01;  // two orders of magnitude down
};

// Conditional style-based generator: an eight-layer mapping network feeds
// per-block affine style heads; synthesis grows a learned 4x4 constant up
// to the mel grid with noise injection and AdaIN after every convolution.
class Generator {
 public:
  Generator(const GeneratorConfig& cfg, std::uint64_t init_seed);

  const GeneratorConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // Blocks active at a stage: the 4x4 base plus one per doubling.
  static long blocks_for(long stage_res);
  long max_blocks() const { return blocks_for(cfg_.max_res); }

  nn::Variable map_latent(const nn::Variable& z,
                          const std::vector<long>& labels) const;

  // Fresh single-channel noise images, two per active block.
  std::vector<nn::Variable> sample_noises(long stage_res, long batch,
                                          RandomEngine& rng) const;

  nn::Variable synthesize(const std::vector<nn::Variable>& per_block_w,
                          long stage_res, double alpha,
                          const std::vector<nn::Variable>& noises) const;

  // Full pipeline without style mixing.
  nn::Variable forward(const nn::Variable& z, const std::vector<long>& labels,
                       long stage_res, double alpha,
                       const std::vector<nn::Variable>& noises) const;

 private:
  struct Block {
    long res = 0;
    EqConv conv_a;  // absent on the 4x4 base block
    EqConv conv_b;
    nn::Variable noise_scale_a, noise_scale_b;
    EqLinear affine_a, affine_b;
  };

  std::pair<nn::Variable, nn::Variable> style_of(const EqLinear& affine,
                                                 const nn::Variable& w) const;

  GeneratorConfig cfg_;
  ParamStore store_;
  Embedding class_embed_;
  std::vector<EqLinear> mapping_;
  nn::Variable const_map_;  // (C,4,4), zero-initialized
  std::vector<Block> blocks_;
  std::map<long, EqConv> heads_;  // to-spectrogram per resolution
};

}  // namespace sgan::gan
