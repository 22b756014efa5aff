// sgan/train/config.hpp
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
#include <string>

#include "sgan/common.hpp"

namespace sgan::train {

struct TrainingConfig {
  // Optimizer
  double adam_alpha = 0.001;
  double adam_alpha_final_stage = 0.0015;  // at the 128x128 stage
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  double mapping_lr_factor = 0.01;

  // Loss
  double drift_epsilon = 0.001;
  double gp_lambda = 10.0;

  // Progressive growing, measured in samples introduced to the network.
  std::uint64_t fade_samples = 200000;
  std::uint64_t stabilize_samples = 200000;
  std::uint64_t total_samples = 4050000;
  long start_resolution = 8;
  long max_resolution = 128;
  std::map<long, long> batch_by_resolution = {
      {8, 256}, {16, 128}, {32, 64}, {64, 32}, {128, 32}};

  double style_mix_prob = 0.9;

  // Architecture
  long channels = 128;
  long latent_dim = 128;
  long class_embed_dim = 16;
  long num_classes = 10;

  // Bookkeeping
  std::uint64_t checkpoint_samples = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

// Flat `key = value` UTF-8 text. Unknown keys are rejected; omitted keys
// keep their defaults. batch_by_resolution is written as `8:256,16:128,...`.
TrainingConfig parse_config_text(const std::string& text);
TrainingConfig load_config_file(const std::string& path);

// Applies one `key=value` override on top of an existing config.
void apply_override(TrainingConfig& cfg, const std::string& key,
                    const std::string& value);

// Fixed-order serialization; its FNV-1a hash identifies a configuration in
// checkpoints.
std::string canonical_config_text(const TrainingConfig& cfg);
std::uint64_t config_hash(const TrainingConfig& cfg);

}  // namespace sgan::train
