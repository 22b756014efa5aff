// sgan/train/checkpoint.hpp
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

#include <string>

#include "sgan/gan/discriminator.hpp"
#include "sgan/gan/generator.hpp"
#include "sgan/train/adam.hpp"
#include "sgan/train/config.hpp"

namespace sgan::train {

// Full training snapshot: parameters, optimizer moments, progress counters
// and the RNG master seed, tied to a config hash. Reload reproduces
// forward outputs bit-identically.
struct CheckpointMeta {
  std::uint64_t samples_seen = 0;
  std::uint64_t step = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
  std::string config_text;
};

void save_checkpoint(const std::string& path, const TrainingConfig& cfg,
                     const gan::Generator& g, const gan::Discriminator& d,
                     const Adam& opt_g, const Adam& opt_d,
                     std::uint64_t samples_seen, std::uint64_t step,
                     std::uint64_t master_seed);

// Reads only the embedded metadata (for config recovery and hash checks).
CheckpointMeta read_checkpoint_meta(const std::string& path);

// Restores parameters and optimizer state into freshly constructed
// networks; every name must match and no tensor may be missing. The file
// is parsed completely before anything is mutated.
CheckpointMeta load_checkpoint(const std::string& path, gan::Generator& g,
                               gan::Discriminator& d, Adam* opt_g,
                               Adam* opt_d);

}  // namespace sgan::train
