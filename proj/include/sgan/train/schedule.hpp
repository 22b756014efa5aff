// sgan/train/schedule.hpp
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

#include "sgan/train/config.hpp"

namespace sgan::train {

enum class Phase { kStabilize, kFade };

struct StageState {
  std::uint64_t samples_seen = 0;
  long resolution = 8;
  double alpha = 1.0;  // 1 while stabilizing, linear in samples while fading
  Phase phase = Phase::kStabilize;
  long batch_size = 256;
  double learning_rate = 0.001;
};

// Piecewise-linear progressive-growing schedule over samples introduced:
// stabilize at the start resolution, then alternate fade/stabilize windows
// per doubling, then stabilize at the top until total_samples.
StageState schedule_state(std::uint64_t samples_seen, const TrainingConfig& cfg);

}  // namespace sgan::train
