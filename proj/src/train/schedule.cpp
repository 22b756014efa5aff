// src/train/schedule.cpp
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

#include "sgan/train/schedule.hpp"

namespace sgan::train {

StageState schedule_state(std::uint64_t samples_seen, const TrainingConfig& cfg) {
  if (samples_seen > cfg.total_samples)
    throw DataError("schedule_state: samples_seen " +
                    std::to_string(samples_seen) + " beyond total_samples " +
                    std::to_string(cfg.total_samples));

  StageState st;
  st.samples_seen = samples_seen;

  long res = cfg.start_resolution;
  Phase phase = Phase::kStabilize;
  double alpha = 1.0;

  std::uint64_t t = samples_seen;
  if (t < cfg.stabilize_samples) {
    // initial stabilize window at the start resolution
  } else {
    t -= cfg.stabilize_samples;
    bool placed = false;
    for (res = cfg.start_resolution * 2; res <= cfg.max_resolution; res *= 2) {
      if (t < cfg.fade_samples) {
        phase = Phase::kFade;
        alpha = static_cast<double>(t) / static_cast<double>(cfg.fade_samples);
        placed = true;
        break;
      }
      t -= cfg.fade_samples;
      if (t < cfg.stabilize_samples) {
        placed = true;
        break;
      }
      t -= cfg.stabilize_samples;
    }
    if (!placed) res = cfg.max_resolution;  // post-growing stabilization
  }

  st.resolution = res;
  st.phase = phase;
  st.alpha = alpha;
  st.batch_size = cfg.batch_by_resolution.at(res);
  st.learning_rate =
      res == 128 ? cfg.adam_alpha_final_stage : cfg.adam_alpha;
  return st;
}

}  // namespace sgan::train
