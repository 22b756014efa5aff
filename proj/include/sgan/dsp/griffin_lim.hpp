// sgan/dsp/griffin_lim.hpp
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

#include <vector>

#include "sgan/dsp/stft.hpp"

namespace sgan::dsp {

struct GriffinLimResult {
  AudioClip clip;
  // One entry per iteration: the distance between the target magnitudes
  // and the magnitudes of the current signal estimate, measured in the
  // Hermitian-weighted Frobenius norm (interior bins count twice so the
  // value equals the full-spectrum distance). Non-increasing by
  // construction of the alternating projections.
  std::vector<double> consistency_errors;
};

// Alternating istft/stft projections from zero initial phase against the
// target linear-magnitude spectrogram (freq_bins x 81).
GriffinLimResult griffin_lim(const Tensor& target_magnitudes, int iterations);

}  // namespace sgan::dsp
