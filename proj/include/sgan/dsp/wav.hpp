// sgan/dsp/wav.hpp
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
#include <vector>

#include "sgan/common.hpp"

namespace sgan::dsp {

inline constexpr int kSampleRate = 16000;
inline constexpr long kClipSamples = 16000;  // exactly one second

// One-second mono clip at 16 kHz, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
};

// Reads RIFF/WAVE, PCM 16-bit little-endian mono at 16 kHz. Clips shorter
// than one second are zero-padded at the end; longer clips are rejected.
AudioClip read_wav(const std::string& path);

// Writes the same format back (16-bit PCM mono, 16 kHz).
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace sgan::dsp
