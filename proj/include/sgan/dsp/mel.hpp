// sgan/dsp/mel.hpp
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
#include "sgan/dsp/wav.hpp"
#include "sgan/tensor.hpp"

namespace sgan::dsp {

inline constexpr long kMelBands = 128;
inline constexpr long kMelFrames = 128;
inline constexpr double kMelFMin = 125.0;
inline constexpr double kMelFMax = 7600.0;
inline constexpr double kMagFloor = 0.01;        // magnitude clip
inline constexpr double kDbFloor = -40.0;        // 20*log10(0.01)
// 81 natural frames sit centered inside the 128-frame grid.
inline constexpr long kMelPadLeft = (kMelFrames - kClipFrames) / 2;  // 23

// HTK-style mel scale.
double hz_to_mel(double f);
double mel_to_hz(double m);

struct MelFilterbank {
  Tensor weights;                 // (n_mels, freq_bins), peak-normalized rows
  Tensor pinv_weights;            // (freq_bins, n_mels) pseudoinverse
  std::vector<double> center_hz;  // strictly increasing band centers
  long fft_size = kFftSize;
  double sample_rate = kSampleRate;
  double condition_number = 0.0;
};

// Triangular filters over 130 mel-equally-spaced edge points between
// mel(f_min) and mel(f_max); each row normalized to a peak of 1.
MelFilterbank mel_filterbank_matrix(long n_mels, double f_min, double f_max,
                                    long fft_size, double sample_rate);

// 128 x 128 grid of amplitude decibels, every value >= db_floor.
struct MelSpectrogram {
  Tensor values;  // (mel band, frame)
  double db_floor = kDbFloor;
};

// Network-domain scaling, mapping [-40, 0] dB onto [-1, 1].
inline double db_to_unit(double db) { return (db + 40.0) / 20.0 - 1.0; }
inline double unit_to_db(double u) { return (u + 1.0) * 20.0 - 40.0; }

MelSpectrogram audio_to_mel(const AudioClip& clip, const MelFilterbank& fb);

// Inverts the log, applies the filterbank pseudoinverse (negatives clipped
// to zero), drops the pad columns, then runs Griffin-Lim.
AudioClip mel_to_audio(const MelSpectrogram& mel, const MelFilterbank& fb,
                       int iterations);

void validate_mel(const MelSpectrogram& mel);

}  // namespace sgan::dsp
