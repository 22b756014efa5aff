// sgan/dsp/stft.hpp
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

#include <complex>
#include <vector>

#include "sgan/dsp/wav.hpp"
#include "sgan/tensor.hpp"

namespace sgan::dsp {

// 50 ms frames, 12.5 ms hop, Hann window, 1024-point FFT (next power of
// two above the 800-sample frame). Center padding by half a frame gives
// 1 + 16000/200 = 81 frames for a one-second clip.
inline constexpr long kFrameSize = 800;
inline constexpr long kFrameHop = 200;
inline constexpr long kFftSize = 1024;
inline constexpr long kFreqBins = kFftSize / 2 + 1;  // 513
inline constexpr long kClipFrames = 81;

struct ComplexSpectrogram {
  long bins = 0;
  long frames = 0;
  std::vector<std::complex<double>> values;  // bin-major: values[b*frames+t]

  ComplexSpectrogram() = default;
  ComplexSpectrogram(long b, long f)
      : bins(b), frames(f), values(static_cast<size_t>(b * f)) {}
  std::complex<double>& at(long b, long t) {
    return values[static_cast<size_t>(b * frames + t)];
  }
  const std::complex<double>& at(long b, long t) const {
    return values[static_cast<size_t>(b * frames + t)];
  }
};

struct MagnitudeSpectrogram {
  Tensor values;  // (bins, frames), non-negative
  long frame_hop = kFrameHop;
  long frame_size = kFrameSize;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(long n);

ComplexSpectrogram stft_complex(const AudioClip& clip);
MagnitudeSpectrogram stft(const AudioClip& clip);

// Least-squares inverse: windowed overlap-add divided per position by the
// summed squared window. Positions the frames cannot reach raise a
// normalization error; positions inside the span where the window itself
// is zero carry no energy and come back as silence.
std::vector<double> istft(const ComplexSpectrogram& spec,
                          const std::vector<double>& window, long hop,
                          long out_length, bool center);

// Convenience for one-second clips (center = true, 16000 samples).
AudioClip istft_clip(const ComplexSpectrogram& spec);

}  // namespace sgan::dsp
