// src/dsp/griffin_lim.cpp
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

#include "sgan/dsp/griffin_lim.hpp"

#include <cmath>

namespace sgan::dsp {

namespace {

// Bin weights making the 513-bin distance equal the full 1024-bin one.
double bin_weight(long b) { return (b == 0 || b == kFftSize / 2) ? 1.0 : 2.0; }

double consistency_error(const ComplexSpectrogram& c, const Tensor& target) {
  double acc = 0.0;
  for (long b = 0; b < c.bins; ++b) {
    const double w = bin_weight(b);
    for (long t = 0; t < c.frames; ++t) {
      const double d = std::abs(c.at(b, t)) - target[b * c.frames + t];
      acc += w * d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

GriffinLimResult griffin_lim(const Tensor& target_magnitudes, int iterations) {
  if (iterations < 1) throw DataError("griffin_lim: iterations must be >= 1");
  if (target_magnitudes.rank() != 2 ||
      target_magnitudes.dim(0) != kFreqBins ||
      target_magnitudes.dim(1) != kClipFrames)
    throw DataError("griffin_lim: expected a 513x81 magnitude grid, got " +
                    target_magnitudes.shape_str());
  for (long i = 0; i < target_magnitudes.numel(); ++i) {
    const double v = target_magnitudes[i];
    if (std::isnan(v)) throw NumericError("griffin_lim: NaN in target magnitudes");
    if (v < 0.0) throw DataError("griffin_lim: negative target magnitude");
  }

  const long bins = target_magnitudes.dim(0);
  const long frames = target_magnitudes.dim(1);

  // Zero initial phase.
  ComplexSpectrogram s(bins, frames);
  for (long b = 0; b < bins; ++b)
    for (long t = 0; t < frames; ++t)
      s.at(b, t) = {target_magnitudes[b * frames + t], 0.0};

  GriffinLimResult result;
  result.consistency_errors.reserve(static_cast<size_t>(iterations));
  AudioClip clip;
  for (int it = 0; it < iterations; ++it) {
    clip = istft_clip(s);
    ComplexSpectrogram c = stft_complex(clip);
    result.consistency_errors.push_back(consistency_error(c, target_magnitudes));
    for (long b = 0; b < bins; ++b)
      for (long t = 0; t < frames; ++t) {
        const std::complex<double> v = c.at(b, t);
        const double a = std::abs(v);
        const std::complex<double> phase =
            a > 1e-300 ? v / a : std::complex<double>(1.0, 0.0);
        s.at(b, t) = target_magnitudes[b * frames + t] * phase;
      }
  }
  result.clip = istft_clip(s);
  return result;
}

}  // namespace sgan::dsp
