// src/dsp/stft.cpp
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

#include "sgan/dsp/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace sgan::dsp {

namespace {

// Shared FFTW plans for the fixed 1024-point transform. Plan creation is
// not thread-safe, execution through the new-array interface is.
class RealFft {
 public:
  explicit RealFft(long n) : n_(n) {
    std::vector<double> re(static_cast<size_t>(n));
    std::vector<fftw_complex> cx(static_cast<size_t>(n / 2 + 1));
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cx.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cx.data(), re.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !inv_) throw NumericError("FFTW plan creation failed");
  }

  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  void forward(double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(fwd_, in, reinterpret_cast<fftw_complex*>(out));
  }

  // c2r destroys its input; callers pass a scratch copy. Output unscaled,
  // divide by n for the inverse transform.
  void inverse(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(in), out);
  }

  long size() const { return n_; }

 private:
  long n_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

const RealFft& shared_fft() {
  static std::mutex mu;
  static RealFft* fft = nullptr;
  std::lock_guard<std::mutex> lock(mu);
  if (!fft) fft = new RealFft(kFftSize);
  return *fft;
}

}  // namespace

std::vector<double> hann_window(long n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                              static_cast<double>(n)));
  return w;
}

ComplexSpectrogram stft_complex(const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw DataError("stft: sample rate " + std::to_string(clip.sample_rate) +
                    " Hz requires resampling; expected 16000 Hz");
  if (static_cast<long>(clip.samples.size()) != kClipSamples)
    throw DataError("stft: clip must hold exactly 16000 samples");
  for (double v : clip.samples)
    if (!std::isfinite(v)) throw NumericError("stft: non-finite sample");

  const long pad = kFrameSize / 2;
  std::vector<double> padded(static_cast<size_t>(kClipSamples + 2 * pad), 0.0);
  std::copy(clip.samples.begin(), clip.samples.end(),
            padded.begin() + static_cast<long>(pad));

  const std::vector<double> win = hann_window(kFrameSize);
  const RealFft& fft = shared_fft();

  ComplexSpectrogram spec(kFreqBins, kClipFrames);
  std::vector<double> buf(static_cast<size_t>(kFftSize), 0.0);
  std::vector<std::complex<double>> out(static_cast<size_t>(kFreqBins));
  for (long t = 0; t < kClipFrames; ++t) {
    const double* src = padded.data() + t * kFrameHop;
    for (long i = 0; i < kFrameSize; ++i)
      buf[static_cast<size_t>(i)] = src[i] * win[static_cast<size_t>(i)];
    std::fill(buf.begin() + kFrameSize, buf.end(), 0.0);
    fft.forward(buf.data(), out.data());
    for (long b = 0; b < kFreqBins; ++b) spec.at(b, t) = out[static_cast<size_t>(b)];
  }
  return spec;
}

MagnitudeSpectrogram stft(const AudioClip& clip) {
  ComplexSpectrogram spec = stft_complex(clip);
  MagnitudeSpectrogram mag;
  mag.values = Tensor({spec.bins, spec.frames});
  for (long b = 0; b < spec.bins; ++b)
    for (long t = 0; t < spec.frames; ++t)
      mag.values[b * spec.frames + t] = std::abs(spec.at(b, t));
  return mag;
}

std::vector<double> istft(const ComplexSpectrogram& spec,
                          const std::vector<double>& window, long hop,
                          long out_length, bool center) {
  if (spec.frames < 1) throw DataError("istft: empty spectrogram");
  const long wlen = static_cast<long>(window.size());
  const long span = (spec.frames - 1) * hop + wlen;
  const long crop = center ? wlen / 2 : 0;
  if (crop + out_length > span)
    throw NumericError(
        "istft: requested samples beyond frame coverage have zero window "
        "energy");

  const RealFft& fft = shared_fft();
  if (spec.bins != fft.size() / 2 + 1)
    throw DataError("istft: bin count does not match the FFT size");

  std::vector<double> acc(static_cast<size_t>(span), 0.0);
  std::vector<double> den(static_cast<size_t>(span), 0.0);
  std::vector<std::complex<double>> scratch(static_cast<size_t>(spec.bins));
  std::vector<double> frame(static_cast<size_t>(kFftSize), 0.0);
  const double scale = 1.0 / static_cast<double>(kFftSize);

  for (long t = 0; t < spec.frames; ++t) {
    for (long b = 0; b < spec.bins; ++b)
      scratch[static_cast<size_t>(b)] = spec.at(b, t);
    fft.inverse(scratch.data(), frame.data());
    double* a = acc.data() + t * hop;
    double* d = den.data() + t * hop;
    for (long i = 0; i < wlen; ++i) {
      const double w = window[static_cast<size_t>(i)];
      a[i] += w * frame[static_cast<size_t>(i)] * scale;
      d[i] += w * w;
    }
  }

  std::vector<double> out(static_cast<size_t>(out_length), 0.0);
  for (long i = 0; i < out_length; ++i) {
    const double d = den[static_cast<size_t>(crop + i)];
    out[static_cast<size_t>(i)] =
        d > 1e-12 ? acc[static_cast<size_t>(crop + i)] / d : 0.0;
  }
  return out;
}

AudioClip istft_clip(const ComplexSpectrogram& spec) {
  AudioClip clip;
  clip.samples =
      istft(spec, hann_window(kFrameSize), kFrameHop, kClipSamples, true);
  return clip;
}

}  // namespace sgan::dsp
