// src/dsp/mel.cpp
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

#include "sgan/dsp/mel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sgan/dsp/griffin_lim.hpp"

namespace sgan::dsp {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kCondWarnThreshold = 1e8;

}  // namespace

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

MelFilterbank mel_filterbank_matrix(long n_mels, double f_min, double f_max,
                                    long fft_size, double sample_rate) {
  if (!(f_min < f_max) || f_max > sample_rate / 2.0)
    throw DataError("mel filterbank: need f_min < f_max <= sample_rate/2");
  const long bins = fft_size / 2 + 1;
  if (n_mels + 2 > bins)
    throw DataError("mel filterbank: " + std::to_string(n_mels) +
                    " filters need more FFT bins (filters would be empty)");

  // n_mels + 2 = 130 mel-equally-spaced edge points; filter k rises over
  // (edge k, edge k+1) and falls over (edge k+1, edge k+2).
  std::vector<double> edges(static_cast<size_t>(n_mels + 2));
  const double mlo = hz_to_mel(f_min), mhi = hz_to_mel(f_max);
  for (long i = 0; i < n_mels + 2; ++i)
    edges[static_cast<size_t>(i)] = mel_to_hz(
        mlo + (mhi - mlo) * static_cast<double>(i) /
                  static_cast<double>(n_mels + 1));

  MelFilterbank fb;
  fb.fft_size = fft_size;
  fb.sample_rate = sample_rate;
  fb.weights = Tensor({n_mels, bins});
  fb.center_hz.resize(static_cast<size_t>(n_mels));
  const double hz_per_bin = sample_rate / static_cast<double>(fft_size);

  for (long k = 0; k < n_mels; ++k) {
    const double lo = edges[static_cast<size_t>(k)];
    const double mid = edges[static_cast<size_t>(k + 1)];
    const double hi = edges[static_cast<size_t>(k + 2)];
    fb.center_hz[static_cast<size_t>(k)] = mid;
    double peak = 0.0;
    for (long b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * hz_per_bin;
      double w = 0.0;
      if (f > lo && f < hi)
        w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      fb.weights[k * bins + b] = w;
      peak = std::max(peak, w);
    }
    if (peak <= 0.0)
      throw DataError("mel filterbank: filter " + std::to_string(k) +
                      " covers no FFT bin");
    for (long b = 0; b < bins; ++b) fb.weights[k * bins + b] /= peak;
  }

  // Pseudoinverse for the inversion path, plus its condition number.
  Eigen::Map<const RowMat> w(fb.weights.data(), n_mels, bins);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  fb.condition_number = sv(0) / sv(sv.size() - 1);
  Eigen::VectorXd inv_sv(sv.size());
  const double tol = sv(0) * 1e-12;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv_sv(i) = sv(i) > tol ? 1.0 / sv(i) : 0.0;
  Eigen::MatrixXd pinv =
      svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  fb.pinv_weights = Tensor({bins, n_mels});
  Eigen::Map<RowMat>(fb.pinv_weights.data(), bins, n_mels) = pinv;
  return fb;
}

void validate_mel(const MelSpectrogram& mel) {
  if (mel.values.rank() != 2 || mel.values.dim(0) != kMelBands ||
      mel.values.dim(1) != kMelFrames)
    throw DataError("mel spectrogram must be 128x128, got " +
                    mel.values.shape_str());
  for (long i = 0; i < mel.values.numel(); ++i) {
    const double v = mel.values[i];
    if (!std::isfinite(v)) throw NumericError("mel spectrogram: non-finite value");
    if (v < mel.db_floor - 1e-9)
      throw DataError("mel spectrogram: value below the dB floor");
  }
}

MelSpectrogram audio_to_mel(const AudioClip& clip, const MelFilterbank& fb) {
  MagnitudeSpectrogram mag = stft(clip);
  const long bins = fb.weights.dim(1);
  const long n_mels = fb.weights.dim(0);
  if (mag.values.dim(0) != bins)
    throw DataError("audio_to_mel: filterbank/FFT size mismatch");

  Eigen::Map<const RowMat> w(fb.weights.data(), n_mels, bins);
  Eigen::Map<const RowMat> m(mag.values.data(), bins, mag.values.dim(1));
  RowMat melmag = w * m;  // (128, 81)

  MelSpectrogram mel;
  mel.values = Tensor::full({kMelBands, kMelFrames}, kDbFloor);
  for (long k = 0; k < n_mels; ++k)
    for (long t = 0; t < mag.values.dim(1); ++t) {
      const double v = std::max(melmag(k, t), kMagFloor);
      mel.values[k * kMelFrames + (kMelPadLeft + t)] = 20.0 * std::log10(v);
    }
  return mel;
}

AudioClip mel_to_audio(const MelSpectrogram& mel, const MelFilterbank& fb,
                       int iterations) {
  validate_mel(mel);
  if (fb.condition_number > kCondWarnThreshold)
    log_warn("mel filterbank pseudoinverse is ill-conditioned (cond = " +
             std::to_string(fb.condition_number) + "); proceeding");

  const long n_mels = fb.weights.dim(0);
  const long bins = fb.weights.dim(1);

  // Drop the pad columns, keep the 81 natural frames, undo the log.
  RowMat melmag(n_mels, kClipFrames);
  for (long k = 0; k < n_mels; ++k)
    for (long t = 0; t < kClipFrames; ++t)
      melmag(k, t) =
          std::pow(10.0, mel.values[k * kMelFrames + (kMelPadLeft + t)] / 20.0);

  Eigen::Map<const RowMat> pinv(fb.pinv_weights.data(), bins, n_mels);
  RowMat linmag = pinv * melmag;  // (513, 81)

  Tensor target({bins, kClipFrames});
  for (long b = 0; b < bins; ++b)
    for (long t = 0; t < kClipFrames; ++t)
      target[b * kClipFrames + t] = std::max(linmag(b, t), 0.0);

  return griffin_lim(target, iterations).clip;
}

}  // namespace sgan::dsp
