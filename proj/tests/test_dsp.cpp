// tests/test_dsp.cpp
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

#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "sgan/dsp/griffin_lim.hpp"
#include "sgan/dsp/mel.hpp"
#include "sgan/dsp/stft.hpp"
#include "sgan/dsp/wav.hpp"
#include "sgan/rng.hpp"
#include "test_util.hpp"

using namespace sgan;
using namespace sgan::dsp;
using sgan::testing::TempDir;
using sgan::testing::make_silence;
using sgan::testing::make_tone;

namespace {

AudioClip random_clip(RandomEngine& rng, double amp = 0.3) {
  AudioClip clip;
  clip.samples.resize(kClipSamples);
  for (auto& s : clip.samples) s = amp * (2.0 * rng.uniform() - 1.0);
  return clip;
}

double pearson(const Tensor& a, const Tensor& b) {
  const long n = a.numel();
  double ma = 0, mb = 0;
  for (long i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (long i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("stft of silence is all zeros with 81 frames") {
  MagnitudeSpectrogram mag = stft(make_silence());
  CHECK(mag.values.dim(0) == 513);
  CHECK(mag.values.dim(1) == 81);
  for (long i = 0; i < mag.values.numel(); ++i) CHECK(mag.values[i] == 0.0);
}

TEST_CASE("stft of a 1 kHz tone peaks at bin 64 in every frame") {
  MagnitudeSpectrogram mag = stft(make_tone(1000.0, 1.0));
  const long frames = mag.values.dim(1);
  for (long t = 0; t < frames; ++t) {
    long arg = 0;
    double best = -1.0;
    for (long b = 0; b < mag.values.dim(0); ++b)
      if (mag.values[b * frames + t] > best) {
        best = mag.values[b * frames + t];
        arg = b;
      }
    CHECK(arg == 64);  // round(1000 * 1024 / 16000)
  }
}

TEST_CASE("stft rejects non-16 kHz input") {
  AudioClip clip = make_silence();
  clip.sample_rate = 22050;
  CHECK_THROWS_AS(stft(clip), DataError);
}

TEST_CASE("istft(stft_complex(x)) reconstructs x to 1e-6") {
  RandomEngine rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    AudioClip clip = random_clip(rng);
    AudioClip rec = istft_clip(stft_complex(clip));
    double err = 0.0;
    for (long i = 0; i < kClipSamples; ++i)
      err = std::max(err, std::abs(rec.samples[i] - clip.samples[i]));
    CHECK(err < 1e-6);
  }
}

TEST_CASE("istft of an all-zero spectrogram is silence") {
  ComplexSpectrogram spec(kFreqBins, kClipFrames);
  AudioClip clip = istft_clip(spec);
  for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("istft of a single windowed frame recovers the frame content") {
  // Degenerate overlap-add: one frame whose spectrum came from windowed
  // content. The least-squares inverse returns that content wherever the
  // window carries energy and silence where it does not.
  RandomEngine rng(7);
  std::vector<double> win = hann_window(kFrameSize);
  std::vector<double> content(kFrameSize);
  for (auto& v : content) v = 2.0 * rng.uniform() - 1.0;

  // Spectrum of the windowed content through the same transform chain,
  // placed at the grid position of frame 2 so it lines up exactly.
  ComplexSpectrogram single(kFreqBins, 1);
  {
    AudioClip probe = make_silence();
    const long start = 2 * kFrameHop - kFrameSize / 2;
    for (long i = 0; i < kFrameSize; ++i) {
      const long p = start + i;
      if (p >= 0 && p < kClipSamples) probe.samples[p] = content[i];
    }
    ComplexSpectrogram ps = stft_complex(probe);
    for (long b = 0; b < kFreqBins; ++b) single.at(b, 0) = ps.at(b, 2);
  }
  std::vector<double> out = istft(single, win, kFrameHop, kFrameSize, false);
  for (long i = 0; i < kFrameSize; ++i) {
    if (win[i] * win[i] > 1e-12)
      CHECK(out[i] == doctest::Approx(content[i]).epsilon(1e-9));
    else
      CHECK(out[i] == 0.0);
  }
}

TEST_CASE("istft rejects requests beyond frame coverage") {
  ComplexSpectrogram spec(kFreqBins, 2);
  std::vector<double> win = hann_window(kFrameSize);
  CHECK_THROWS_AS(istft(spec, win, kFrameHop, kFrameSize + kFrameHop + 1, false),
                  NumericError);
}

TEST_CASE("mel scale closed form") {
  CHECK(hz_to_mel(700.0) == doctest::Approx(781.17).epsilon(1e-4));
  CHECK(mel_to_hz(hz_to_mel(3456.0)) == doctest::Approx(3456.0));
}

TEST_CASE("mel filterbank construction") {
  MelFilterbank fb = mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize,
                                           kSampleRate);
  REQUIRE(fb.weights.dim(0) == 128);
  REQUIRE(fb.weights.dim(1) == 513);
  const double hz_per_bin = 16000.0 / 1024.0;

  for (long k = 0; k < 128; ++k) {
    double rowmax = 0.0;
    bool nonzero = false;
    for (long b = 0; b < 513; ++b) {
      const double w = fb.weights[k * 513 + b];
      CHECK(w >= 0.0);
      if (w > 0.0) {
        nonzero = true;
        const double f = b * hz_per_bin;
        CHECK(f > kMelFMin);
        CHECK(f < kMelFMax);
      }
      rowmax = std::max(rowmax, w);
    }
    CHECK(nonzero);
    CHECK(rowmax == doctest::Approx(1.0));
  }
  for (size_t k = 1; k < fb.center_hz.size(); ++k)
    CHECK(fb.center_hz[k] > fb.center_hz[k - 1]);
}

TEST_CASE("mel filterbank rejects too many filters") {
  CHECK_THROWS_AS(mel_filterbank_matrix(128, 125.0, 7600.0, 128, 16000.0),
                  DataError);
}

TEST_CASE("filterbank pseudoinverse acts as identity on the row space") {
  MelFilterbank fb =
      mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize, kSampleRate);
  // W * pinv(W) should be the 128x128 identity when rows are independent.
  const long n = 128, bins = 513;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      double acc = 0.0;
      for (long b = 0; b < bins; ++b)
        acc += fb.weights[i * bins + b] * fb.pinv_weights[b * n + j];
      CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
}

TEST_CASE("audio_to_mel of silence is the -40 dB floor everywhere") {
  MelFilterbank fb =
      mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize, kSampleRate);
  MelSpectrogram mel = audio_to_mel(make_silence(), fb);
  REQUIRE(mel.values.dim(0) == 128);
  REQUIRE(mel.values.dim(1) == 128);
  for (long i = 0; i < mel.values.numel(); ++i)
    CHECK(mel.values[i] == doctest::Approx(-40.0));
}

TEST_CASE("audio_to_mel outputs 128x128 above the floor and is deterministic") {
  MelFilterbank fb =
      mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize, kSampleRate);
  AudioClip tone = make_tone(1000.0, 0.5);
  MelSpectrogram a = audio_to_mel(tone, fb);
  MelSpectrogram b = audio_to_mel(tone, fb);
  CHECK(a.values.dim(0) == 128);
  CHECK(a.values.dim(1) == 128);
  for (long i = 0; i < a.values.numel(); ++i) {
    CHECK(a.values[i] >= -40.0);
    CHECK(a.values[i] == b.values[i]);  // bit-identical
  }
}

TEST_CASE("audio_to_mel 1 kHz tone peaks in the band nearest 1 kHz") {
  MelFilterbank fb =
      mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize, kSampleRate);
  MelSpectrogram mel = audio_to_mel(make_tone(1000.0, 0.5), fb);
  long nearest = 0;
  for (long k = 1; k < 128; ++k)
    if (std::abs(fb.center_hz[k] - 1000.0) <
        std::abs(fb.center_hz[nearest] - 1000.0))
      nearest = k;
  // Column in the middle of the real frames.
  const long t = 64;
  long arg = 0;
  for (long k = 1; k < 128; ++k)
    if (mel.values[k * 128 + t] > mel.values[arg * 128 + t]) arg = k;
  CHECK(arg == nearest);
}

TEST_CASE("griffin_lim of zero magnitudes is silence") {
  Tensor zero({kFreqBins, kClipFrames});
  GriffinLimResult r = griffin_lim(zero, 5);
  for (double s : r.clip.samples) CHECK(s == 0.0);
}

TEST_CASE("griffin_lim rejects NaN and negative targets") {
  Tensor bad({kFreqBins, kClipFrames});
  bad[100] = std::nan("");
  CHECK_THROWS_AS(griffin_lim(bad, 5), NumericError);

  Tensor neg({kFreqBins, kClipFrames});
  neg[7] = -0.25;
  CHECK_THROWS_AS(griffin_lim(neg, 5), DataError);
  CHECK_THROWS_AS(griffin_lim(Tensor({kFreqBins, kClipFrames}), 0), DataError);
}

TEST_CASE("griffin_lim consistency error is non-increasing on random targets") {
  RandomEngine rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor target({kFreqBins, kClipFrames});
    for (long i = 0; i < target.numel(); ++i) target[i] = rng.uniform();
    GriffinLimResult r = griffin_lim(target, 12);
    REQUIRE(r.consistency_errors.size() == 12);
    const double slack = 1e-9 * (1.0 + r.consistency_errors[0]);
    for (size_t i = 1; i < r.consistency_errors.size(); ++i)
      CHECK(r.consistency_errors[i] <= r.consistency_errors[i - 1] + slack);
  }
}

TEST_CASE("440 Hz tone round trip through griffin_lim correlates >= 0.95") {
  AudioClip tone = make_tone(440.0, 0.8);
  MagnitudeSpectrogram orig = stft(tone);
  GriffinLimResult r = griffin_lim(orig.values, 60);
  MagnitudeSpectrogram rec = stft(r.clip);
  CHECK(pearson(orig.values, rec.values) >= 0.95);
}

TEST_CASE("mel_to_audio round trip keeps the tone within one mel bandwidth") {
  MelFilterbank fb =
      mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize, kSampleRate);
  AudioClip tone = make_tone(1000.0, 0.5);
  MelSpectrogram mel = audio_to_mel(tone, fb);
  AudioClip rec = mel_to_audio(mel, fb, 30);

  MagnitudeSpectrogram mag = stft(rec);
  // Dominant frequency from the frame-averaged magnitude spectrum.
  std::vector<double> avg(513, 0.0);
  for (long b = 0; b < 513; ++b)
    for (long t = 0; t < 81; ++t) avg[b] += mag.values[b * 81 + t];
  long arg = 0;
  for (long b = 1; b < 513; ++b)
    if (avg[b] > avg[arg]) arg = b;
  const double dominant = arg * 16000.0 / 1024.0;

  long nearest = 0;
  for (long k = 1; k < 128; ++k)
    if (std::abs(fb.center_hz[k] - 1000.0) <
        std::abs(fb.center_hz[nearest] - 1000.0))
      nearest = k;
  const double bandwidth =
      fb.center_hz[nearest + 1] - fb.center_hz[nearest];
  CHECK(std::abs(dominant - 1000.0) <= bandwidth);
}

TEST_CASE("mel_to_audio of a floor-level mel is near silence") {
  MelFilterbank fb =
      mel_filterbank_matrix(128, kMelFMin, kMelFMax, kFftSize, kSampleRate);
  MelSpectrogram mel;
  mel.values = Tensor::full({128, 128}, -40.0);
  AudioClip rec = mel_to_audio(mel, fb, 10);
  double rms = 0.0;
  for (double s : rec.samples) rms += s * s;
  rms = std::sqrt(rms / static_cast<double>(rec.samples.size()));
  CHECK(rms < 0.01);
}

TEST_CASE("wav round trip, padding, and rejection") {
  TempDir tmp;
  AudioClip tone = make_tone(500.0, 0.4);
  write_wav(tmp.str("tone.wav"), tone);
  AudioClip back = read_wav(tmp.str("tone.wav"));
  REQUIRE(back.samples.size() == kClipSamples);
  double err = 0.0;
  for (long i = 0; i < kClipSamples; ++i)
    err = std::max(err, std::abs(back.samples[i] - tone.samples[i]));
  CHECK(err < 1.0 / 32000.0);  // 16-bit quantization

  // Short clips are zero-padded to one second.
  AudioClip half = make_tone(500.0, 0.4, 8000);
  write_wav(tmp.str("half.wav"), half);
  AudioClip padded = read_wav(tmp.str("half.wav"));
  REQUIRE(padded.samples.size() == kClipSamples);
  for (long i = 8000; i < kClipSamples; ++i) CHECK(padded.samples[i] == 0.0);

  // Longer clips are rejected.
  AudioClip longer = make_tone(500.0, 0.4, 16001);
  write_wav(tmp.str("long.wav"), longer);
  CHECK_THROWS_AS(read_wav(tmp.str("long.wav")), DataError);

  // Garbage is rejected.
  {
    std::ofstream f(tmp.str("junk.wav"), std::ios::binary);
    f << "this is not audio";
  }
  CHECK_THROWS_AS(read_wav(tmp.str("junk.wav")), DataError);
}
