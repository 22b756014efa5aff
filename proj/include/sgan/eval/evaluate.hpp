// sgan/eval/evaluate.hpp
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

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sgan/data/dataset.hpp"
#include "sgan/eval/adapters.hpp"
#include "sgan/eval/cer.hpp"
#include "sgan/eval/classifier.hpp"
#include "sgan/eval/stats.hpp"
#include "sgan/gan/generator.hpp"

namespace sgan::eval {

// Conditionally samples n mels (unit range, (n,1,r,r)) at the given stage,
// fully determined by the seed; labels choose the conditioning digit.
Tensor sample_generated_mels(const gan::Generator& g,
                             const std::vector<long>& labels, long resolution,
                             std::uint64_t seed);

// Resizes a square mel grid between pyramid resolutions (block averaging
// down, bilinear up).
Tensor fit_mel_grid(const Tensor& grid, long target);

// Unit-range grid -> decibel MelSpectrogram on the 128x128 grid, floored
// at the -40 dB minimum so it satisfies the mel invariants.
dsp::MelSpectrogram mel_from_unit_grid(const Tensor& grid);

// Classifier activations of every cache record at the classifier's input
// resolution, one row per record.
Tensor cache_activations(const DigitClassifier& clf,
                         const data::MelCache& cache);

// Frechet distance between the real cache and n_samples generated mels in
// classifier feature space. The classifier input resolution must match
// `resolution`.
double evaluate_fd_classifier(const gan::Generator& g,
                              const DigitClassifier& clf,
                              const data::MelCache& real_cache,
                              long resolution, long n_samples,
                              std::uint64_t seed);

// Frechet distance in an external embedding space: both sides rendered to
// audio with Griffin-Lim and embedded via the provider command. Provider
// failures raise an error.
double evaluate_fd_embedding(const gan::Generator& g,
                             const EmbeddingProvider& provider,
                             const data::MelCache& real_cache,
                             const dsp::MelFilterbank& fb, long n_real,
                             long n_samples, int gl_iterations,
                             std::uint64_t seed, const std::string& workdir);

struct CerRecord {
  long index = 0;
  int conditioned_digit = -1;  // -1 when scoring an audio directory
  int pseudo_label = 0;
  std::string reference;
  std::string hypothesis;
  double value = 0.0;
};

struct CerReport {
  std::vector<CerRecord> records;  // scored samples only
  long failures = 0;               // transcriber failures, excluded
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  std::map<int, double> per_digit_median;  // keyed by pseudo label
};

// Generates samples_per_digit mels per digit, inverts them to audio,
// transcribes through the adapter, and scores CER against the digit word
// implied by the classifier's pseudo-label. Per-sample records plus a
// summary block go to *report when given (tab-separated).
CerReport evaluate_cer_generator(const gan::Generator& g,
                                 const DigitClassifier& clf,
                                 const TranscriberAdapter& adapter,
                                 const dsp::MelFilterbank& fb,
                                 long samples_per_digit, int gl_iterations,
                                 std::uint64_t seed,
                                 const std::string& workdir,
                                 std::ostream* report);

// Same scoring over existing WAV files (pseudo-labels from their mels).
CerReport evaluate_cer_audio_dir(const std::string& audio_dir,
                                 const DigitClassifier& clf,
                                 const TranscriberAdapter& adapter,
                                 const dsp::MelFilterbank& fb,
                                 std::ostream* report);

}  // namespace sgan::eval
