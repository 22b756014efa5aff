// sgan/data/dataset.hpp
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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgan/dsp/mel.hpp"
#include "sgan/tensor.hpp"

namespace sgan::data {

// The ten digit words of the Speech Commands subset, label order 0..9.
const std::vector<std::string>& digit_words();

struct DatasetEntry {
  std::string path;
  int label = 0;
};

// Expects <root>/<word>/<file>.wav as distributed by the Speech Commands
// corpus; returns entries for the given classes in stable lexicographic
// path order. Missing class directories raise an error naming them all.
std::vector<DatasetEntry> scan_dataset(const std::string& root_dir,
                                       const std::vector<std::string>& class_names);

// Preprocessed mel cache. Records hold raw decibel values; batches are
// served in the network's [-1, 1] range.
class MelCache {
 public:
  long count() const { return static_cast<long>(labels_.size()); }
  int label(long i) const { return labels_[static_cast<size_t>(i)]; }
  Tensor mel_db(long i) const;  // (128, 128) decibels
  int num_classes() const;

  void append(int label, const Tensor& mel_db);

  static MelCache load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<unsigned char> labels_;
  std::vector<float> mels_;  // count * 128 * 128, row-major, decibels
};

struct PreprocessReport {
  long written = 0;
  long skipped = 0;
  std::map<int, long> per_class;
};

// Converts every clip with audio_to_mel and writes the cache; undecodable
// files are skipped with a warning. Re-running on unchanged input produces
// a byte-identical file.
PreprocessReport preprocess_cache(const std::vector<DatasetEntry>& entries,
                                  const std::string& cache_path);

// Area-consistent bilinear reduction (block averaging for the power-of-two
// factors used here). target must divide the input size; equal sizes pass
// through unchanged.
Tensor downsample_mel(const Tensor& mel, long target);

// All pyramid levels of a 128x128 source, keyed by resolution.
std::map<long, Tensor> build_pyramid(const Tensor& mel128);

struct Batch {
  Tensor mels;  // (N, 1, r, r), unit range
  std::vector<long> labels;
};

// Uniform sampling with replacement, driven entirely by the seed.
Batch next_batch(const MelCache& cache, long batch_size, long resolution,
                 std::uint64_t rng_seed);

}  // namespace sgan::data
