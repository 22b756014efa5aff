// src/data/dataset.cpp
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

#include "sgan/data/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sgan/dsp/wav.hpp"
#include "sgan/rng.hpp"

namespace fs = std::filesystem;

namespace sgan::data {

namespace {

constexpr char kCacheMagic[4] = {'M', 'E', 'L', 'C'};
constexpr std::uint32_t kCacheVersion = 1;
constexpr long kMelCells = dsp::kMelBands * dsp::kMelFrames;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("mel cache: truncated " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

const std::vector<std::string>& digit_words() {
  static const std::vector<std::string> words = {
      "zero", "one", "two",   "three", "four",
      "five", "six", "seven", "eight", "nine"};
  return words;
}

std::vector<DatasetEntry> scan_dataset(const std::string& root_dir,
                                       const std::vector<std::string>& class_names) {
  std::vector<std::string> missing;
  std::vector<DatasetEntry> entries;
  for (size_t label = 0; label < class_names.size(); ++label) {
    const fs::path dir = fs::path(root_dir) / class_names[label];
    if (!fs::is_directory(dir)) {
      missing.push_back(class_names[label]);
      continue;
    }
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      if (e.path().extension() != ".wav") continue;
      entries.push_back({e.path().string(), static_cast<int>(label)});
    }
  }
  if (!missing.empty()) {
    std::string msg = "dataset root " + root_dir + " is missing class directories:";
    for (const std::string& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) {
              return a.path < b.path;
            });
  return entries;
}

Tensor MelCache::mel_db(long i) const {
  if (i < 0 || i >= count()) throw DataError("mel cache: record index out of range");
  Tensor t({dsp::kMelBands, dsp::kMelFrames});
  const float* src = mels_.data() + i * kMelCells;
  for (long j = 0; j < kMelCells; ++j) t[j] = static_cast<double>(src[j]);
  return t;
}

int MelCache::num_classes() const {
  int m = 0;
  for (unsigned char l : labels_) m = std::max(m, static_cast<int>(l) + 1);
  return m;
}

void MelCache::append(int label, const Tensor& mel_db) {
  if (label < 0 || label > 255) throw DataError("mel cache: label out of range");
  if (mel_db.rank() != 2 || mel_db.dim(0) != dsp::kMelBands ||
      mel_db.dim(1) != dsp::kMelFrames)
    throw DataError("mel cache: record must be 128x128");
  labels_.push_back(static_cast<unsigned char>(label));
  const size_t base = mels_.size();
  mels_.resize(base + kMelCells);
  for (long j = 0; j < kMelCells; ++j)
    mels_[base + static_cast<size_t>(j)] = static_cast<float>(mel_db[j]);
}

void MelCache::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write mel cache: " + path);
  out.write(kCacheMagic, 4);
  put_u32(out, kCacheVersion);
  put_u32(out, static_cast<std::uint32_t>(count()));
  for (long i = 0; i < count(); ++i) {
    out.put(static_cast<char>(labels_[static_cast<size_t>(i)]));
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(mels_.data() + i * kMelCells),
              kMelCells * 4);
  }
  if (!out) throw DataError("short write to mel cache: " + path);
}

MelCache MelCache::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mel cache: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0)
    throw DataError("not a mel cache file: " + path);
  const std::uint32_t version = get_u32(in, "version");
  if (version != kCacheVersion)
    throw DataError("mel cache version " + std::to_string(version) +
                    " unsupported (expected " + std::to_string(kCacheVersion) + ")");
  const std::uint32_t n = get_u32(in, "record count");
  MelCache cache;
  cache.labels_.resize(n);
  cache.mels_.resize(static_cast<size_t>(n) * kMelCells);
  for (std::uint32_t i = 0; i < n; ++i) {
    int c = in.get();
    if (c == EOF) throw DataError("mel cache: truncated record header in " + path);
    cache.labels_[i] = static_cast<unsigned char>(c);
    in.read(reinterpret_cast<char*>(cache.mels_.data() +
                                    static_cast<size_t>(i) * kMelCells),
            kMelCells * 4);
    if (!in) throw DataError("mel cache: truncated record data in " + path);
  }
  return cache;
}

PreprocessReport preprocess_cache(const std::vector<DatasetEntry>& entries,
                                  const std::string& cache_path) {
  const dsp::MelFilterbank fb = dsp::mel_filterbank_matrix(
      dsp::kMelBands, dsp::kMelFMin, dsp::kMelFMax, dsp::kFftSize,
      dsp::kSampleRate);
  MelCache cache;
  PreprocessReport report;
  for (const DatasetEntry& e : entries) {
    try {
      dsp::AudioClip clip = dsp::read_wav(e.path);
      dsp::MelSpectrogram mel = dsp::audio_to_mel(clip, fb);
      cache.append(e.label, mel.values);
      ++report.written;
      ++report.per_class[e.label];
    } catch (const Error& err) {
      log_warn("skipping " + e.path + ": " + err.what());
      ++report.skipped;
    }
  }
  cache.save(cache_path);
  log_info("mel cache written: " + std::to_string(report.written) +
           " records, " + std::to_string(report.skipped) + " skipped");
  return report;
}

Tensor downsample_mel(const Tensor& mel, long target) {
  if (mel.rank() != 2 || mel.dim(0) != mel.dim(1))
    throw DataError("downsample_mel: square grid required");
  const long src = mel.dim(0);
  if (target <= 0 || src % target != 0)
    throw DataError("downsample_mel: unsupported target resolution " +
                    std::to_string(target));
  if (target == src) return mel.clone();
  const long f = src / target;
  Tensor out({target, target});
  const double inv = 1.0 / static_cast<double>(f * f);
  for (long i = 0; i < target; ++i)
    for (long j = 0; j < target; ++j) {
      double acc = 0.0;
      for (long u = 0; u < f; ++u)
        for (long v = 0; v < f; ++v)
          acc += mel[(i * f + u) * src + (j * f + v)];
      out[i * target + j] = acc * inv;
    }
  return out;
}

std::map<long, Tensor> build_pyramid(const Tensor& mel128) {
  std::map<long, Tensor> levels;
  for (long r : {8L, 16L, 32L, 64L, 128L}) levels[r] = downsample_mel(mel128, r);
  return levels;
}

Batch next_batch(const MelCache& cache, long batch_size, long resolution,
                 std::uint64_t rng_seed) {
  if (cache.count() == 0) throw DataError("next_batch: empty mel cache");
  if (batch_size < 1) throw DataError("next_batch: batch_size must be >= 1");
  RandomEngine rng(rng_seed);
  Batch batch;
  batch.mels = Tensor({batch_size, 1, resolution, resolution});
  batch.labels.resize(static_cast<size_t>(batch_size));
  const long cells = resolution * resolution;
  for (long i = 0; i < batch_size; ++i) {
    const long idx = rng.uniform_int(cache.count());
    batch.labels[static_cast<size_t>(i)] = cache.label(idx);
    Tensor level = downsample_mel(cache.mel_db(idx), resolution);
    for (long j = 0; j < cells; ++j)
      batch.mels[i * cells + j] = dsp::db_to_unit(level[j]);
  }
  return batch;
}

}  // namespace sgan::data
