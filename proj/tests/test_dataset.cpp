// tests/test_dataset.cpp
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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sgan/data/dataset.hpp"
#include "sgan/dsp/wav.hpp"
#include "test_util.hpp"

using namespace sgan;
using namespace sgan::data;
using sgan::testing::TempDir;
using sgan::testing::make_tone;

namespace {

// Root with all ten digit directories; a few tones under "zero".
void make_fixture(const TempDir& tmp, int zero_files) {
  for (const std::string& w : digit_words())
    std::filesystem::create_directories(tmp.path() / w);
  for (int i = 0; i < zero_files; ++i)
    dsp::write_wav((tmp.path() / "zero" / ("f" + std::to_string(i) + ".wav")).string(),
                   make_tone(300.0 + 100.0 * i, 0.4));
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("scan_dataset finds wav files with digit labels in stable order") {
  TempDir tmp;
  make_fixture(tmp, 3);
  auto entries = scan_dataset(tmp.path().string(), digit_words());
  REQUIRE(entries.size() == 3);
  for (const auto& e : entries) CHECK(e.label == 0);
  CHECK(entries[0].path < entries[1].path);
  CHECK(entries[1].path < entries[2].path);

  auto again = scan_dataset(tmp.path().string(), digit_words());
  for (size_t i = 0; i < entries.size(); ++i)
    CHECK(entries[i].path == again[i].path);
}

TEST_CASE("scan_dataset reports missing class directories") {
  TempDir tmp;
  std::filesystem::create_directories(tmp.path() / "zero");
  try {
    scan_dataset(tmp.path().string(), digit_words());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("nine") != std::string::npos);
    CHECK(msg.find("one") != std::string::npos);
    CHECK(msg.find("zero") == std::string::npos);
  }
}

TEST_CASE("scan_dataset on an empty root lists every class as missing") {
  TempDir tmp;
  CHECK_THROWS_AS(scan_dataset(tmp.path().string(), digit_words()), DataError);
}

TEST_CASE("preprocess_cache writes records and is idempotent") {
  TempDir tmp;
  make_fixture(tmp, 3);
  auto entries = scan_dataset(tmp.path().string(), digit_words());

  PreprocessReport r1 = preprocess_cache(entries, tmp.str("cache.bin"));
  CHECK(r1.written == 3);
  CHECK(r1.skipped == 0);
  MelCache cache = MelCache::load(tmp.str("cache.bin"));
  CHECK(cache.count() == 3);

  const std::string first = file_bytes(tmp.str("cache.bin"));
  preprocess_cache(entries, tmp.str("cache.bin"));
  CHECK(file_bytes(tmp.str("cache.bin")) == first);
}

TEST_CASE("preprocess_cache skips corrupt files with a count") {
  TempDir tmp;
  make_fixture(tmp, 3);
  {
    std::ofstream bad((tmp.path() / "zero" / "corrupt.wav").string(),
                      std::ios::binary);
    bad << "not really audio";
  }
  auto entries = scan_dataset(tmp.path().string(), digit_words());
  REQUIRE(entries.size() == 4);
  PreprocessReport r = preprocess_cache(entries, tmp.str("cache.bin"));
  CHECK(r.written == 3);
  CHECK(r.skipped == 1);
  CHECK(MelCache::load(tmp.str("cache.bin")).count() == 3);
}

TEST_CASE("cache round trip is bit exact") {
  TempDir tmp;
  MelCache cache;
  Tensor mel = Tensor::full({128, 128}, -40.0);
  mel[5 * 128 + 7] = -3.25;
  cache.append(4, mel);
  cache.save(tmp.str("c.bin"));
  MelCache back = MelCache::load(tmp.str("c.bin"));
  REQUIRE(back.count() == 1);
  CHECK(back.label(0) == 4);
  Tensor m2 = back.mel_db(0);
  for (long i = 0; i < m2.numel(); ++i) CHECK(m2[i] == mel[i]);
}

TEST_CASE("cache load rejects truncation and bad magic") {
  TempDir tmp;
  MelCache cache;
  cache.append(1, Tensor::full({128, 128}, -40.0));
  cache.save(tmp.str("c.bin"));
  std::string bytes = file_bytes(tmp.str("c.bin"));
  {
    std::ofstream out(tmp.str("trunc.bin"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(MelCache::load(tmp.str("trunc.bin")), DataError);
  {
    std::ofstream out(tmp.str("bad.bin"), std::ios::binary);
    out << "XXXX" << bytes.substr(4);
  }
  CHECK_THROWS_AS(MelCache::load(tmp.str("bad.bin")), DataError);
}

TEST_CASE("downsample_mel averages blocks") {
  Tensor block = Tensor::from({2, 2}, {0.0, 2.0, 2.0, 4.0});
  Tensor one = downsample_mel(block, 1);
  CHECK(one[0] == doctest::Approx(2.0));

  Tensor constant = Tensor::full({128, 128}, -7.5);
  for (long r : {8L, 16L, 32L, 64L, 128L}) {
    Tensor level = downsample_mel(constant, r);
    REQUIRE(level.dim(0) == r);
    for (long i = 0; i < level.numel(); ++i)
      CHECK(level[i] == doctest::Approx(-7.5));
  }

  Tensor identity = downsample_mel(constant, 128);
  CHECK(identity.numel() == constant.numel());

  CHECK_THROWS_AS(downsample_mel(constant, 7), DataError);
  CHECK_THROWS_AS(downsample_mel(constant, 0), DataError);
}

TEST_CASE("build_pyramid keeps constants constant at every level") {
  auto levels = build_pyramid(Tensor::full({128, 128}, -12.0));
  for (const auto& [r, grid] : levels) {
    CHECK(grid.dim(0) == r);
    for (long i = 0; i < grid.numel(); ++i)
      CHECK(grid[i] == doctest::Approx(-12.0));
  }
}

TEST_CASE("next_batch is seed-deterministic with the right shapes") {
  MelCache cache;
  for (int i = 0; i < 10; ++i)
    cache.append(i % 2, Tensor::full({128, 128}, -40.0 + i));

  Batch a = next_batch(cache, 32, 16, 99);
  Batch b = next_batch(cache, 32, 16, 99);
  REQUIRE(a.mels.shape() == std::vector<long>({32, 1, 16, 16}));
  REQUIRE(a.labels.size() == 32);
  for (long i = 0; i < a.mels.numel(); ++i) CHECK(a.mels[i] == b.mels[i]);
  CHECK(a.labels == b.labels);

  Batch c = next_batch(cache, 32, 16, 100);
  bool same = true;
  for (long i = 0; i < c.mels.numel() && same; ++i)
    same = (c.mels[i] == a.mels[i]);
  CHECK(!same);
}

TEST_CASE("next_batch rejects an empty cache") {
  MelCache cache;
  CHECK_THROWS_AS(next_batch(cache, 4, 8, 1), DataError);
}

TEST_CASE("next_batch label histogram tracks dataset proportions") {
  MelCache cache;
  // 3:1 class imbalance.
  for (int i = 0; i < 40; ++i)
    cache.append(i % 4 == 0 ? 1 : 0, Tensor::full({128, 128}, -40.0));

  long counts[2] = {0, 0};
  const long draws = 100000;
  const long per_batch = 1000;
  for (long b = 0; b < draws / per_batch; ++b) {
    Batch batch = next_batch(cache, per_batch, 8, 1234 + b);
    for (long l : batch.labels) ++counts[l];
  }
  const double p1 = static_cast<double>(counts[1]) / draws;
  CHECK(std::abs(p1 - 0.25) < 0.02);
}

TEST_CASE("next_batch values are the unit-range pyramid levels") {
  MelCache cache;
  cache.append(3, Tensor::full({128, 128}, -40.0));  // silence -> -1
  Batch b = next_batch(cache, 4, 8, 5);
  for (long i = 0; i < b.mels.numel(); ++i)
    CHECK(b.mels[i] == doctest::Approx(-1.0));
  for (long l : b.labels) CHECK(l == 3);
}
