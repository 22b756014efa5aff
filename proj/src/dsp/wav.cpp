// src/dsp/wav.cpp
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

#include "sgan/dsp/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace sgan::dsp {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data_ptr = nullptr;
  std::uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (body + len > bytes.size())
      throw DataError("truncated WAV chunk in " + path);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw DataError("malformed fmt chunk in " + path);
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_ptr = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr)
    throw DataError("WAV file missing fmt/data chunk: " + path);
  if (format != 1 || bits != 16)
    throw DataError("unsupported WAV encoding (need PCM 16-bit): " + path);
  if (channels != 1)
    throw DataError("unsupported channel count (need mono): " + path);
  if (rate != kSampleRate)
    throw DataError("sample rate " + std::to_string(rate) +
                    " Hz requires resampling; expected 16000 Hz: " + path);

  const long n = static_cast<long>(data_len / 2);
  if (n > kClipSamples)
    throw DataError("clip longer than one second (" + std::to_string(n) +
                    " samples): " + path);

  AudioClip clip;
  clip.samples.assign(kClipSamples, 0.0);
  for (long i = 0; i < n; ++i) {
    const std::int16_t s = static_cast<std::int16_t>(
        data_ptr[2 * i] | (data_ptr[2 * i + 1] << 8));
    clip.samples[static_cast<size_t>(i)] = static_cast<double>(s) / 32768.0;
  }
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw DataError("write_wav: only 16 kHz supported");
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * n);
  const char* riff = "RIFF";
  out.insert(out.end(), riff, riff + 4);
  put_u32(out, 36 + 2 * n);
  const char* tags = "WAVEfmt ";
  out.insert(out.end(), tags, tags + 8);
  put_u32(out, 16);
  put_u16(out, 1);                    // PCM
  put_u16(out, 1);                    // mono
  put_u32(out, kSampleRate);
  put_u32(out, kSampleRate * 2);      // byte rate
  put_u16(out, 2);                    // block align
  put_u16(out, 16);                   // bits per sample
  const char* data = "data";
  out.insert(out.end(), data, data + 4);
  put_u32(out, 2 * n);
  for (double v : clip.samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    const long q = std::lround(c * 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write WAV file: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to WAV file: " + path);
}

}  // namespace sgan::dsp
