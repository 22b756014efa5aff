// sgan/common.hpp
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
#include <iostream>
#include <stdexcept>
#include <string>

namespace sgan {

// Error hierarchy maps onto CLI exit codes: usage = 1, data = 2, numeric = 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

inline void log_warn(const std::string& msg) {
  std::cerr << "WARNING: " << msg << "\n";
}

inline void log_info(const std::string& msg) {
  std::cerr << "INFO: " << msg << "\n";
}

// FNV-1a, used for config hashes in checkpoints.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// SplitMix64 step, used to derive per-purpose RNG seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t counter) {
  return splitmix64(splitmix64(master ^ 0x5851f42d4c957f2dull) ^
                    splitmix64(stream * 0x14057b7ef767814full + counter));
}

}  // namespace sgan
