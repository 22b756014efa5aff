// sgan/rng.hpp
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

#include <cmath>
#include <cstdint>
#include <random>

#include "sgan/tensor.hpp"

namespace sgan {

// Deterministic random source. Distributions are implemented here rather
// than with <random> adapters because the standard leaves those
// implementation-defined and we need bit-identical streams everywhere.
class RandomEngine {
 public:
  explicit RandomEngine(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  long uniform_int(long n) {
    if (n <= 0) throw Error("uniform_int: n must be positive");
    // Rejection sampling keeps the distribution exactly uniform.
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<long>(x % un);
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Tensor normal_tensor(std::vector<long> shape) {
    Tensor t(std::move(shape));
    for (long i = 0; i < t.numel(); ++i) t[i] = normal();
    return t;
  }

  Tensor uniform_tensor(std::vector<long> shape) {
    Tensor t(std::move(shape));
    for (long i = 0; i < t.numel(); ++i) t[i] = uniform();
    return t;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sgan
