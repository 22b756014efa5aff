// src/eval/cer.cpp
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

#include "sgan/eval/cer.hpp"

#include <algorithm>
#include <vector>

namespace sgan::eval {

long levenshtein(const std::string& a, const std::string& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<long> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<long>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<long>(i);
    for (size_t j = 1; j <= m; ++j) {
      const long sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double cer(const std::string& reference, const std::string& hypothesis) {
  if (reference.empty()) throw DataError("cer: empty reference");
  return static_cast<double>(levenshtein(reference, hypothesis)) /
         static_cast<double>(reference.size());
}

}  // namespace sgan::eval
