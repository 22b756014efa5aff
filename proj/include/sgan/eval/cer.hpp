// sgan/eval/cer.hpp
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

#include <string>

#include "sgan/common.hpp"

namespace sgan::eval {

// Unit-cost edit distance.
long levenshtein(const std::string& a, const std::string& b);

// levenshtein(reference, hypothesis) / |reference|; empty references are
// rejected.
double cer(const std::string& reference, const std::string& hypothesis);

}  // namespace sgan::eval
