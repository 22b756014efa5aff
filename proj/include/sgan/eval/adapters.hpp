// sgan/eval/adapters.hpp
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

#include <optional>
#include <string>
#include <vector>

#include "sgan/common.hpp"

namespace sgan::eval {

// External speech-to-text process: invoked as `<command> <wav path>`,
// writes the transcript to standard output and exits 0 on success.
struct TranscriberAdapter {
  std::string command;
};

// External embedding process: invoked as `<command> <wav path>`, writes
// one line of space-separated decimal floats.
struct EmbeddingProvider {
  std::string command;
};

// nullopt on nonzero exit or invocation failure; the transcript is
// whitespace-trimmed.
std::optional<std::string> transcribe(const TranscriberAdapter& adapter,
                                      const std::string& wav_path);

std::optional<std::vector<double>> embed(const EmbeddingProvider& provider,
                                         const std::string& wav_path);

}  // namespace sgan::eval
