// src/eval/adapters.cpp
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

#include "sgan/eval/adapters.hpp"

#include <cstdio>
#include <sstream>

namespace sgan::eval {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::optional<std::string> run_command(const std::string& command,
                                       const std::string& arg) {
  const std::string full = command + " " + shell_quote(arg);
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return std::nullopt;
  std::string output;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  const int status = pclose(pipe);
  if (status != 0) return std::nullopt;
  // trim
  const size_t a = output.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return std::string();
  const size_t b = output.find_last_not_of(" \t\r\n");
  return output.substr(a, b - a + 1);
}

}  // namespace

std::optional<std::string> transcribe(const TranscriberAdapter& adapter,
                                      const std::string& wav_path) {
  if (adapter.command.empty())
    throw DataError("transcriber adapter has no command");
  return run_command(adapter.command, wav_path);
}

std::optional<std::vector<double>> embed(const EmbeddingProvider& provider,
                                         const std::string& wav_path) {
  if (provider.command.empty())
    throw DataError("embedding provider has no command");
  auto line = run_command(provider.command, wav_path);
  if (!line) return std::nullopt;
  std::vector<double> values;
  std::istringstream ss(*line);
  double v;
  while (ss >> v) values.push_back(v);
  if (values.empty() || (!ss.eof() && ss.fail())) return std::nullopt;
  return values;
}

}  // namespace sgan::eval
