// src/train/config.cpp
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

#include "sgan/train/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sgan::train {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw DataError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw DataError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  return static_cast<long>(parse_u64(key, v));
}

std::map<long, long> parse_batch_map(const std::string& v) {
  std::map<long, long> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw DataError("config: batch_by_resolution entries look like res:batch");
    out[parse_long("batch_by_resolution", trim(item.substr(0, colon)))] =
        parse_long("batch_by_resolution", trim(item.substr(colon + 1)));
  }
  if (out.empty()) throw DataError("config: empty batch_by_resolution");
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void TrainingConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw DataError(std::string("config: ") + name + " must be positive");
  };
  positive(adam_alpha, "adam_alpha");
  positive(adam_alpha_final_stage, "adam_alpha_final_stage");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0)
    throw DataError("config: adam_beta1 must lie in [0, 1)");
  if (adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
    throw DataError("config: adam_beta2 must lie in (0, 1)");
  positive(adam_eps, "adam_eps");
  positive(mapping_lr_factor, "mapping_lr_factor");
  positive(drift_epsilon, "drift_epsilon");
  positive(gp_lambda, "gp_lambda");
  if (fade_samples == 0 || stabilize_samples == 0 || total_samples == 0)
    throw DataError("config: sample counts must be positive");
  if (style_mix_prob < 0.0 || style_mix_prob > 1.0)
    throw DataError("config: style_mix_prob must lie in [0, 1]");
  auto pow2 = [](long v) { return v > 0 && (v & (v - 1)) == 0; };
  if (!pow2(start_resolution) || !pow2(max_resolution) ||
      start_resolution < 8 || max_resolution > 128 ||
      start_resolution > max_resolution)
    throw DataError("config: resolutions must be powers of two in [8, 128]");
  for (long r = start_resolution; r <= max_resolution; r *= 2) {
    auto it = batch_by_resolution.find(r);
    if (it == batch_by_resolution.end())
      throw DataError("config: batch_by_resolution missing resolution " +
                      std::to_string(r));
    if (it->second < 1)
      throw DataError("config: batch size must be >= 1");
  }
  std::uint64_t growing = stabilize_samples;
  for (long r = start_resolution * 2; r <= max_resolution; r *= 2)
    growing += fade_samples + stabilize_samples;
  if (total_samples < growing)
    throw DataError("config: total_samples shorter than the growing schedule (" +
                    std::to_string(growing) + ")");
  if (channels < 1 || latent_dim < 1 || class_embed_dim < 1 || num_classes < 2)
    throw DataError("config: architecture sizes out of range");
  if (checkpoint_samples == 0)
    throw DataError("config: checkpoint_samples must be positive");
}

void apply_override(TrainingConfig& cfg, const std::string& key,
                    const std::string& value) {
  const std::string v = trim(value);
  if (key == "adam_alpha") cfg.adam_alpha = parse_double(key, v);
  else if (key == "adam_alpha_final_stage") cfg.adam_alpha_final_stage = parse_double(key, v);
  else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(key, v);
  else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(key, v);
  else if (key == "adam_eps") cfg.adam_eps = parse_double(key, v);
  else if (key == "mapping_lr_factor") cfg.mapping_lr_factor = parse_double(key, v);
  else if (key == "drift_epsilon") cfg.drift_epsilon = parse_double(key, v);
  else if (key == "gp_lambda") cfg.gp_lambda = parse_double(key, v);
  else if (key == "fade_samples") cfg.fade_samples = parse_u64(key, v);
  else if (key == "stabilize_samples") cfg.stabilize_samples = parse_u64(key, v);
  else if (key == "total_samples") cfg.total_samples = parse_u64(key, v);
  else if (key == "start_resolution") cfg.start_resolution = parse_long(key, v);
  else if (key == "max_resolution") cfg.max_resolution = parse_long(key, v);
  else if (key == "batch_by_resolution") cfg.batch_by_resolution = parse_batch_map(v);
  else if (key == "style_mix_prob") cfg.style_mix_prob = parse_double(key, v);
  else if (key == "channels") cfg.channels = parse_long(key, v);
  else if (key == "latent_dim") cfg.latent_dim = parse_long(key, v);
  else if (key == "class_embed_dim") cfg.class_embed_dim = parse_long(key, v);
  else if (key == "num_classes") cfg.num_classes = parse_long(key, v);
  else if (key == "checkpoint_samples") cfg.checkpoint_samples = parse_u64(key, v);
  else if (key == "seed") cfg.seed = parse_u64(key, v);
  else throw DataError("config: unknown key '" + key + "'");
}

TrainingConfig parse_config_text(const std::string& text) {
  TrainingConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("config: line " + std::to_string(lineno) +
                      " is not 'key = value'");
    apply_override(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

TrainingConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string canonical_config_text(const TrainingConfig& cfg) {
  std::ostringstream out;
  out << "adam_alpha = " << fmt_double(cfg.adam_alpha) << "\n";
  out << "adam_alpha_final_stage = " << fmt_double(cfg.adam_alpha_final_stage) << "\n";
  out << "adam_beta1 = " << fmt_double(cfg.adam_beta1) << "\n";
  out << "adam_beta2 = " << fmt_double(cfg.adam_beta2) << "\n";
  out << "adam_eps = " << fmt_double(cfg.adam_eps) << "\n";
  out << "mapping_lr_factor = " << fmt_double(cfg.mapping_lr_factor) << "\n";
  out << "drift_epsilon = " << fmt_double(cfg.drift_epsilon) << "\n";
  out << "gp_lambda = " << fmt_double(cfg.gp_lambda) << "\n";
  out << "fade_samples = " << cfg.fade_samples << "\n";
  out << "stabilize_samples = " << cfg.stabilize_samples << "\n";
  out << "total_samples = " << cfg.total_samples << "\n";
  out << "start_resolution = " << cfg.start_resolution << "\n";
  out << "max_resolution = " << cfg.max_resolution << "\n";
  out << "batch_by_resolution = ";
  bool first = true;
  for (const auto& [res, batch] : cfg.batch_by_resolution) {
    if (!first) out << ",";
    out << res << ":" << batch;
    first = false;
  }
  out << "\n";
  out << "style_mix_prob = " << fmt_double(cfg.style_mix_prob) << "\n";
  out << "channels = " << cfg.channels << "\n";
  out << "latent_dim = " << cfg.latent_dim << "\n";
  out << "class_embed_dim = " << cfg.class_embed_dim << "\n";
  out << "num_classes = " << cfg.num_classes << "\n";
  out << "checkpoint_samples = " << cfg.checkpoint_samples << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

std::uint64_t config_hash(const TrainingConfig& cfg) {
  return fnv1a64(canonical_config_text(cfg));
}

}  // namespace sgan::train
