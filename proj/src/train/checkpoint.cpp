// src/train/checkpoint.cpp
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

#include "sgan/train/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace sgan::train {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_tensor(std::ostream& out, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (int i = 0; i < t.rank(); ++i)
    put_u64(out, static_cast<std::uint64_t>(t.dim(i)));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * 8));
}

struct Reader {
  std::ifstream in;
  std::string path;

  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw DataError("cannot open checkpoint: " + p);
  }

  void raw(void* dst, std::streamsize n, const char* what) {
    in.read(reinterpret_cast<char*>(dst), n);
    if (!in) throw DataError("checkpoint truncated while reading " +
                             std::string(what) + ": " + path);
  }

  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    raw(&v, 4, what);
    return v;
  }

  std::uint64_t u64(const char* what) {
    std::uint64_t v;
    raw(&v, 8, what);
    return v;
  }

  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    if (n > (1u << 26)) throw DataError("checkpoint string too large: " + path);
    std::string s(n, '\0');
    raw(s.data(), n, what);
    return s;
  }

  Tensor tensor(const char* what) {
    const std::uint32_t rank = u32(what);
    if (rank > 8) throw DataError("checkpoint tensor rank too large: " + path);
    std::vector<long> shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i)
      shape[i] = static_cast<long>(u64(what));
    Tensor t(shape);
    raw(t.data(), t.numel() * 8, what);
    return t;
  }
};

void put_store(std::ostream& out, const gan::ParamStore& store,
               const Adam* opt) {
  const auto& entries = store.entries();
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (size_t i = 0; i < entries.size(); ++i) {
    put_string(out, entries[i].name);
    put_tensor(out, entries[i].var.value());
    put_u64(out, opt ? opt->slots()[i].t : 0);
    if (opt) {
      put_tensor(out, opt->slots()[i].m);
      put_tensor(out, opt->slots()[i].v);
    } else {
      put_tensor(out, Tensor::zeros(entries[i].var.value().shape()));
      put_tensor(out, Tensor::zeros(entries[i].var.value().shape()));
    }
  }
}

struct StoredParam {
  Tensor value, m, v;
  std::uint64_t t = 0;
};

std::map<std::string, StoredParam> read_store(Reader& r) {
  std::map<std::string, StoredParam> out;
  const std::uint32_t n = r.u32("parameter count");
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string name = r.str("parameter name");
    StoredParam sp;
    sp.value = r.tensor("parameter value");
    sp.t = r.u64("optimizer step");
    sp.m = r.tensor("optimizer m");
    sp.v = r.tensor("optimizer v");
    out[name] = std::move(sp);
  }
  return out;
}

void apply_store(const std::map<std::string, StoredParam>& stored,
                 gan::ParamStore& store, Adam* opt, const std::string& path) {
  auto& entries = store.entries();
  if (stored.size() != entries.size())
    throw DataError("checkpoint parameter count mismatch in " + path);
  for (size_t i = 0; i < entries.size(); ++i) {
    auto it = stored.find(entries[i].name);
    if (it == stored.end())
      throw DataError("checkpoint missing parameter " + entries[i].name +
                      " in " + path);
    Tensor& dst = entries[i].var.node()->value;
    if (!dst.same_shape(it->second.value))
      throw DataError("checkpoint shape mismatch for " + entries[i].name);
    dst = it->second.value.clone();
    if (opt) {
      opt->slots()[i].m = it->second.m.clone();
      opt->slots()[i].v = it->second.v.clone();
      opt->slots()[i].t = it->second.t;
    }
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainingConfig& cfg,
                     const gan::Generator& g, const gan::Discriminator& d,
                     const Adam& opt_g, const Adam& opt_d,
                     std::uint64_t samples_seen, std::uint64_t step,
                     std::uint64_t master_seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  const std::string cfg_text = canonical_config_text(cfg);
  put_string(out, cfg_text);
  put_u64(out, fnv1a64(cfg_text));
  put_u64(out, samples_seen);
  put_u64(out, step);
  put_u64(out, master_seed);
  put_store(out, g.params(), &opt_g);
  put_store(out, d.params(), &opt_d);
  if (!out) throw DataError("short write to checkpoint: " + path);
}

namespace {

CheckpointMeta read_header(Reader& r) {
  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a checkpoint file: " + r.path);
  const std::uint32_t version = r.u32("version");
  if (version != kVersion)
    throw DataError("checkpoint version " + std::to_string(version) +
                    " unsupported (expected " + std::to_string(kVersion) +
                    "): " + r.path);
  CheckpointMeta meta;
  meta.config_text = r.str("config");
  meta.config_hash = r.u64("config hash");
  if (meta.config_hash != fnv1a64(meta.config_text))
    throw DataError("checkpoint config hash does not match its text: " + r.path);
  meta.samples_seen = r.u64("samples_seen");
  meta.step = r.u64("step");
  meta.master_seed = r.u64("master seed");
  return meta;
}

}  // namespace

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  Reader r(path);
  return read_header(r);
}

CheckpointMeta load_checkpoint(const std::string& path, gan::Generator& g,
                               gan::Discriminator& d, Adam* opt_g,
                               Adam* opt_d) {
  Reader r(path);
  CheckpointMeta meta = read_header(r);
  // Parse everything before touching live state.
  auto g_params = read_store(r);
  auto d_params = read_store(r);
  apply_store(g_params, g.params(), opt_g, path);
  apply_store(d_params, d.params(), opt_d, path);
  return meta;
}

}  // namespace sgan::train
