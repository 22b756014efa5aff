// sgan/gan/layers.hpp
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
#include <utility>
#include <vector>

#include "sgan/autodiff.hpp"
#include "sgan/rng.hpp"

namespace sgan::gan {

inline constexpr double kLeakySlope = 0.2;

struct Param {
  std::string name;
  nn::Variable var;        // leaf with requires_grad
  double lr_scale = 1.0;
  bool is_weight = false;  // drawn from N(0,1) at construction
};

class ParamStore {
 public:
  nn::Variable add(const std::string& name, Tensor init, double lr_scale,
                   bool is_weight);
  std::vector<Param>& entries() { return params_; }
  const std::vector<Param>& entries() const { return params_; }
  std::vector<nn::Variable> variables() const;
  const Param& at(const std::string& name) const;
  Param& at(const std::string& name);
  void set_requires_grad(bool on);

 private:
  std::vector<Param> params_;
};

// Fully connected layer with N(0,1) weights scaled at runtime by the
// per-layer He constant (equalized learning rate).
class EqLinear {
 public:
  EqLinear() = default;
  EqLinear(ParamStore& store, const std::string& name, long in, long out,
           double gain, double lr_scale, RandomEngine& rng,
           Tensor bias_init = Tensor());
  nn::Variable forward(const nn::Variable& x) const;  // (N,in) -> (N,out)

 private:
  nn::Variable w_, b_;
  double scale_ = 1.0;
};

class EqConv {
 public:
  EqConv() = default;
  EqConv(ParamStore& store, const std::string& name, long cin, long cout,
         long kernel, long stride, double gain, double lr_scale,
         RandomEngine& rng);
  nn::Variable forward(const nn::Variable& x) const;

 private:
  nn::Variable w_, b_;
  long stride_ = 1;
  double scale_ = 1.0;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamStore& store, const std::string& name, long count, long dim,
            RandomEngine& rng);
  nn::Variable forward(const std::vector<long>& ids) const;  // (N,dim)
  long dim() const { return table_.value().dim(1); }

 private:
  nn::Variable table_;
};

// z / max(std(z elements), 1e-8), population standard deviation per row.
nn::Variable normalize_latent(const nn::Variable& z);

// Per-sample per-channel instance normalization followed by the style's
// scale and bias: y_s * (x - mu)/sigma + y_b, sigma guarded by 1e-8.
nn::Variable adain(const nn::Variable& x, const nn::Variable& y_scale,
                   const nn::Variable& y_bias);

// x_i + scale_i * noise for a single-channel noise image.
nn::Variable noise_inject(const nn::Variable& x, const nn::Variable& noise,
                          const nn::Variable& per_channel_scale);

// Batch-std summary appended as one constant extra channel.
nn::Variable minibatch_stddev(const nn::Variable& x);

// Class embedding broadcast to constant planes and concatenated up front.
nn::Variable inject_class(const nn::Variable& x, const nn::Variable& embedding);

// Per-block style source selection: blocks before the crossover use the
// first latent, the rest use the second.
std::vector<int> style_mix_sources(long crossover_block, long n_blocks);

// Row-wise selector: rows with use_first set come from a, others from b.
nn::Variable select_rows(const std::vector<char>& use_first,
                         const nn::Variable& a, const nn::Variable& b);

}  // namespace sgan::gan
