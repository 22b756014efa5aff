// src/gan/layers.cpp
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

#include "sgan/gan/layers.hpp"

#include <cmath>

namespace sgan::gan {

using namespace sgan::nn;

nn::Variable ParamStore::add(const std::string& name, Tensor init,
                             double lr_scale, bool is_weight) {
  for (const Param& p : params_)
    if (p.name == name) throw Error("duplicate parameter name: " + name);
  Param p;
  p.name = name;
  p.var = Variable(std::move(init), true);
  p.lr_scale = lr_scale;
  p.is_weight = is_weight;
  params_.push_back(p);
  return params_.back().var;
}

std::vector<nn::Variable> ParamStore::variables() const {
  std::vector<Variable> out;
  out.reserve(params_.size());
  for (const Param& p : params_) out.push_back(p.var);
  return out;
}

const Param& ParamStore::at(const std::string& name) const {
  for (const Param& p : params_)
    if (p.name == name) return p;
  throw Error("unknown parameter: " + name);
}

Param& ParamStore::at(const std::string& name) {
  for (Param& p : params_)
    if (p.name == name) return p;
  throw Error("unknown parameter: " + name);
}

void ParamStore::set_requires_grad(bool on) {
  for (Param& p : params_) p.var.node()->requires_grad = on;
}

namespace {

nn::Variable add_row_bias(const nn::Variable& x, const nn::Variable& b) {
  const long n = x.value().dim(0), k = x.value().dim(1);
  Variable x4 = reshape(x, {n, k, 1, 1});
  Variable y = add(x4, broadcast_channel(b, n, 1, 1));
  return reshape(y, {n, k});
}

}  // namespace

EqLinear::EqLinear(ParamStore& store, const std::string& name, long in,
                   long out, double gain, double lr_scale, RandomEngine& rng,
                   Tensor bias_init) {
  w_ = store.add(name + ".weight", rng.normal_tensor({out, in}), lr_scale,
                 true);
  if (!bias_init.defined()) bias_init = Tensor::zeros({out});
  if (bias_init.numel() != out) throw Error("EqLinear: bad bias init");
  b_ = store.add(name + ".bias", std::move(bias_init), lr_scale, false);
  scale_ = gain / std::sqrt(static_cast<double>(in));
}

nn::Variable EqLinear::forward(const nn::Variable& x) const {
  return add_row_bias(matmul(x, scale(w_, scale_), false, true), b_);
}

EqConv::EqConv(ParamStore& store, const std::string& name, long cin, long cout,
               long kernel, long stride, double gain, double lr_scale,
               RandomEngine& rng)
    : stride_(stride) {
  w_ = store.add(name + ".weight", rng.normal_tensor({cout, cin, kernel, kernel}),
                 lr_scale, true);
  b_ = store.add(name + ".bias", Tensor::zeros({cout}), lr_scale, false);
  scale_ = gain / std::sqrt(static_cast<double>(cin * kernel * kernel));
}

nn::Variable EqConv::forward(const nn::Variable& x) const {
  Variable y = conv2d(x, scale(w_, scale_), stride_);
  return add(y, broadcast_channel(b_, y.value().dim(0), y.value().dim(2),
                                  y.value().dim(3)));
}

Embedding::Embedding(ParamStore& store, const std::string& name, long count,
                     long dim, RandomEngine& rng) {
  table_ = store.add(name + ".weight", rng.normal_tensor({count, dim}), 1.0,
                     true);
}

nn::Variable Embedding::forward(const std::vector<long>& ids) const {
  return gather_rows(table_, ids);
}

nn::Variable normalize_latent(const nn::Variable& z) {
  const long d = z.value().dim(1);
  Variable mu = mean_rows(z);
  Variable centered = sub(z, broadcast_rows(mu, d));
  Variable sd = sqrt_v(mean_rows(square(centered)));
  return divv(z, broadcast_rows(clamp_min(sd, 1e-8), d));
}

nn::Variable adain(const nn::Variable& x, const nn::Variable& y_scale,
                   const nn::Variable& y_bias) {
  const long n = x.value().dim(0), c = x.value().dim(1);
  const long h = x.value().dim(2), w = x.value().dim(3);
  if (y_scale.value().dim(0) != n || y_scale.value().dim(1) != c ||
      !y_scale.value().same_shape(y_bias.value()))
    throw Error("adain: style dimensions must match channels");
  const double inv_hw = 1.0 / static_cast<double>(h * w);
  Variable mu = scale(reduce_spatial(x), inv_hw);
  Variable centered = sub(x, broadcast_spatial(mu, h, w));
  Variable var = scale(reduce_spatial(square(centered)), inv_hw);
  Variable sigma = sqrt_v(add_scalar(var, 1e-8));
  Variable normed = divv(centered, broadcast_spatial(sigma, h, w));
  return add(mul(normed, broadcast_spatial(y_scale, h, w)),
             broadcast_spatial(y_bias, h, w));
}

nn::Variable noise_inject(const nn::Variable& x, const nn::Variable& noise,
                          const nn::Variable& per_channel_scale) {
  const long n = x.value().dim(0), c = x.value().dim(1);
  const long h = x.value().dim(2), w = x.value().dim(3);
  const Tensor& tn = noise.value();
  if (tn.rank() != 4 || tn.dim(0) != n || tn.dim(1) != 1 || tn.dim(2) != h ||
      tn.dim(3) != w)
    throw Error("noise_inject: noise shape " + tn.shape_str() +
                " does not match input " + x.value().shape_str());
  if (per_channel_scale.value().numel() != c)
    throw Error("noise_inject: per-channel scale count mismatch");
  Variable spread = broadcast_single_channel(noise, c);
  Variable scaled = mul(spread, broadcast_channel(per_channel_scale, n, h, w));
  return add(x, scaled);
}

nn::Variable minibatch_stddev(const nn::Variable& x) {
  const long n = x.value().dim(0);
  const long h = x.value().dim(2), w = x.value().dim(3);
  const double inv_n = 1.0 / static_cast<double>(n);
  Variable mu = scale(reduce_batch(x), inv_n);
  Variable centered = sub(x, broadcast_batch(mu, n));
  Variable var = scale(reduce_batch(square(centered)), inv_n);
  Variable sd = sqrt_v(add_scalar(var, 1e-8));
  Variable summary = mean_all(sd);
  Variable plane = broadcast_scalar(summary, {n, 1, h, w});
  return concat_axis1(x, plane);
}

nn::Variable inject_class(const nn::Variable& x, const nn::Variable& embedding) {
  const long n = x.value().dim(0), h = x.value().dim(2), w = x.value().dim(3);
  if (embedding.value().dim(0) != n)
    throw Error("inject_class: batch mismatch");
  // constant planes, one per embedding dimension, ahead of the features
  Variable planes = broadcast_spatial(embedding, h, w);
  return concat_axis1(planes, x);
}

std::vector<int> style_mix_sources(long crossover_block, long n_blocks) {
  if (crossover_block < 0 || crossover_block > n_blocks)
    throw Error("style_mix_sources: crossover out of range");
  std::vector<int> src(static_cast<size_t>(n_blocks));
  for (long b = 0; b < n_blocks; ++b)
    src[static_cast<size_t>(b)] = b < crossover_block ? 0 : 1;
  return src;
}

nn::Variable select_rows(const std::vector<char>& use_first,
                         const nn::Variable& a, const nn::Variable& b) {
  const long n = a.value().dim(0), k = a.value().dim(1);
  if (static_cast<long>(use_first.size()) != n)
    throw Error("select_rows: mask size mismatch");
  Tensor mask({n, k});
  for (long i = 0; i < n; ++i) {
    const double v = use_first[static_cast<size_t>(i)] ? 1.0 : 0.0;
    for (long j = 0; j < k; ++j) mask[i * k + j] = v;
  }
  Variable m = Variable::constant(mask);
  Variable inv = Variable::constant(
      Tensor::from(mask.shape(), [&] {
        std::vector<double> v(static_cast<size_t>(n * k));
        for (long i = 0; i < n * k; ++i) v[static_cast<size_t>(i)] = 1.0 - mask[i];
        return v;
      }()));
  return add(mul(a, m), mul(b, inv));
}

}  // namespace sgan::gan
