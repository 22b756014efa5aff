// src/train/adam.cpp
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

#include "sgan/train/adam.hpp"

#include <cmath>

namespace sgan::train {

Adam::Adam(gan::ParamStore& store, AdamHyper hyper)
    : store_(&store), hyper_(hyper) {
  slots_.resize(store.entries().size());
  for (size_t i = 0; i < slots_.size(); ++i) {
    const Tensor& p = store.entries()[i].var.value();
    slots_[i].m = Tensor::zeros(p.shape());
    slots_[i].v = Tensor::zeros(p.shape());
  }
}

void Adam::step(double lr, const std::vector<Tensor>& grads,
                const std::vector<char>& reached) {
  auto& entries = store_->entries();
  if (grads.size() != entries.size() || reached.size() != entries.size())
    throw Error("Adam::step: gradient list does not match parameters");
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!reached[i]) continue;
    Slot& s = slots_[i];
    Tensor& p = entries[i].var.node()->value;
    const Tensor& g = grads[i];
    if (!p.same_shape(g)) throw Error("Adam::step: gradient shape mismatch");
    s.t += 1;
    const double b1 = hyper_.beta1, b2 = hyper_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.t));
    const double step_lr = lr * entries[i].lr_scale;
    const long n = p.numel();
    for (long j = 0; j < n; ++j) {
      s.m[j] = b1 * s.m[j] + (1.0 - b1) * g[j];
      s.v[j] = b2 * s.v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = s.m[j] / c1;
      const double vhat = s.v[j] / c2;
      p[j] -= step_lr * mhat / (std::sqrt(vhat) + hyper_.eps);
    }
  }
}

}  // namespace sgan::train
