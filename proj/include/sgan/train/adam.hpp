// sgan/train/adam.hpp
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

#include <vector>

#include "sgan/gan/layers.hpp"

namespace sgan::train {

struct AdamHyper {
  double beta1 = 0.0;
  double beta2 = 0.99;
  double eps = 1e-8;
};

// Adam with bias correction over a ParamStore. Per-parameter moments and
// step counters advance only when the parameter took part in the step's
// graph, so parameters of not-yet-active blocks keep zero moments until
// their stage fades in.
class Adam {
 public:
  struct Slot {
    Tensor m, v;
    std::uint64_t t = 0;
  };

  Adam(gan::ParamStore& store, AdamHyper hyper);

  // grads and reached are aligned with store.entries().
  void step(double lr, const std::vector<Tensor>& grads,
            const std::vector<char>& reached);

  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  gan::ParamStore* store_;
  AdamHyper hyper_;
  std::vector<Slot> slots_;
};

}  // namespace sgan::train
