// src/train/losses.cpp
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

#include "sgan/train/losses.hpp"

namespace sgan::train {

using namespace sgan::nn;

nn::Variable gradient_penalty(const Critic& critic, const Tensor& real,
                              const Tensor& fake, const Tensor& u,
                              double lambda) {
  if (!real.same_shape(fake))
    throw Error("gradient_penalty: real/fake shape mismatch");
  const long n = real.dim(0);
  if (u.numel() != n)
    throw Error("gradient_penalty: need one interpolation weight per sample");
  const long per = real.numel() / n;

  Tensor mixed(real.shape());
  for (long i = 0; i < n; ++i) {
    const double ui = u[i];
    for (long j = 0; j < per; ++j)
      mixed[i * per + j] =
          ui * real[i * per + j] + (1.0 - ui) * fake[i * per + j];
  }

  Variable x_hat(std::move(mixed), true);
  Variable scores = critic(x_hat);
  if (scores.value().rank() != 1 || scores.value().dim(0) != n)
    throw Error("gradient_penalty: critic must score each sample");
  if (!scores.requires_grad())
    throw Error("gradient_penalty: critic output is not differentiable");

  Variable grads = grad_graph(sum_all(scores), {x_hat})[0];
  Variable sq =
      reshape(reduce_spatial(square(reshape(grads, {n, 1, per, 1}))), {n});
  Variable norms = sqrt_v(add_scalar(sq, 1e-12));
  Variable excess = add_scalar(norms, -1.0);
  return scale(sum_all(square(excess)), lambda / static_cast<double>(n));
}

nn::Variable discriminator_loss(const nn::Variable& real_scores,
                                const nn::Variable& fake_scores,
                                const nn::Variable& gp,
                                double drift_epsilon) {
  if (real_scores.value().numel() == 0 || fake_scores.value().numel() == 0)
    throw Error("discriminator_loss: empty score batch");
  Variable wasserstein =
      sub(mean_all(fake_scores), mean_all(real_scores));
  Variable drift = scale(mean_all(square(real_scores)), drift_epsilon);
  return add(add(wasserstein, gp), drift);
}

nn::Variable generator_loss(const nn::Variable& fake_scores) {
  if (fake_scores.value().numel() == 0)
    throw Error("generator_loss: empty score batch");
  return neg(mean_all(fake_scores));
}

}  // namespace sgan::train
