// sgan/train/losses.hpp
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

#include <functional>

#include "sgan/autodiff.hpp"

namespace sgan::train {

inline constexpr double kGpLambda = 10.0;
inline constexpr double kDriftEpsilon = 0.001;

using Critic = std::function<nn::Variable(const nn::Variable&)>;

// WGAN-GP penalty: interpolates x_hat = u*real + (1-u)*fake with one
// independent u per sample, differentiates the critic at x_hat, and
// penalizes lambda * mean((||grad||_2 - 1)^2). The returned value stays
// connected to the critic parameters so the penalty itself can be
// backpropagated (gradients of gradients).
nn::Variable gradient_penalty(const Critic& critic, const Tensor& real,
                              const Tensor& fake, const Tensor& u,
                              double lambda = kGpLambda);

// mean(fake) - mean(real) + gp + eps*mean(real^2). The drift term touches
// real scores only.
nn::Variable discriminator_loss(const nn::Variable& real_scores,
                                const nn::Variable& fake_scores,
                                const nn::Variable& gp,
                                double drift_epsilon = kDriftEpsilon);

// -mean(fake scores)
nn::Variable generator_loss(const nn::Variable& fake_scores);

}  // namespace sgan::train
