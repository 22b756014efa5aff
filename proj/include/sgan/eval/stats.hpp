// sgan/eval/stats.hpp
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

#include "sgan/tensor.hpp"

namespace sgan::eval {

struct ActivationStats {
  Tensor mean;  // (d)
  Tensor cov;   // (d, d), symmetric positive semidefinite
  long n = 0;
};

// Column means and unbiased sample covariance of an (n, d) matrix; n >= 2.
ActivationStats activation_stats(const Tensor& activations);

// ||m_r - m_g||^2 + Tr(C_r + C_g - 2 (C_r C_g)^(1/2)), computed through the
// symmetric form Tr(C_r) + Tr(C_g) - 2 Tr((C_r^(1/2) C_g C_r^(1/2))^(1/2))
// with eigenvalue square roots. Eigenvalues below -1e-6 are rejected as
// non-PSD; small negatives are clipped to zero, as is a final result above
// -1e-8.
double frechet_distance(const ActivationStats& a, const ActivationStats& b);

}  // namespace sgan::eval
