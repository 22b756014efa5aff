// sgan/autodiff.hpp
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
#include <memory>
#include <string>
#include <vector>

#include "sgan/tensor.hpp"

namespace sgan::nn {

// Define-by-run reverse-mode autodiff. Every op's backward rule is itself
// expressed through these ops, so gradients can be differentiated again
// (needed for the WGAN-GP penalty, whose loss contains a gradient norm).

class Variable;
using BackwardFn =
    std::function<std::vector<Variable>(const Variable& grad_out)>;

struct Node {
  Tensor value;
  bool requires_grad = false;
  std::vector<Variable> parents;
  BackwardFn backward;  // empty for leaves and constants
  const char* op = "leaf";
};

class Variable {
 public:
  Variable() = default;
  explicit Variable(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

  // Same value, cut off from the graph.
  Variable detach() const { return Variable(node_->value, false); }

  double scalar() const {
    if (value().numel() != 1) throw Error("Variable::scalar: not a scalar");
    return value()[0];
  }

  static Variable constant(Tensor v) { return Variable(std::move(v), false); }

 private:
  std::shared_ptr<Node> node_;
};

bool grad_enabled();

// Scoped switch that makes all ops produce constants (no graph recording).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Reverse-mode gradients of sum(root) w.r.t. each entry of `wrt`.
// grad_tensors detaches the results; grad_graph keeps them connected so the
// returned gradients can be differentiated again. Unreached inputs yield
// zeros shaped like the input.
std::vector<Tensor> grad_tensors(const Variable& root,
                                 const std::vector<Variable>& wrt,
                                 std::vector<char>* reached = nullptr);
std::vector<Variable> grad_graph(const Variable& root,
                                 const std::vector<Variable>& wrt);

// ---- elementwise ----
Variable add(const Variable& a, const Variable& b);
Variable sub(const Variable& a, const Variable& b);
Variable mul(const Variable& a, const Variable& b);
Variable divv(const Variable& a, const Variable& b);
Variable neg(const Variable& x);
Variable scale(const Variable& x, double k);
Variable add_scalar(const Variable& x, double k);
Variable sqrt_v(const Variable& x);
Variable exp_v(const Variable& x);
Variable log_v(const Variable& x);
Variable square(const Variable& x);
Variable leaky_relu(const Variable& x, double slope);
Variable clamp_min(const Variable& x, double floor);

// ---- shape ----
Variable reshape(const Variable& x, std::vector<long> shape);
Variable concat_axis1(const Variable& a, const Variable& b);
Variable narrow_axis1(const Variable& x, long start, long len);

// ---- linear algebra ----
Variable matmul(const Variable& a, const Variable& b, bool trans_a = false,
                bool trans_b = false);

// ---- convolution (NCHW, odd kernel, same padding at stride 1) ----
Variable conv2d(const Variable& x, const Variable& w, long stride = 1);

// ---- resampling ----
Variable avgpool2(const Variable& x);
Variable upsample2_bilinear(const Variable& x);

// ---- reductions / broadcasts ----
Variable sum_all(const Variable& x);                     // -> {1}
Variable mean_all(const Variable& x);                    // -> {1}
Variable broadcast_scalar(const Variable& s, std::vector<long> shape);
Variable reduce_spatial(const Variable& x);              // NCHW -> (N,C)
Variable broadcast_spatial(const Variable& m, long h, long w);
Variable reduce_batch(const Variable& x);                // NCHW -> (C,H,W)
Variable broadcast_batch(const Variable& x, long n);     // (C,H,W) -> NCHW
Variable reduce_to_channel(const Variable& x);           // NCHW -> (C)
Variable broadcast_channel(const Variable& b, long n, long h, long w);
Variable broadcast_single_channel(const Variable& x, long c);  // (N,1,H,W)->(N,C,H,W)
Variable reduce_rows(const Variable& x);                 // (N,K) -> (N)
Variable broadcast_rows(const Variable& v, long k);      // (N) -> (N,K)

// ---- lookup ----
Variable gather_rows(const Variable& table, const std::vector<long>& idx);

// ---- composites ----
Variable mean_rows(const Variable& x);                   // (N,K) -> (N)
Variable logsumexp_rows(const Variable& x);              // (N,K) -> (N)

// Finite-difference gradient of f w.r.t. x, for gradient checking in tests.
Tensor numeric_grad(const std::function<double(const Tensor&)>& f,
                    const Tensor& x, double h = 1e-6);

}  // namespace sgan::nn
