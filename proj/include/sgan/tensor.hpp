// sgan/tensor.hpp
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

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sgan/common.hpp"

namespace sgan {

// Dense row-major double tensor with shared storage. Copies are shallow;
// use clone() for a deep copy. Feature maps are NCHW, matrices (rows, cols).
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<long> shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<double>>(count(shape_), 0.0)) {}

  static Tensor zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<long> shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : *t.data_) x = v;
    return t;
  }

  static Tensor ones(std::vector<long> shape) { return full(std::move(shape), 1.0); }

  static Tensor scalar(double v) { return full({1}, v); }

  static Tensor from(std::vector<long> shape, std::vector<double> values) {
    if (count(shape) != static_cast<long>(values.size()))
      throw Error("Tensor::from: value count does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<double>>(std::move(values));
    return t;
  }

  bool defined() const { return data_ != nullptr; }
  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<long>& shape() const { return shape_; }
  long dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  long numel() const { return defined() ? static_cast<long>(data_->size()) : 0; }

  double* data() { return data_->data(); }
  const double* data() const { return data_->data(); }

  double& operator[](long i) { return (*data_)[static_cast<size_t>(i)]; }
  double operator[](long i) const { return (*data_)[static_cast<size_t>(i)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<double>>(*data_);
    return t;
  }

  // Shares storage under a new shape of equal element count.
  Tensor reshaped(std::vector<long> shape) const {
    if (count(shape) != numel())
      throw Error("Tensor::reshaped: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  bool all_finite() const {
    for (double v : *data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static long count(const std::vector<long>& shape) {
    long n = 1;
    for (long d : shape) {
      if (d < 0) throw Error("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<long> shape_;
  std::shared_ptr<std::vector<double>> data_;
};

}  // namespace sgan
