// src/eval/stats.cpp
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

#include "sgan/eval/stats.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace sgan::eval {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericError(std::string("frechet_distance: eigendecomposition of ") +
                       what + " failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-6)
      throw NumericError(std::string("frechet_distance: ") + what +
                         " is not positive semidefinite (eigenvalue " +
                         std::to_string(ev(i)) + ")");
    ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

ActivationStats activation_stats(const Tensor& activations) {
  if (activations.rank() != 2)
    throw DataError("activation_stats: (n, d) matrix required");
  const long n = activations.dim(0), d = activations.dim(1);
  if (n < 2) throw DataError("activation_stats: need at least two rows");

  ActivationStats stats;
  stats.n = n;
  stats.mean = Tensor({d});
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < d; ++j) stats.mean[j] += activations[i * d + j];
  for (long j = 0; j < d; ++j) stats.mean[j] /= static_cast<double>(n);

  stats.cov = Tensor({d, d});
  Eigen::Map<RowMat> c(stats.cov.data(), d, d);
  c.setZero();
  Eigen::VectorXd dev(d);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < d; ++j)
      dev(j) = activations[i * d + j] - stats.mean[j];
    c.noalias() += dev * dev.transpose();
  }
  c /= static_cast<double>(n - 1);
  return stats;
}

double frechet_distance(const ActivationStats& a, const ActivationStats& b) {
  const long d = a.mean.numel();
  if (b.mean.numel() != d || a.cov.dim(0) != d || b.cov.dim(0) != d)
    throw DataError("frechet_distance: dimension mismatch");

  double mean_term = 0.0;
  for (long i = 0; i < d; ++i) {
    const double diff = a.mean[i] - b.mean[i];
    mean_term += diff * diff;
  }

  Eigen::Map<const RowMat> ca(a.cov.data(), d, d);
  Eigen::Map<const RowMat> cb(b.cov.data(), d, d);

  const Eigen::MatrixXd sa = psd_sqrt(ca, "the first covariance");
  const Eigen::MatrixXd inner = sa * cb * sa;
  const Eigen::MatrixXd si = psd_sqrt(inner, "the covariance product");

  const double value =
      mean_term + ca.trace() + cb.trace() - 2.0 * si.trace();
  // Residuals that are tiny against the trace magnitudes are numerical
  // noise (identical inputs leave a few ulps); clip them to exactly zero.
  const double tol =
      1e-10 * (1.0 + std::abs(ca.trace()) + std::abs(cb.trace()));
  if (value < -std::max(1e-8, tol))
    throw NumericError("frechet_distance: negative distance " +
                       std::to_string(value));
  return value < tol ? 0.0 : value;
}

}  // namespace sgan::eval
