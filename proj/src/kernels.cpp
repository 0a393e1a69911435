// Copyright 2026 The steinkit Authors.
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

#include "steinkit/kernels.hpp"

#include <algorithm>
#include <vector>

namespace steinkit {

namespace {

void check_pair(const Vector& x, const Vector& y, double h) {
  require(x.size() >= 1 && x.size() == y.size(), "kernel inputs must have equal positive dimension");
  require(std::isfinite(h) && h > 0.0, "bandwidth must be positive and finite");
  require(x.allFinite() && y.allFinite(), "kernel inputs must be finite");
}

}  // namespace

KernelSpec KernelSpec::fixed(double h) {
  require(std::isfinite(h) && h > 0.0, "bandwidth must be positive and finite");
  return KernelSpec{h};
}

double rbf_eval(const Vector& x, const Vector& y, double h) {
  check_pair(x, y, h);
  return std::exp(-(x - y).squaredNorm() / h);
}

Vector rbf_grad_x(const Vector& x, const Vector& y, double h) {
  check_pair(x, y, h);
  const double k = std::exp(-(x - y).squaredNorm() / h);
  return (-2.0 / h * k) * (x - y);
}

Vector rbf_grad_y(const Vector& x, const Vector& y, double h) {
  check_pair(x, y, h);
  const double k = std::exp(-(x - y).squaredNorm() / h);
  return (2.0 / h * k) * (x - y);
}

double rbf_grad_xy_trace(const Vector& x, const Vector& y, double h) {
  check_pair(x, y, h);
  const double r2 = (x - y).squaredNorm();
  const double d = static_cast<double>(x.size());
  return std::exp(-r2 / h) * (2.0 * d / h - 4.0 * r2 / (h * h));
}

double median_distance(const Matrix& points) {
  const Eigen::Index n = points.rows();
  require(n >= 2, "median bandwidth needs at least two points");
  require(points.allFinite(), "median bandwidth needs finite points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(detail::squared_distance(points.row(i).data(),
                                                        points.row(j).data(), points.cols())));
    }
  }
  const std::size_t m = dist.size();
  const std::size_t mid = m / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double med = dist[mid];
  if (m % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  if (!(med > 0.0)) {
    fail(ErrorKind::kDegenerateEnsemble, "median pairwise distance is zero");
  }
  return med;
}

double median_bandwidth(const Matrix& points) {
  const double med = median_distance(points);
  return med * med / (2.0 * std::log(static_cast<double>(points.rows()) + 1.0));
}

double resolve_bandwidth(const KernelSpec& spec, const Matrix& points) {
  if (spec.bandwidth) {
    return *spec.bandwidth;
  }
  return median_bandwidth(points);
}

double weighted_kernel_eval(const Vector& x, const Vector& y, double w_x, double w_y, double h) {
  require(w_x >= 0.0 && w_y >= 0.0, "kernel weights must be nonnegative");
  return w_x * w_y * rbf_eval(x, y, h);
}

}  // namespace steinkit
