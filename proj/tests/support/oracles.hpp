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

// Independent reference computations used as test oracles. Nothing here
// calls into the library's numerical routines.

#ifndef STEINKIT_TESTS_ORACLES_HPP
#define STEINKIT_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Central difference gradient.
inline Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x, double eps) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec up = x;
    Vec dn = x;
    up[i] += eps;
    dn[i] -= eps;
    g[i] = (f(up) - f(dn)) / (2.0 * eps);
  }
  return g;
}

// Central difference Jacobian of a vector field; J(a, b) = d f_a / d x_b.
inline Mat jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double eps) {
  const Eigen::Index d = x.size();
  Mat j(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    Vec up = x;
    Vec dn = x;
    up[b] += eps;
    dn[b] -= eps;
    j.col(b) = (f(up) - f(dn)) / (2.0 * eps);
  }
  return j;
}

// Relative error with a floor of one in the denominator.
inline double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Laplace expansion along the first row.
inline double cofactor_det(const Mat& a) {
  const Eigen::Index n = a.rows();
  if (n == 1) {
    return a(0, 0);
  }
  double det = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Mat minor(n - 1, n - 1);
    for (Eigen::Index i = 1; i < n; ++i) {
      Eigen::Index cc = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != c) {
          minor(i - 1, cc++) = a(i, j);
        }
      }
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * a(0, c) * cofactor_det(minor);
  }
  return det;
}

// Phi(x) from the Taylor series of erf, accurate for |x| < 6.
inline double phi_series(double x) {
  const double z = x / std::numbers::sqrt2;
  double term = z;
  double sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / n;
    sum += term / (2 * n + 1);
  }
  return 0.5 + sum / std::sqrt(std::numbers::pi);
}

// Phi^{-1}(u) by bisection on phi_series.
inline double phi_inverse_bisection(double u) {
  double lo = -8.0;
  double hi = 8.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi_series(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// One-sample Kolmogorov-Smirnov statistic against Phi.
inline double ks_statistic_normal(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 0.5 * std::erfc(-xs[i] / std::numbers::sqrt2);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Kernel pieces written out term by term for the RBF kernel exp(-|x-y|^2/h).
struct Rbf {
  double h;
  double k(const Vec& x, const Vec& y) const { return std::exp(-(x - y).squaredNorm() / h); }
  Vec dx(const Vec& x, const Vec& y) const { return -2.0 / h * (x - y) * k(x, y); }
  Vec dy(const Vec& x, const Vec& y) const { return 2.0 / h * (x - y) * k(x, y); }
  double trace_dxdy(const Vec& x, const Vec& y) const {
    const double r2 = (x - y).squaredNorm();
    return k(x, y) * (2.0 * x.size() / h - 4.0 * r2 / (h * h));
  }
};

// Gradient-free Stein kernel expanded by the product rule: with
// k~ = w(x) k w(y) and s_p = s_rho - s_w where s_w = grad log w, the score
// Stein kernel of p under k~ equals w(x) kappa_rho(x, y) w(y).
inline double gf_kernel_expanded(const Vec& x, const Vec& y, double wx, double wy,
                                 const Vec& sp_x, const Vec& sp_y, const Vec& sw_x,
                                 const Vec& sw_y, double h) {
  const Rbf r{h};
  const double k = r.k(x, y);
  const Vec kx = r.dx(x, y);
  const Vec ky = r.dy(x, y);
  const double ww = wx * wy;
  // Gradients of k~.
  const Vec ktx = ww * (kx + k * sw_x);
  const Vec kty = ww * (ky + k * sw_y);
  const double kt = ww * k;
  const double tr = ww * (r.trace_dxdy(x, y) + ky.dot(sw_x) + kx.dot(sw_y) + k * sw_x.dot(sw_y));
  return sp_x.dot(sp_y) * kt + sp_x.dot(kty) + sp_y.dot(ktx) + tr;
}

// Min of u'Ku on the 3-simplex by exhaustive grid at step `res`.
inline Vec simplex_grid_min(const Mat& k, double res) {
  const int steps = static_cast<int>(std::lround(1.0 / res));
  Vec best(3);
  double best_val = 1e300;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      Vec u(3);
      u << i * res, j * res, 1.0 - (i + j) * res;
      const double v = u.dot(k * u);
      if (v < best_val) {
        best_val = v;
        best = u;
      }
    }
  }
  return best;
}

// Mean and standard error of a sample.
struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    m += x;
  }
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) {
    s += (x - m) * (x - m);
  }
  s /= static_cast<double>(v.size() - 1);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace oracle

#endif  // STEINKIT_TESTS_ORACLES_HPP
