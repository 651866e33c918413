/* Copyright 2026 The morphoprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracle {

Mat Zeros(std::size_t rows, std::size_t cols) {
  return Mat(rows, Vec(cols, 0.0));
}

Mat Transpose(const Mat& a) {
  if (a.empty()) return {};
  Mat t = Zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

Mat Multiply(const Mat& a, const Mat& b) {
  Mat c = Zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

Eigen JacobiEigen(Mat a) {
  const std::size_t n = a.size();
  Mat v = Zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });
  Eigen out;
  for (std::size_t k : order) {
    out.values.push_back(a[k][k]);
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(col);
  }
  return out;
}

Mat Inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv = Zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

LdaResult BruteForceLda(const std::map<std::string, std::vector<Vec>>& classes,
                        double shrinkage) {
  const std::size_t d = classes.begin()->second.front().size();
  std::size_t total = 0;
  Vec global(d, 0.0);
  std::vector<Vec> means;
  std::vector<std::size_t> counts;
  Mat sw = Zeros(d, d);
  for (const auto& [label, members] : classes) {
    Vec mean(d, 0.0);
    for (const auto& x : members) {
      for (std::size_t i = 0; i < d; ++i) mean[i] += x[i];
    }
    for (std::size_t i = 0; i < d; ++i) {
      global[i] += mean[i];
      mean[i] /= static_cast<double>(members.size());
    }
    for (const auto& x : members) {
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          sw[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
        }
      }
    }
    total += members.size();
    means.push_back(mean);
    counts.push_back(members.size());
  }
  for (double& g : global) g /= static_cast<double>(total);
  Mat sb = Zeros(d, d);
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        sb[i][j] += static_cast<double>(counts[c]) * (means[c][i] - global[i]) *
                    (means[c][j] - global[j]);
      }
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += sw[i][i];
  const double lambda = shrinkage * trace / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) sw[i][i] += lambda;

  // R^{-1/2} = V diag(1/sqrt(e)) V^T
  Eigen r = JacobiEigen(sw);
  Mat inv_sqrt = Zeros(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const double w = 1.0 / std::sqrt(r.values[k]);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        inv_sqrt[i][j] += w * r.vectors[k][i] * r.vectors[k][j];
      }
    }
  }
  Mat m = Multiply(Multiply(inv_sqrt, sb), inv_sqrt);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double avg = 0.5 * (m[i][j] + m[j][i]);
      m[i][j] = m[j][i] = avg;
    }
  }
  Eigen e = JacobiEigen(m);
  const std::size_t num_axes = std::min(classes.size() - 1, d);
  LdaResult out;
  out.global_mean = global;
  for (std::size_t k = 0; k < num_axes; ++k) {
    Vec w(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) w[i] += inv_sqrt[i][j] * e.vectors[k][j];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    double maxabs = 0.0;
    for (double& x : w) {
      x /= norm;
      maxabs = std::max(maxabs, std::abs(x));
    }
    for (double x : w) {
      if (std::abs(x) > 1e-12 * maxabs) {
        if (x < 0) {
          for (double& y : w) y = -y;
        }
        break;
      }
    }
    out.eigenvalues.push_back(e.values[k]);
    out.axes.push_back(w);
  }
  return out;
}

OlsResult NormalEquationsOls(const Mat& x, const Vec& y, bool has_intercept) {
  const std::size_t n = x.size();
  const std::size_t p = x[0].size();
  Mat xt = Transpose(x);
  Mat xtx_inv = Inverse(Multiply(xt, x));
  Vec xty(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) xty[j] += x[i][j] * y[i];
  }
  OlsResult out;
  out.beta.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) out.beta[i] += xtx_inv[i][j] * xty[j];
  }
  double rss = 0.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double tss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < p; ++j) fit += x[i][j] * out.beta[j];
    rss += (y[i] - fit) * (y[i] - fit);
    tss += has_intercept ? (y[i] - ybar) * (y[i] - ybar) : y[i] * y[i];
  }
  const double sigma2 = rss / static_cast<double>(n - p);
  for (std::size_t j = 0; j < p; ++j) out.se.push_back(std::sqrt(sigma2 * xtx_inv[j][j]));
  out.r_squared = tss > 0 ? 1.0 - rss / tss : 0.0;
  return out;
}

void Welford::Add(double v) {
  ++n;
  const double delta = v - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (v - mean);
}

double Welford::Sd() const {
  return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
}

}  // namespace oracle
