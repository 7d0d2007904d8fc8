#pragma once

// Minimal fixed-size dense kernels for the 6-dimensional moment system:
// matrix products, the Lyapunov right-hand side, a cyclic Jacobi eigenvalue
// solver for small symmetric matrices and an LU determinant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace optoforce {

using Vec6 = std::array<double, 6>;

struct Mat6 {
  std::array<double, 36> m{};

  double& operator()(int i, int j) { return m[static_cast<size_t>(6 * i + j)]; }
  double operator()(int i, int j) const { return m[static_cast<size_t>(6 * i + j)]; }

  static Mat6 zero() { return Mat6{}; }
  static Mat6 identity() {
    Mat6 r;
    for (int i = 0; i < 6; ++i) r(i, i) = 1.0;
    return r;
  }
};

inline Vec6 mat_vec(const Mat6& a, const Vec6& x) {
  Vec6 r{};
  for (int i = 0; i < 6; ++i) {
    double s = 0;
    for (int j = 0; j < 6; ++j) s += a(i, j) * x[static_cast<size_t>(j)];
    r[static_cast<size_t>(i)] = s;
  }
  return r;
}

inline Mat6 mat_mul(const Mat6& a, const Mat6& b) {
  Mat6 r;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double s = 0;
      for (int k = 0; k < 6; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

// a*x + x*a^T + d, the covariance right-hand side.
inline Mat6 lyapunov_rhs(const Mat6& a, const Mat6& x, const Mat6& d) {
  Mat6 r;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double s = d(i, j);
      for (int k = 0; k < 6; ++k) s += a(i, k) * x(k, j) + x(i, k) * a(j, k);
      r(i, j) = s;
    }
  return r;
}

inline void symmetrize(Mat6& x) {
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) {
      const double v = 0.5 * (x(i, j) + x(j, i));
      x(i, j) = v;
      x(j, i) = v;
    }
}

// Eigenvalues of a symmetric n x n matrix (row-major), cyclic Jacobi.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  auto at = [&a, n](int i, int j) -> double& { return a[static_cast<size_t>(n * i + j)]; };
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-30 * static_cast<double>(n * n)) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (at(p, q) == 0.0) continue;
        const double tau = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = at(i, i);
  return ev;
}

inline std::vector<double> symmetric_eigenvalues(const Mat6& x) {
  return symmetric_eigenvalues(std::vector<double>(x.m.begin(), x.m.end()), 6);
}

inline double min_eigenvalue(const Mat6& x) {
  double mn = std::numeric_limits<double>::infinity();
  for (double v : symmetric_eigenvalues(x)) mn = std::min(mn, v);
  return mn;
}

// Determinant via LU with partial pivoting.
inline double determinant(const Mat6& x) {
  std::array<double, 36> a = x.m;
  auto at = [&a](int i, int j) -> double& { return a[static_cast<size_t>(6 * i + j)]; };
  double det = 1.0;
  for (int k = 0; k < 6; ++k) {
    int piv = k;
    for (int i = k + 1; i < 6; ++i)
      if (std::abs(at(i, k)) > std::abs(at(piv, k))) piv = i;
    if (piv != k) {
      for (int j = 0; j < 6; ++j) std::swap(at(k, j), at(piv, j));
      det = -det;
    }
    if (at(k, k) == 0.0) return 0.0;
    det *= at(k, k);
    for (int i = k + 1; i < 6; ++i) {
      const double f = at(i, k) / at(k, k);
      for (int j = k; j < 6; ++j) at(i, j) -= f * at(k, j);
    }
  }
  return det;
}

}  // namespace optoforce
