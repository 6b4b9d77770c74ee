#pragma once

// Reference algorithms deliberately unrelated to the library's kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "momdiag/linalg.hpp"
#include "momdiag/numerics.hpp"

namespace oracle {

using momdiag::BigReal;
using momdiag::ExactRational;

/// Laplace expansion along the first row.
inline ExactRational cofactor_det(const std::vector<std::vector<ExactRational>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return ExactRational(1);
  if (n == 1) return a[0][0];
  ExactRational total;
  for (std::size_t j = 0; j < n; ++j) {
    if (a[0][j].sign() == 0) continue;
    std::vector<std::vector<ExactRational>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<ExactRational> row;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != j) row.push_back(a[i][k]);
      }
      minor.push_back(std::move(row));
    }
    const ExactRational term = a[0][j] * cofactor_det(minor);
    total = (j % 2 == 0) ? total + term : total - term;
  }
  return total;
}

/// Exact inverse by Gauss-Jordan with row swaps.
inline std::vector<std::vector<ExactRational>> exact_inverse(std::vector<std::vector<ExactRational>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<ExactRational>> inv(n, std::vector<ExactRational>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = ExactRational(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (a[piv][c].sign() == 0) ++piv;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const ExactRational s = ExactRational(1) / a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] = a[c][k] * s;
      inv[c][k] = inv[c][k] * s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].sign() == 0) continue;
      const ExactRational f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] = a[r][k] - f * a[c][k];
        inv[r][k] = inv[r][k] - f * inv[c][k];
      }
    }
  }
  return inv;
}

struct Eigen {
  std::vector<BigReal> values;                 // ascending
  std::vector<std::vector<BigReal>> vectors;   // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations until the off-diagonal mass is below 2^(-bits/2) of the total.
inline Eigen jacobi(const momdiag::SymMatrix& m) {
  const std::size_t n = m.size();
  const unsigned bits = m.bits();
  std::vector<std::vector<BigReal>> a(n, std::vector<BigReal>(n, BigReal(bits)));
  std::vector<std::vector<BigReal>> v(n, std::vector<BigReal>(n, BigReal(bits)));
  for (std::size_t i = 0; i < n; ++i) {
    v[i][i] = BigReal(1, bits);
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
  }
  const BigReal one(1, bits), two(2, bits);
  for (int sweep = 0; sweep < 100; ++sweep) {
    BigReal off(bits), total(bits);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= total * BigReal::two_pow(-static_cast<long>(bits) * 2 + 16, bits)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q].is_zero()) continue;
        const BigReal theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
        BigReal t = one / (abs(theta) + sqrt(theta * theta + one));
        if (theta.sign() < 0) t = -t;
        const BigReal c = one / sqrt(t * t + one);
        const BigReal s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const BigReal akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const BigReal apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const BigReal vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] < a[y][y]; });
  Eigen e;
  for (std::size_t k : order) {
    e.values.push_back(a[k][k]);
    std::vector<BigReal> col;
    for (std::size_t i = 0; i < n; ++i) col.push_back(v[i][k]);
    e.vectors.push_back(std::move(col));
  }
  return e;
}

/// Composite Simpson on [a, b] with `panels` (even) subintervals, in long double.
inline long double simpson(const std::function<long double(long double)>& f, long double a, long double b, int panels) {
  const long double h = (b - a) / panels;
  long double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

inline double rel(const BigReal& a, const BigReal& b) { return momdiag::relative_difference(a, b).to_double(); }

}  // namespace oracle
