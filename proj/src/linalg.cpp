#include "momdiag/linalg.hpp"

#include <utility>

namespace momdiag {

SymMatrix::SymMatrix(std::size_t n, unsigned bits) : n_(n), bits_(bits) {
  a_.reserve(n * n);
  for (std::size_t i = 0; i < n * n; ++i) a_.emplace_back(bits);
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<BigReal>>& rows) {
  const std::size_t n = rows.size();
  unsigned bits = kMinBits;
  for (const auto& r : rows) {
    if (r.size() != n) throw Error(Errc::ShapeMismatch, "matrix is not square");
    for (const auto& x : r) bits = x.bits() > bits ? x.bits() : bits;
  }
  SymMatrix m(n, bits);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(rows[i][j] == rows[j][i])) throw Error(Errc::ShapeMismatch, "matrix is not symmetric");
      m.a_[i * n + j] = rows[i][j].rounded(bits);
    }
  }
  return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, const BigReal& value) {
  a_[i * n_ + j] = value.rounded(bits_);
  a_[j * n_ + i] = a_[i * n_ + j];
}

BigReal SymMatrix::inf_norm() const {
  BigReal best(bits_);
  for (std::size_t i = 0; i < n_; ++i) {
    BigReal row(bits_);
    for (std::size_t j = 0; j < n_; ++j) row += abs(a_[i * n_ + j]);
    if (row > best) best = row;
  }
  return best;
}

BigReal SymMatrix::trace() const {
  BigReal t(bits_);
  for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i];
  return t;
}

BigReal SymMatrix::quadratic_form(std::span<const BigReal> v) const {
  BigReal acc(bits_);
  for (std::size_t i = 0; i < n_; ++i) {
    BigReal row(bits_);
    for (std::size_t j = 0; j < n_; ++j) add_mul(row, a_[i * n_ + j], v[j]);
    add_mul(acc, row, v[i]);
  }
  return acc;
}

std::vector<BigReal> SymMatrix::multiply(std::span<const BigReal> v) const {
  std::vector<BigReal> out;
  out.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    BigReal row(bits_);
    for (std::size_t j = 0; j < n_; ++j) add_mul(row, a_[i * n_ + j], v[j]);
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

enum class ZeroPivot { fail, nudge };

/// Shared LDL^T kernel. Returns false when `on_zero == fail` and a pivot
/// <= 0 shows up; `negatives` counts negative pivots when requested.
bool factor(const SymMatrix& a, const BigReal* shift, Ldlt* out, std::size_t* negatives, ZeroPivot on_zero,
            bool stop_at_nonpositive) {
  const std::size_t n = a.size();
  const unsigned bits = a.bits();
  std::vector<BigReal> lower;
  lower.reserve(n * n);
  for (std::size_t i = 0; i < n * n; ++i) lower.emplace_back(bits);
  std::vector<BigReal> d;
  d.reserve(n);
  std::vector<BigReal> w;
  w.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.emplace_back(bits);
  BigReal nudge(bits);
  if (on_zero == ZeroPivot::nudge) nudge = a.inf_norm() * BigReal::two_pow(-static_cast<long>(bits), bits);
  if (nudge.is_zero()) nudge = BigReal::two_pow(-static_cast<long>(bits), bits);
  std::size_t neg = 0;

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) w[k] = lower[j * n + k] * d[k];
    BigReal pivot = a(j, j);
    if (shift) pivot -= *shift;
    for (std::size_t k = 0; k < j; ++k) sub_mul(pivot, lower[j * n + k], w[k]);
    if (pivot.is_zero()) {
      if (on_zero == ZeroPivot::fail) return false;
      pivot = nudge;
    }
    if (pivot.sign() < 0) {
      if (stop_at_nonpositive) return false;
      ++neg;
    }
    lower[j * n + j] = BigReal(1, bits);
    for (std::size_t i = j + 1; i < n; ++i) {
      BigReal v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sub_mul(v, lower[i * n + k], w[k]);
      v /= pivot;
      lower[i * n + j] = std::move(v);
    }
    d.push_back(std::move(pivot));
  }
  if (negatives) *negatives = neg;
  if (out) {
    out->n = n;
    out->pivots = std::move(d);
    out->lower = std::move(lower);
  }
  return true;
}

}  // namespace

Ldlt ldlt_positive_definite(const SymMatrix& a, const BigReal* shift) {
  Ldlt f;
  if (!factor(a, shift, &f, nullptr, ZeroPivot::fail, true)) {
    throw Error(Errc::NotPositiveDefinite, "nonpositive pivot in LDL^T of a " + std::to_string(a.size()) + "x" +
                                               std::to_string(a.size()) + " matrix at " + std::to_string(a.bits()) + " bits");
  }
  return f;
}

bool shifted_positive_definite(const SymMatrix& a, const BigReal& shift) {
  return factor(a, &shift, nullptr, nullptr, ZeroPivot::fail, true);
}

std::size_t count_below(const SymMatrix& a, const BigReal& sigma) {
  std::size_t neg = 0;
  factor(a, &sigma, nullptr, &neg, ZeroPivot::nudge, false);
  return neg;
}

std::vector<BigReal> ldlt_solve(const Ldlt& f, std::span<const BigReal> rhs) {
  const std::size_t n = f.n;
  std::vector<BigReal> y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) sub_mul(y[i], f.lower[i * n + k], y[k]);
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= f.pivots[i];
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) sub_mul(y[ii], f.lower[k * n + ii], y[k]);
  }
  return y;
}

std::vector<BigReal> unit_lower_inverse(const Ldlt& f) {
  const std::size_t n = f.n;
  const unsigned bits = n ? f.pivots[0].bits() : kMinBits;
  std::vector<BigReal> inv;
  inv.reserve(n * n);
  for (std::size_t i = 0; i < n * n; ++i) inv.emplace_back(bits);
  for (std::size_t j = 0; j < n; ++j) {
    inv[j * n + j] = BigReal(1, bits);
    for (std::size_t i = j + 1; i < n; ++i) {
      BigReal v(bits);
      for (std::size_t k = j; k < i; ++k) sub_mul(v, f.lower[i * n + k], inv[k * n + j]);
      inv[i * n + j] = std::move(v);
    }
  }
  return inv;
}

BigReal determinant(const SymMatrix& a) {
  const std::size_t n = a.size();
  const unsigned bits = a.bits();
  if (n == 0) return BigReal(1, bits);
  Ldlt f;
  if (factor(a, nullptr, &f, nullptr, ZeroPivot::fail, true)) {
    BigReal det(1, bits);
    for (const auto& p : f.pivots) det *= p;
    return det;
  }
  // Full pivoting fallback for indefinite or singular input.
  std::vector<BigReal> m;
  m.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.push_back(a(i, j));
  }
  BigReal det(1, bits);
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    for (std::size_t i = k; i < n; ++i) {
      for (std::size_t j = k; j < n; ++j) {
        if (abs(m[i * n + j]) > abs(m[pr * n + pc])) { pr = i; pc = j; }
      }
    }
    if (m[pr * n + pc].is_zero()) return BigReal(bits);
    if (pr != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[pr * n + j], m[k * n + j]);
      sign = -sign;
    }
    if (pc != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(m[i * n + pc], m[i * n + k]);
      sign = -sign;
    }
    const BigReal& piv = m[k * n + k];
    det *= piv;
    for (std::size_t i = k + 1; i < n; ++i) {
      BigReal factor = m[i * n + k] / piv;
      for (std::size_t j = k + 1; j < n; ++j) sub_mul(m[i * n + j], factor, m[k * n + j]);
    }
  }
  return sign < 0 ? -det : det;
}

ExactRational determinant_exact(std::span<const ExactRational> entries, std::size_t n) {
  if (entries.size() != n * n) throw Error(Errc::ShapeMismatch, "entry count does not match n*n");
  if (n == 0) return ExactRational(1);
  std::vector<mpz_class> m(n * n);
  mpz_class scale = 1;
  for (std::size_t i = 0; i < n; ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < n; ++j) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), entries[i * n + j].denominator().get_mpz_t());
    for (std::size_t j = 0; j < n; ++j) {
      const auto& q = entries[i * n + j];
      m[i * n + j] = q.numerator() * (l / q.denominator());
    }
    scale *= l;
  }
  int sign = 1;
  mpz_class prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k * n + k] == 0) {
      std::size_t r = k + 1;
      while (r < n && m[r * n + k] == 0) ++r;
      if (r == n) return ExactRational(0);
      for (std::size_t j = 0; j < n; ++j) std::swap(m[r * n + j], m[k * n + j]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        mpz_class v = m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j];
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        m[i * n + j] = std::move(v);
      }
      m[i * n + k] = 0;
    }
    prev = m[k * n + k];
  }
  mpz_class det = m[(n - 1) * n + (n - 1)];
  if (sign < 0) det = -det;
  return ExactRational(det, scale);
}

}  // namespace momdiag
