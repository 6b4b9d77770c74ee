#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "momdiag/numerics.hpp"

namespace momdiag {

/// Dense symmetric matrix of BigReal, stored in full row-major form.
class SymMatrix {
 public:
  SymMatrix() = default;
  SymMatrix(std::size_t n, unsigned bits);
  /// Row-major list of n*n values; throws ShapeMismatch unless square and symmetric.
  static SymMatrix from_rows(const std::vector<std::vector<BigReal>>& rows);

  std::size_t size() const noexcept { return n_; }
  unsigned bits() const noexcept { return bits_; }
  const BigReal& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  /// Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, const BigReal& value);

  /// Max absolute row sum (equals the 1-norm for symmetric matrices).
  BigReal inf_norm() const;
  BigReal trace() const;
  /// v^T A v.
  BigReal quadratic_form(std::span<const BigReal> v) const;
  std::vector<BigReal> multiply(std::span<const BigReal> v) const;

 private:
  std::size_t n_ = 0;
  unsigned bits_ = kMinBits;
  std::vector<BigReal> a_;
};

/// A - shift * I = L D L^T with unit lower-triangular L.
struct Ldlt {
  std::size_t n = 0;
  std::vector<BigReal> pivots;  // D
  std::vector<BigReal> lower;   // L, row-major n*n, unit diagonal, zero above
};

/// Unpivoted LDL^T of A - shift*I; throws NotPositiveDefinite on the first
/// pivot <= 0 (the factorization doubles as a definiteness test).
Ldlt ldlt_positive_definite(const SymMatrix& a, const BigReal* shift = nullptr);

/// True when A - shift*I is positive definite; stops at the first nonpositive pivot.
bool shifted_positive_definite(const SymMatrix& a, const BigReal& shift);

/// Number of eigenvalues of A strictly below sigma, by Sylvester's law of
/// inertia on an unpivoted LDL^T of A - sigma*I. Zero pivots are nudged to
/// 2^(-bits) * ||A||.
std::size_t count_below(const SymMatrix& a, const BigReal& sigma);

std::vector<BigReal> ldlt_solve(const Ldlt& f, std::span<const BigReal> rhs);
/// Inverse of the unit lower factor, row-major n*n.
std::vector<BigReal> unit_lower_inverse(const Ldlt& f);

/// Determinant at the matrix precision: LDL^T when every pivot is positive,
/// full-pivoting Gaussian elimination otherwise.
BigReal determinant(const SymMatrix& a);

/// Exact determinant of an n*n rational matrix (row-major) by fraction-free
/// Bareiss elimination on the row-scaled integer matrix.
ExactRational determinant_exact(std::span<const ExactRational> entries, std::size_t n);

}  // namespace momdiag
