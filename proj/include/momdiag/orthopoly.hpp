#pragma once

#include <vector>

#include "momdiag/hankel.hpp"

namespace momdiag {

/// p_0, ..., p_n orthonormal for the functional L(x^k) = m_{k+p}.
/// coeffs[k][i] is the coefficient of x^i in p_k; the leading one is positive.
struct OrthonormalBasis {
  unsigned n = 0;
  unsigned p = 0;
  std::vector<std::vector<BigReal>> coeffs;
  unsigned bits = 0;
};

/// Inverse of the Cholesky factor of H_{n,p}. Throws NotPositiveDefinite.
OrthonormalBasis orthonormal_basis(const MomentProvider& provider, unsigned n, unsigned p, unsigned bits);

/// sum_k p_k(0)^2, which equals the (0,0) entry of H_{n,p}^{-1}.
BigReal christoffel_sum_at_zero(const OrthonormalBasis& basis);

/// sum over k and i of coeffs[k][i]^2, which equals Tr(H_{n,p}^{-1}).
BigReal coefficient_square_sum(const OrthonormalBasis& basis);

/// 1 / coefficient_square_sum, stabilized over precision.
BigReal rho_bound(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx = {});

/// Monic orthogonal polynomials pi_0..pi_n (pi_k = x^k + ...) in exact
/// arithmetic, for rational providers. Throws InvalidParameter otherwise and
/// NotPositiveDefinite when a leading minor vanishes or is negative.
std::vector<std::vector<ExactRational>> monic_orthogonal_exact(const MomentProvider& provider, unsigned n, unsigned p);

}  // namespace momdiag
