#pragma once

#include <optional>
#include <vector>

#include "momdiag/hankel.hpp"
#include "momdiag/linalg.hpp"

namespace momdiag {

struct SpectralSummary {
  unsigned n = 0;
  unsigned p = 0;
  BigReal lambda_min;
  std::vector<BigReal> eigvec;  // unit 2-norm, first nonzero coordinate positive
  std::optional<BigReal> b1;    // empty when the smallest eigenvalue is clustered
  BigReal trace_inv;
  BigReal corner_inv;
  BigReal achieved_tol;
  unsigned bits = 0;
};

/// Smallest eigenvalue of a positive-definite matrix by inertia bisection,
/// to relative accuracy rel_tol. Throws NotPositiveDefinite.
BigReal smallest_eigenvalue(const SymMatrix& matrix, const BigReal& rel_tol);
BigReal smallest_eigenvalue(const HankelMatrix& matrix, const BigReal& rel_tol);

/// Unit eigenvector for the smallest eigenvalue by shifted inverse
/// iteration. Throws ClusteredEigenvalue if lambda_1 is not isolated at
/// relative gap 10^3 * rel_tol.
std::vector<BigReal> smallest_eigenvector(const SymMatrix& matrix, const BigReal& lambda, const BigReal& rel_tol);

/// d lambda_1 / d m_0 = v_0^2 / |v|^2.
BigReal b1_coefficient(const SymMatrix& matrix, const BigReal& rel_tol);
BigReal b1_coefficient(const HankelMatrix& matrix, const BigReal& rel_tol);

BigReal trace_inverse(const SymMatrix& matrix);
BigReal trace_inverse(const HankelMatrix& matrix);
/// (H^{-1})_{0,0}.
BigReal corner_inverse(const SymMatrix& matrix);
BigReal corner_inverse(const HankelMatrix& matrix);

/// All eigenvalues in ascending order by inertia bisection.
std::vector<BigReal> full_spectrum(const SymMatrix& matrix, const BigReal& rel_tol);

/// (lambda_k(hi) - lambda_k(lo)) / eps where hi = lo + eps * e_0 e_0^T.
/// Throws ShapeMismatch if the matrices differ outside the (0,0) corner or eps <= 0.
std::vector<BigReal> b_spectrum(const SymMatrix& matrix_lo, const SymMatrix& matrix_hi, const BigReal& rel_tol);

/// Every spectral quantity for one matrix at its own precision.
SpectralSummary summarize(const SymMatrix& matrix, const BigReal& rel_tol);

/// Summary of H_{n,p}, rebuilt at escalating precision until lambda_1, b_1,
/// Tr(H^-1) and H^-1(0,0) agree to ctx.target_rel_tol.
SpectralSummary spectral_summary(const MomentProvider& provider, unsigned n, unsigned p, const PrecisionContext& ctx);

/// Relative disagreement between two summaries of the same matrix.
double summary_distance(const SpectralSummary& a, const SpectralSummary& b);

/// Bisection tolerance used for a given stabilization target.
BigReal bisection_tolerance(const PrecisionContext& ctx, unsigned bits);

}  // namespace momdiag
