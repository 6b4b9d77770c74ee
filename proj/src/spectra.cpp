#include "momdiag/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace momdiag {

namespace {

BigReal min_diagonal(const SymMatrix& a) {
  BigReal best = a(0, 0);
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a(i, i) < best) best = a(i, i);
  }
  return best;
}

struct InverseFunctionals {
  BigReal trace;
  BigReal corner;
};

InverseFunctionals inverse_functionals(const Ldlt& f) {
  // H^{-1} = L^{-T} D^{-1} L^{-1}, so (H^{-1})_{ii} = sum_k W_{k,i}^2 / d_k with W = L^{-1}.
  const std::size_t n = f.n;
  const std::vector<BigReal> w = unit_lower_inverse(f);
  const unsigned bits = f.pivots[0].bits();
  BigReal trace(bits), corner(bits);
  for (std::size_t k = 0; k < n; ++k) {
    BigReal row(bits);
    for (std::size_t i = 0; i <= k; ++i) add_mul(row, w[k * n + i], w[k * n + i]);
    trace += row / f.pivots[k];
    corner += w[k * n] * w[k * n] / f.pivots[k];
  }
  return {std::move(trace), std::move(corner)};
}

BigReal norm2(std::span<const BigReal> v) {
  BigReal s(v.empty() ? kMinBits : v[0].bits());
  for (const auto& x : v) add_mul(s, x, x);
  return sqrt(s);
}

void normalize(std::vector<BigReal>& v) {
  const BigReal nrm = norm2(v);
  for (auto& x : v) x /= nrm;
  for (const auto& x : v) {
    if (!x.is_zero()) {
      if (x.sign() < 0) {
        for (auto& y : v) y = -y;
      }
      break;
    }
  }
}

void require_square_nonempty(const SymMatrix& a) {
  if (a.size() == 0) throw Error(Errc::ShapeMismatch, "empty matrix");
}

}  // namespace

BigReal smallest_eigenvalue(const SymMatrix& a, const BigReal& rel_tol) {
  require_square_nonempty(a);
  const unsigned bits = a.bits();
  const Ldlt f = ldlt_positive_definite(a);
  if (a.size() == 1) return a(0, 0);

  BigReal hi = min(min_diagonal(a), a.inf_norm());
  // 1/Tr(A^{-1}) <= lambda_1; confirm numerically before trusting it.
  BigReal lo = BigReal(1, bits) / inverse_functionals(f).trace;
  for (int tries = 0; tries < 4 && !shifted_positive_definite(a, lo); ++tries) lo /= BigReal(2, bits);
  if (!shifted_positive_definite(a, lo)) lo = BigReal(bits);

  const BigReal tol = rel_tol.rounded(bits);
  const BigReal two(2, bits);
  for (unsigned iter = 0; iter < 8 * bits; ++iter) {
    if (lo.sign() > 0 && hi - lo <= tol * lo) break;
    BigReal mid = (lo.sign() > 0 && hi > two * lo) ? sqrt(lo * hi) : (lo + hi) / two;
    if (mid == lo || mid == hi) break;
    if (shifted_positive_definite(a, mid)) {
      lo = std::move(mid);
    } else {
      hi = std::move(mid);
    }
  }
  return (lo + hi) / two;
}

BigReal smallest_eigenvalue(const HankelMatrix& matrix, const BigReal& rel_tol) {
  return smallest_eigenvalue(matrix.dense(), rel_tol);
}

std::vector<BigReal> smallest_eigenvector(const SymMatrix& a, const BigReal& lambda, const BigReal& rel_tol) {
  require_square_nonempty(a);
  const unsigned bits = a.bits();
  const std::size_t n = a.size();
  if (n == 1) return {BigReal(1, bits)};

  const BigReal one(1, bits);
  const BigReal tol = rel_tol.rounded(bits);
  const BigReal gap_probe = lambda * (one + BigReal(1000, bits) * tol);
  if (count_below(a, gap_probe) != 1) {
    throw Error(Errc::ClusteredEigenvalue, "smallest eigenvalue is not isolated at relative gap " +
                                               (BigReal(1000, bits) * tol).to_decimal(3));
  }

  const BigReal norm1 = a.inf_norm();
  BigReal lam = lambda;
  BigReal shift_tol = tol;
  for (int rebisect = 0; rebisect < 3; ++rebisect) {
    const BigReal shift = lam * (one - BigReal(10, bits) * shift_tol);
    const Ldlt f = ldlt_positive_definite(a, &shift);
    std::vector<BigReal> v(n, one);
    normalize(v);
    for (int it = 0; it < 3; ++it) {
      v = ldlt_solve(f, v);
      normalize(v);
      if (it == 0) continue;
      std::vector<BigReal> r = a.multiply(v);
      for (std::size_t i = 0; i < n; ++i) sub_mul(r[i], lam, v[i]);
      if (norm2(r) <= BigReal(10, bits) * tol * norm1) return v;
    }
    shift_tol /= BigReal(1000, bits);
    lam = smallest_eigenvalue(a, shift_tol);
  }
  throw Error(Errc::ClusteredEigenvalue, "inverse iteration did not reach the residual bound");
}

BigReal b1_coefficient(const SymMatrix& a, const BigReal& rel_tol) {
  const BigReal lambda = smallest_eigenvalue(a, rel_tol);
  const auto v = smallest_eigenvector(a, lambda, rel_tol);
  BigReal nrm(a.bits());
  for (const auto& x : v) add_mul(nrm, x, x);
  return v[0] * v[0] / nrm;
}

BigReal b1_coefficient(const HankelMatrix& matrix, const BigReal& rel_tol) { return b1_coefficient(matrix.dense(), rel_tol); }

BigReal trace_inverse(const SymMatrix& a) {
  require_square_nonempty(a);
  return inverse_functionals(ldlt_positive_definite(a)).trace;
}

BigReal trace_inverse(const HankelMatrix& matrix) { return trace_inverse(matrix.dense()); }

BigReal corner_inverse(const SymMatrix& a) {
  require_square_nonempty(a);
  return inverse_functionals(ldlt_positive_definite(a)).corner;
}

BigReal corner_inverse(const HankelMatrix& matrix) { return corner_inverse(matrix.dense()); }

std::vector<BigReal> full_spectrum(const SymMatrix& a, const BigReal& rel_tol) {
  require_square_nonempty(a);
  const unsigned bits = a.bits();
  const BigReal bound = a.inf_norm() + BigReal(1, bits);
  const BigReal tol = rel_tol.rounded(bits);
  const BigReal floor_abs = a.inf_norm() * BigReal::two_pow(8 - static_cast<long>(bits), bits);
  const BigReal two(2, bits);
  std::vector<BigReal> out;
  out.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    BigReal lo = -bound, hi = bound;
    if (k > 0 && out.back() > lo) lo = out.back() - floor_abs;
    for (unsigned iter = 0; iter < 8 * bits; ++iter) {
      const BigReal width = hi - lo;
      if (width <= tol * max(abs(lo), abs(hi)) || width <= floor_abs) break;
      BigReal mid = (lo.sign() > 0 && hi > two * lo) ? sqrt(lo * hi) : (lo + hi) / two;
      if (mid == lo || mid == hi) break;
      if (count_below(a, mid) <= k) {
        lo = std::move(mid);
      } else {
        hi = std::move(mid);
      }
    }
    out.push_back((lo + hi) / two);
  }
  return out;
}

std::vector<BigReal> b_spectrum(const SymMatrix& lo, const SymMatrix& hi, const BigReal& rel_tol) {
  if (lo.size() != hi.size()) throw Error(Errc::ShapeMismatch, "matrices differ in size");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if ((i || j) && !(lo(i, j) == hi(i, j))) throw Error(Errc::ShapeMismatch, "matrices differ outside the (0,0) corner");
    }
  }
  const BigReal eps = hi(0, 0) - lo(0, 0);
  if (eps.sign() <= 0) throw Error(Errc::ShapeMismatch, "corner perturbation must be positive");
  const auto before = full_spectrum(lo, rel_tol);
  const auto after = full_spectrum(hi, rel_tol);
  std::vector<BigReal> b;
  b.reserve(before.size());
  for (std::size_t k = 0; k < before.size(); ++k) b.push_back((after[k] - before[k]) / eps);
  return b;
}

SpectralSummary summarize(const SymMatrix& a, const BigReal& rel_tol) {
  SpectralSummary s;
  s.n = static_cast<unsigned>(a.size() - 1);
  s.bits = a.bits();
  const Ldlt f = ldlt_positive_definite(a);
  auto inv = inverse_functionals(f);
  s.trace_inv = std::move(inv.trace);
  s.corner_inv = std::move(inv.corner);
  s.lambda_min = smallest_eigenvalue(a, rel_tol);
  try {
    s.eigvec = smallest_eigenvector(a, s.lambda_min, rel_tol);
    BigReal nrm(a.bits());
    for (const auto& x : s.eigvec) add_mul(nrm, x, x);
    s.b1 = s.eigvec[0] * s.eigvec[0] / nrm;
  } catch (const Error& e) {
    if (e.code() != Errc::ClusteredEigenvalue) throw;
  }
  s.achieved_tol = rel_tol.rounded(a.bits());
  return s;
}

BigReal bisection_tolerance(const PrecisionContext& ctx, unsigned bits) {
  BigReal tol = BigReal::from_double(ctx.target_rel_tol * 1e-6, bits);
  BigReal floor = BigReal::two_pow(16 - static_cast<long>(bits), bits);
  return max(tol, floor);
}

double summary_distance(const SpectralSummary& a, const SpectralSummary& b) {
  double d = std::max({relative_difference(a.lambda_min, b.lambda_min).to_double(),
                       relative_difference(a.trace_inv, b.trace_inv).to_double(),
                       relative_difference(a.corner_inv, b.corner_inv).to_double()});
  if (a.b1.has_value() != b.b1.has_value()) return 1.0;
  if (a.b1) d = std::max(d, relative_difference(*a.b1, *b.b1).to_double());
  return d;
}

SpectralSummary spectral_summary(const MomentProvider& provider, unsigned n, unsigned p, const PrecisionContext& ctx) {
  auto r = stabilize_with(
      [&](unsigned bits) {
        SpectralSummary s = summarize(build(provider, n, p, bits).dense(), bisection_tolerance(ctx, bits));
        s.p = p;
        return s;
      },
      summary_distance, ctx);
  SpectralSummary s = std::move(r.value);
  const BigReal agreement = BigReal::from_double(r.agreement, s.bits);
  s.achieved_tol = max(s.achieved_tol, agreement);
  return s;
}

}  // namespace momdiag
