#include "momdiag/orthopoly.hpp"

namespace momdiag {

OrthonormalBasis orthonormal_basis(const MomentProvider& provider, unsigned n, unsigned p, unsigned bits) {
  const SymMatrix h = build(provider, n, p, bits).dense();
  const Ldlt f = ldlt_positive_definite(h);
  // H = L D L^T, so the Cholesky factor is L D^{1/2} and its inverse is D^{-1/2} L^{-1}.
  const std::vector<BigReal> w = unit_lower_inverse(f);
  const std::size_t dim = f.n;
  OrthonormalBasis basis;
  basis.n = n;
  basis.p = p;
  basis.bits = bits;
  basis.coeffs.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const BigReal scale = BigReal(1, bits) / sqrt(f.pivots[k]);
    auto& row = basis.coeffs[k];
    row.reserve(k + 1);
    for (std::size_t i = 0; i <= k; ++i) row.push_back(w[k * dim + i] * scale);
  }
  return basis;
}

BigReal christoffel_sum_at_zero(const OrthonormalBasis& basis) {
  BigReal s(basis.bits);
  for (const auto& row : basis.coeffs) add_mul(s, row[0], row[0]);
  return s;
}

BigReal coefficient_square_sum(const OrthonormalBasis& basis) {
  BigReal s(basis.bits);
  for (const auto& row : basis.coeffs) {
    for (const auto& c : row) add_mul(s, c, c);
  }
  return s;
}

BigReal rho_bound(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx) {
  return stabilize(
             [&](unsigned bits) {
               return BigReal(1, bits) / coefficient_square_sum(orthonormal_basis(provider, n, p, bits));
             },
             ctx)
      .value;
}

std::vector<std::vector<ExactRational>> monic_orthogonal_exact(const MomentProvider& provider, unsigned n,
                                                               unsigned p) {
  const HankelMatrix h = build(provider, n, p, 64);
  const std::vector<ExactRational> a = h.exact_dense();
  const std::size_t dim = n + 1;

  // Exact L D L^T; row k of L^{-1} holds the monic pi_k.
  std::vector<ExactRational> l(dim * dim), d(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    ExactRational pivot = a[j * dim + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= l[j * dim + k] * l[j * dim + k] * d[k];
    if (pivot.sign() <= 0) throw Error(Errc::NotPositiveDefinite, "leading minor " + std::to_string(j) + " is not positive");
    d[j] = pivot;
    l[j * dim + j] = ExactRational(1);
    for (std::size_t i = j + 1; i < dim; ++i) {
      ExactRational s = a[i * dim + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * dim + k] * l[j * dim + k] * d[k];
      l[i * dim + j] = s / pivot;
    }
  }

  std::vector<std::vector<ExactRational>> out(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<ExactRational> row(k + 1);
    row[k] = ExactRational(1);
    for (std::size_t i = k; i-- > 0;) {
      ExactRational s;
      for (std::size_t j = i + 1; j <= k; ++j) s -= row[j] * l[j * dim + i];
      row[i] = s;
    }
    out[k] = std::move(row);
  }
  return out;
}

}  // namespace momdiag
