#include <doctest.h>

#include "momdiag/orthopoly.hpp"
#include "momdiag/spectra.hpp"
#include "oracles.hpp"

using namespace momdiag;

namespace {

using Poly = std::vector<ExactRational>;

Poly times_x(const Poly& p) {
  Poly out(p.size() + 1);
  for (std::size_t i = 0; i < p.size(); ++i) out[i + 1] = p[i];
  return out;
}

/// Coordinates of `q` in the monic basis, by peeling off leading terms.
std::vector<ExactRational> coordinates(Poly q, const std::vector<Poly>& basis) {
  std::vector<ExactRational> c(basis.size());
  for (std::size_t k = q.size(); k-- > 0;) {
    if (q[k].sign() == 0) continue;
    c[k] = q[k];
    for (std::size_t i = 0; i <= k; ++i) q[i] = q[i] - c[k] * basis[k][i];
  }
  return c;
}

}  // namespace

TEST_CASE("Laguerre polynomials from Exp(1) moments") {
  const auto b = orthonormal_basis(exp_power_moments(1), 2, 0, 256);
  REQUIRE(b.coeffs.size() == 3);
  CHECK(b.coeffs[0][0] == BigReal(1, 256));
  // p1 = x - 1
  CHECK(oracle::rel(b.coeffs[1][0], BigReal(-1, 256)) < 1e-70);
  CHECK(oracle::rel(b.coeffs[1][1], BigReal(1, 256)) < 1e-70);
  // p2 = (x^2 - 4x + 2) / 2
  CHECK(oracle::rel(b.coeffs[2][0], BigReal(1, 256)) < 1e-70);
  CHECK(oracle::rel(b.coeffs[2][1], BigReal(-2, 256)) < 1e-70);
  CHECK(oracle::rel(b.coeffs[2][2], BigReal::from_double(0.5, 256)) < 1e-70);
}

TEST_CASE("basis rows are triangular with positive leading coefficient") {
  const auto b = orthonormal_basis(lognormal_moments(), 6, 1, 512);
  for (std::size_t k = 0; k < b.coeffs.size(); ++k) {
    CHECK(b.coeffs[k].size() == k + 1);
    CHECK(b.coeffs[k].back().sign() > 0);
  }
}

TEST_CASE("Gram matrix is the identity") {
  for (const auto& p : {lognormal_moments(), weibull_moments(ExactRational::parse("0.45")), exp_power_moments(3)}) {
    for (unsigned shift_p : {0u, 1u}) {
      const unsigned bits = 512;
      const auto b = orthonormal_basis(p, 6, shift_p, bits);
      const auto h = build(p, 6, shift_p, bits);
      for (std::size_t j = 0; j < b.coeffs.size(); ++j) {
        for (std::size_t k = 0; k < b.coeffs.size(); ++k) {
          BigReal g(bits);
          for (std::size_t a = 0; a < b.coeffs[j].size(); ++a) {
            for (std::size_t c = 0; c < b.coeffs[k].size(); ++c) g += b.coeffs[j][a] * b.coeffs[k][c] * h.entry(a, c);
          }
          const BigReal target(j == k ? 1 : 0, bits);
          CHECK(abs(g - target) <= BigReal::two_pow(16 - static_cast<long>(bits), bits));
        }
      }
    }
  }
}

TEST_CASE("Christoffel sum, coefficient squares and rho bound") {
  const auto e = exp_power_moments(1);
  CHECK(christoffel_sum_at_zero(orthonormal_basis(e, 0, 0, 128)) == BigReal(1, 128));
  CHECK(oracle::rel(christoffel_sum_at_zero(orthonormal_basis(e, 1, 0, 256)), BigReal(2, 256)) < 1e-70);
  CHECK(oracle::rel(coefficient_square_sum(orthonormal_basis(e, 1, 0, 256)), BigReal(3, 256)) < 1e-70);
  CHECK(rho_bound(e, 0, 0) == BigReal(1, 256));
  CHECK(oracle::rel(rho_bound(e, 0, 1), BigReal(1, 256) / BigReal(3, 256)) < 1e-12);
}

TEST_CASE("Christoffel sum times D_n / D_{n-1,2} is one") {
  for (const auto& p : {exp_power_moments(3), weibull_moments(ExactRational::parse("0.5"))}) {
    for (unsigned n = 1; n <= 6; ++n) {
      const BigReal s = christoffel_sum_at_zero(orthonormal_basis(p, n, 0, 512));
      const BigReal r = ratio_exact(p, 0, n)->to_real(512);
      CHECK(abs(s * r - BigReal(1, 512)).to_double() < 1e-60);
    }
  }
}

TEST_CASE("orthogonal polynomials obey a three-term recurrence") {
  for (const auto& p : {exp_power_moments(1), exp_power_moments(3), schmudgen_shift(exp_power_moments(1), ExactRational::parse("1/2"))}) {
    // X - 1/2 charges the negative axis, so only its p = 0 functional is positive.
    const bool half_line = p.describe().find("schmudgen") == std::string::npos;
    for (unsigned shift_p : {0u, 1u}) {
      if (shift_p == 1 && !half_line) continue;
      const unsigned n = 6;
      const auto basis = monic_orthogonal_exact(p, n, shift_p);
      for (unsigned k = 0; k < n; ++k) {
        const auto c = coordinates(times_x(basis[k]), basis);
        for (unsigned j = 0; j <= n; ++j) {
          CAPTURE(k);
          CAPTURE(j);
          if (j + 1 < k || j > k + 1) CHECK(c[j].sign() == 0);
        }
        CHECK(c[k + 1] == ExactRational(1));
        if (k > 0) CHECK(c[k - 1].sign() > 0);
      }
    }
  }
}

TEST_CASE("monic basis needs exact moments") {
  CHECK_THROWS_AS(monic_orthogonal_exact(lognormal_moments(), 2, 0), Error);
}
