#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "momdiag/linalg.hpp"
#include "momdiag/moments.hpp"

namespace momdiag {

/// H_{n,p} = (m_{i+j+p})_{i,j=0..n}, stored once per anti-diagonal so the
/// Hankel structure and symmetry hold exactly.
class HankelMatrix {
 public:
  HankelMatrix(MomentProvider source, unsigned n, unsigned p, unsigned bits);

  unsigned n() const noexcept { return n_; }
  unsigned p() const noexcept { return p_; }
  std::size_t dim() const noexcept { return n_ + 1; }
  unsigned bits() const noexcept { return bits_; }
  const MomentProvider& source() const noexcept { return source_; }

  const BigReal& entry(std::size_t i, std::size_t j) const { return antidiag_[i + j]; }
  /// m_{p}, ..., m_{p+2n}.
  const std::vector<BigReal>& antidiagonals() const noexcept { return antidiag_; }
  bool is_exact() const noexcept { return exact_.has_value(); }
  const std::optional<std::vector<ExactRational>>& exact_antidiagonals() const noexcept { return exact_; }

  SymMatrix dense() const;
  /// Row-major exact entries; throws InvalidParameter for transcendental sources.
  std::vector<ExactRational> exact_dense() const;
  /// The same matrix rebuilt from its source at another precision.
  HankelMatrix at_bits(unsigned bits) const { return HankelMatrix(source_, n_, p_, bits); }

 private:
  MomentProvider source_;
  unsigned n_;
  unsigned p_;
  unsigned bits_;
  std::vector<BigReal> antidiag_;
  std::optional<std::vector<ExactRational>> exact_;
};

/// Throws IndexOutOfRange when the provider cannot serve m_{2n+p}.
HankelMatrix build(const MomentProvider& provider, unsigned n, unsigned p, unsigned bits);

/// Exact determinant for rational sources.
std::optional<ExactRational> det_exact(const HankelMatrix& matrix);
/// Determinant at the matrix precision (exact value rounded when available).
BigReal det_at(const HankelMatrix& matrix);
/// D_{n,p}: exact for rational sources, else stabilized over precision.
BigReal det(const HankelMatrix& matrix, const PrecisionContext& ctx = {});

/// D_{n,p} values recorded during one diagnosis.
class DetLedger {
 public:
  explicit DetLedger(bool exact = false) : exact_(exact) {}

  void record(unsigned n, unsigned p, BigReal value);
  const BigReal* find(unsigned n, unsigned p) const;
  /// Union; entries already present are kept.
  void merge(const DetLedger& other);
  bool exact() const noexcept { return exact_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::map<std::pair<unsigned, unsigned>, BigReal>& values() const noexcept { return values_; }

 private:
  std::map<std::pair<unsigned, unsigned>, BigReal> values_;
  bool exact_;
};

/// D_{n,p} / D_{n-1,p+2} with D_{-1,.} := 1, evaluated at `bits` (exactly
/// for rational sources). Throws DegenerateSequence when the denominator is
/// numerically zero.
BigReal ratio_at(const MomentProvider& provider, unsigned p, unsigned n, unsigned bits);
std::optional<ExactRational> ratio_exact(const MomentProvider& provider, unsigned p, unsigned n);
/// m_p - ratio: the corner value making D_{n,p} vanish.
BigReal a_minus_at(const MomentProvider& provider, unsigned p, unsigned n, unsigned bits);
/// D_{n-1,2} / D_{n-2,4}, n >= 1.
BigReal latus_rectum_at(const MomentProvider& provider, unsigned n, unsigned bits);

BigReal ratio(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx = {});
BigReal a_minus(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx = {});
BigReal latus_rectum(const MomentProvider& provider, unsigned n, const PrecisionContext& ctx = {});

/// D_n with m_0 and m_1 replaced by x and y (the parabola's defining polynomial).
BigReal det_with_leading(const MomentProvider& provider, unsigned n, const BigReal& x, const BigReal& y, unsigned bits);
ExactRational det_with_leading_exact(const MomentProvider& provider, unsigned n, const ExactRational& x, const ExactRational& y);

}  // namespace momdiag
