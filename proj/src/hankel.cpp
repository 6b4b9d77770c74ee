#include "momdiag/hankel.hpp"

namespace momdiag {

HankelMatrix::HankelMatrix(MomentProvider source, unsigned n, unsigned p, unsigned bits)
    : source_(std::move(source)), n_(n), p_(p), bits_(bits) {
  const std::size_t count = 2 * static_cast<std::size_t>(n) + 1;
  if (auto dom = source_.domain_size(); dom && p + count > *dom) {
    throw Error(Errc::IndexOutOfRange, "H_{" + std::to_string(n) + "," + std::to_string(p) + "} needs m_" +
                                           std::to_string(p + count - 1) + " but only " + std::to_string(*dom) +
                                           " moments are available");
  }
  antidiag_.reserve(count);
  if (source_.is_exact()) {
    std::vector<ExactRational> exact;
    exact.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
      exact.push_back(*source_.exact_moment(p + s));
      antidiag_.push_back(exact.back().to_real(bits));
    }
    exact_ = std::move(exact);
  } else {
    for (std::size_t s = 0; s < count; ++s) antidiag_.push_back(source_.moment(p + s, bits));
  }
}

SymMatrix HankelMatrix::dense() const {
  SymMatrix m(dim(), bits_);
  for (std::size_t i = 0; i < dim(); ++i) {
    for (std::size_t j = i; j < dim(); ++j) m.set(i, j, antidiag_[i + j]);
  }
  return m;
}

std::vector<ExactRational> HankelMatrix::exact_dense() const {
  if (!exact_) throw Error(Errc::InvalidParameter, "source " + source_.describe() + " is not exact");
  std::vector<ExactRational> out;
  out.reserve(dim() * dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    for (std::size_t j = 0; j < dim(); ++j) out.push_back((*exact_)[i + j]);
  }
  return out;
}

HankelMatrix build(const MomentProvider& provider, unsigned n, unsigned p, unsigned bits) {
  return HankelMatrix(provider, n, p, bits);
}

std::optional<ExactRational> det_exact(const HankelMatrix& matrix) {
  if (!matrix.is_exact()) return std::nullopt;
  const auto entries = matrix.exact_dense();
  return determinant_exact(entries, matrix.dim());
}

BigReal det_at(const HankelMatrix& matrix) {
  if (auto q = det_exact(matrix)) return q->to_real(matrix.bits());
  return determinant(matrix.dense());
}

BigReal det(const HankelMatrix& matrix, const PrecisionContext& ctx) {
  if (auto q = det_exact(matrix)) return q->to_real(matrix.bits());
  return stabilize([&](unsigned bits) { return determinant(matrix.at_bits(bits).dense()); }, ctx).value;
}

void DetLedger::record(unsigned n, unsigned p, BigReal value) { values_.try_emplace({n, p}, std::move(value)); }

const BigReal* DetLedger::find(unsigned n, unsigned p) const {
  auto it = values_.find({n, p});
  return it == values_.end() ? nullptr : &it->second;
}

void DetLedger::merge(const DetLedger& other) {
  for (const auto& [key, value] : other.values_) values_.try_emplace(key, value);
  exact_ = exact_ && other.exact_;
}

namespace {

/// Hadamard bound for a positive-definite matrix: the product of its diagonal.
BigReal diagonal_product(const HankelMatrix& h) {
  BigReal prod(1, h.bits());
  for (std::size_t i = 0; i < h.dim(); ++i) prod *= h.entry(i, i);
  return abs(prod);
}

[[noreturn]] void degenerate(unsigned n, unsigned p) {
  throw Error(Errc::DegenerateSequence, "D_{" + std::to_string(n) + "," + std::to_string(p) +
                                            "} is numerically zero; sequence is not strictly positive definite");
}

}  // namespace

std::optional<ExactRational> ratio_exact(const MomentProvider& provider, unsigned p, unsigned n) {
  if (!provider.is_exact()) return std::nullopt;
  const HankelMatrix top = build(provider, n, p, kMinBits);
  const ExactRational num = *det_exact(top);
  if (n == 0) return num;
  const HankelMatrix tail = build(provider, n - 1, p + 2, kMinBits);
  const ExactRational den = *det_exact(tail);
  if (den.sign() == 0) degenerate(n - 1, p + 2);
  return num / den;
}

BigReal ratio_at(const MomentProvider& provider, unsigned p, unsigned n, unsigned bits) {
  if (auto q = ratio_exact(provider, p, n)) return q->to_real(bits);
  const HankelMatrix top = build(provider, n, p, bits);
  BigReal num = determinant(top.dense());
  if (n == 0) return num;
  const HankelMatrix tail = build(provider, n - 1, p + 2, bits);
  const BigReal den = determinant(tail.dense());
  if (den.sign() <= 0 || numerically_zero(den, diagonal_product(tail))) degenerate(n - 1, p + 2);
  return num / den;
}

BigReal a_minus_at(const MomentProvider& provider, unsigned p, unsigned n, unsigned bits) {
  if (auto q = ratio_exact(provider, p, n)) return (*provider.exact_moment(p) - *q).to_real(bits);
  return provider.moment(p, bits) - ratio_at(provider, p, n, bits);
}

BigReal latus_rectum_at(const MomentProvider& provider, unsigned n, unsigned bits) {
  if (n == 0) throw Error(Errc::InvalidParameter, "latus rectum needs n >= 1");
  return ratio_at(provider, 2, n - 1, bits);
}

BigReal ratio(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx) {
  if (auto q = ratio_exact(provider, p, n)) return q->to_real(ctx.start_bits);
  return stabilize([&](unsigned bits) { return ratio_at(provider, p, n, bits); }, ctx).value;
}

BigReal a_minus(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx) {
  if (provider.is_exact()) return a_minus_at(provider, p, n, ctx.start_bits);
  return stabilize([&](unsigned bits) { return a_minus_at(provider, p, n, bits); }, ctx).value;
}

BigReal latus_rectum(const MomentProvider& provider, unsigned n, const PrecisionContext& ctx) {
  if (n == 0) throw Error(Errc::InvalidParameter, "latus rectum needs n >= 1");
  return ratio(provider, 2, n - 1, ctx);
}

BigReal det_with_leading(const MomentProvider& provider, unsigned n, const BigReal& x, const BigReal& y, unsigned bits) {
  const HankelMatrix h = build(provider, n, 0, bits);
  SymMatrix m = h.dense();
  m.set(0, 0, x);
  if (n >= 1) m.set(0, 1, y);
  return determinant(m);
}

ExactRational det_with_leading_exact(const MomentProvider& provider, unsigned n, const ExactRational& x,
                                     const ExactRational& y) {
  const HankelMatrix h = build(provider, n, 0, kMinBits);
  auto entries = h.exact_dense();
  const std::size_t d = h.dim();
  entries[0] = x;
  if (n >= 1) {
    entries[1] = y;
    entries[d] = y;
  }
  return determinant_exact(entries, d);
}

}  // namespace momdiag
