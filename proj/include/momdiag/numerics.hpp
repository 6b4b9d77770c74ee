#pragma once

#include <compare>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>
#include <mpfr.h>

#include "momdiag/error.hpp"

namespace momdiag {

inline constexpr unsigned kMinBits = 64;

class ExactRational;

/// Arbitrary-precision binary floating-point real backed by MPFR.
///
/// Every value carries its own precision. Binary operations round to
/// nearest at the larger precision of the two operands, so a computation
/// seeded with p-bit inputs stays at p bits throughout.
class BigReal {
 public:
  explicit BigReal(unsigned bits = kMinBits);
  BigReal(long value, unsigned bits);
  BigReal(const BigReal& other);
  BigReal(BigReal&& other) noexcept;
  BigReal& operator=(const BigReal& other);
  BigReal& operator=(BigReal&& other) noexcept;
  ~BigReal();

  static BigReal from_double(double value, unsigned bits);
  /// Parses a decimal literal, correctly rounded. Throws ParseError.
  static BigReal from_string(std::string_view text, unsigned bits);
  static BigReal from_rational(const ExactRational& q, unsigned bits);
  static BigReal two_pow(long exponent, unsigned bits);

  unsigned bits() const noexcept { return static_cast<unsigned>(mpfr_get_prec(v_)); }
  /// Copy rounded to a different precision.
  BigReal rounded(unsigned bits) const;

  bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
  int sign() const noexcept { return mpfr_sgn(v_); }
  /// Binary exponent e with 0.5 <= |x| / 2^e < 1; zero maps to LONG_MIN.
  long exponent() const noexcept;

  double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }
  /// Scientific decimal with `digits` significant digits, e.g. "4.418723406e-01".
  std::string to_decimal(int digits) const;

  mpfr_srcptr get() const noexcept { return v_; }
  mpfr_ptr get() noexcept { return v_; }

  BigReal& operator+=(const BigReal& rhs);
  BigReal& operator-=(const BigReal& rhs);
  BigReal& operator*=(const BigReal& rhs);
  BigReal& operator/=(const BigReal& rhs);
  BigReal operator-() const;

  friend BigReal operator+(const BigReal& a, const BigReal& b);
  friend BigReal operator-(const BigReal& a, const BigReal& b);
  friend BigReal operator*(const BigReal& a, const BigReal& b);
  friend BigReal operator/(const BigReal& a, const BigReal& b);
  friend bool operator==(const BigReal& a, const BigReal& b) noexcept;
  friend std::partial_ordering operator<=>(const BigReal& a, const BigReal& b) noexcept;
  friend bool operator==(const BigReal& a, long b) noexcept;
  friend std::partial_ordering operator<=>(const BigReal& a, long b) noexcept;

 private:
  mpfr_t v_;
  bool live_ = false;
};

std::ostream& operator<<(std::ostream& os, const BigReal& x);

BigReal abs(const BigReal& x);
BigReal sqrt(const BigReal& x);
BigReal exp(const BigReal& x);
BigReal log(const BigReal& x);
BigReal gamma(const BigReal& x);
BigReal pow(const BigReal& x, long n);
const BigReal& max(const BigReal& a, const BigReal& b);
const BigReal& min(const BigReal& a, const BigReal& b);

/// acc -= a * b, rounded at acc's precision.
void sub_mul(BigReal& acc, const BigReal& a, const BigReal& b);
/// acc += a * b, rounded at acc's precision.
void add_mul(BigReal& acc, const BigReal& a, const BigReal& b);

/// |a - b| / max(|a|, |b|); zero when both are zero.
BigReal relative_difference(const BigReal& a, const BigReal& b);

/// True when |x| <= 2^(8 - p) * |scale|, p being x's precision.
bool numerically_zero(const BigReal& x, const BigReal& scale);
/// The threshold 2^(8 - p) * |scale| used by numerically_zero.
BigReal zero_threshold(const BigReal& scale);

/// Exact rational number, always in lowest terms with positive denominator.
class ExactRational {
 public:
  ExactRational() = default;
  ExactRational(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  ExactRational(const mpz_class& num, const mpz_class& den);
  explicit ExactRational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  /// Accepts "12", "-0.45", "1.5e-3", ".5" and fractions "p/q". Throws ParseError.
  static ExactRational parse(std::string_view text);

  const mpq_class& value() const noexcept { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }
  bool is_integer() const { return q_.get_den() == 1; }
  int sign() const { return sgn(q_); }

  /// "p" for integers, "p/q" otherwise.
  std::string to_string() const;
  BigReal to_real(unsigned bits) const { return BigReal::from_rational(*this, bits); }

  friend ExactRational operator+(const ExactRational& a, const ExactRational& b) { return ExactRational(mpq_class(a.q_ + b.q_)); }
  friend ExactRational operator-(const ExactRational& a, const ExactRational& b) { return ExactRational(mpq_class(a.q_ - b.q_)); }
  friend ExactRational operator*(const ExactRational& a, const ExactRational& b) { return ExactRational(mpq_class(a.q_ * b.q_)); }
  friend ExactRational operator/(const ExactRational& a, const ExactRational& b);
  ExactRational operator-() const { return ExactRational(mpq_class(-q_)); }
  ExactRational& operator+=(const ExactRational& b) { q_ += b.q_; return *this; }
  ExactRational& operator-=(const ExactRational& b) { q_ -= b.q_; return *this; }
  ExactRational& operator*=(const ExactRational& b) { q_ *= b.q_; return *this; }
  friend bool operator==(const ExactRational& a, const ExactRational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const ExactRational& a, const ExactRational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

 private:
  mpq_class q_;
};

std::ostream& operator<<(std::ostream& os, const ExactRational& q);

struct PrecisionContext {
  unsigned start_bits = 256;
  unsigned max_bits = 16384;
  double target_rel_tol = 1e-8;
  unsigned escalation_factor = 2;

  /// Throws InvalidParameter when the invariants do not hold.
  void validate() const;
};

struct StabilizedValue {
  BigReal value;
  unsigned bits = 0;      // precision of the returned evaluation
  double agreement = 0;   // relative difference to the previous evaluation
};

/// Evaluates `compute` at start_bits, start_bits * factor, ... until two
/// successive results agree to target_rel_tol. A compute that throws an
/// Error at some precision is retried at the next one; the last error is
/// rethrown if max_bits is reached without any result.
StabilizedValue stabilize(const std::function<BigReal(unsigned)>& compute, const PrecisionContext& ctx);

namespace detail {
[[noreturn]] void throw_exhausted(unsigned max_bits, double last_agreement);
bool is_numerical_failure(const Error& e);
}  // namespace detail

/// Generic form of stabilize for any result type; `distance(prev, next)`
/// returns the relative disagreement of two evaluations.
template <class Result>
struct StabilizedResult {
  Result value;
  unsigned bits = 0;
  double agreement = 0;
};

template <class Compute, class Distance>
auto stabilize_with(Compute&& compute, Distance&& distance, const PrecisionContext& ctx)
    -> StabilizedResult<decltype(compute(0u))> {
  using Result = decltype(compute(0u));
  ctx.validate();
  std::optional<Result> prev;
  std::optional<Error> last_error;
  double last_agreement = 1.0;
  for (unsigned bits = ctx.start_bits;; ) {
    try {
      Result next = compute(bits);
      if (prev) {
        const double d = distance(*prev, next);
        last_agreement = d;
        if (d <= ctx.target_rel_tol) return {std::move(next), bits, d};
      }
      prev = std::move(next);
    } catch (const Error& e) {
      if (!detail::is_numerical_failure(e)) throw;
      last_error = e;
      prev.reset();
    }
    if (bits >= ctx.max_bits) break;
    const unsigned long grown = static_cast<unsigned long>(bits) * ctx.escalation_factor;
    bits = grown > ctx.max_bits ? ctx.max_bits : static_cast<unsigned>(grown);
  }
  if (!prev && last_error) throw *last_error;
  detail::throw_exhausted(ctx.max_bits, last_agreement);
}

}  // namespace momdiag
