#include "momdiag/numerics.hpp"

#include <cctype>
#include <climits>
#include <cmath>
#include <ostream>

namespace momdiag {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::PrecisionExhausted: return "PrecisionExhausted";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DegenerateSequence: return "DegenerateSequence";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::ClusteredEigenvalue: return "ClusteredEigenvalue";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::TooShort: return "TooShort";
    case Errc::NotStieltjes: return "NotStieltjes";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

mpfr_prec_t clamp_bits(unsigned bits) {
  return static_cast<mpfr_prec_t>(bits < kMinBits ? kMinBits : bits);
}

mpfr_prec_t joint(const BigReal& a, const BigReal& b) {
  return static_cast<mpfr_prec_t>(a.bits() > b.bits() ? a.bits() : b.bits());
}

}  // namespace

BigReal::BigReal(unsigned bits) : live_(true) {
  mpfr_init2(v_, clamp_bits(bits));
  mpfr_set_zero(v_, 1);
}

BigReal::BigReal(long value, unsigned bits) : live_(true) {
  mpfr_init2(v_, clamp_bits(bits));
  mpfr_set_si(v_, value, MPFR_RNDN);
}

BigReal::BigReal(const BigReal& other) : live_(true) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& other) noexcept : live_(other.live_) {
  // mpfr_t is a one-element array of a plain struct, so a bitwise take-over is a valid move.
  v_[0] = other.v_[0];
  other.live_ = false;
}

BigReal& BigReal::operator=(const BigReal& other) {
  if (this == &other) return *this;
  if (!live_) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    live_ = true;
  } else if (mpfr_get_prec(v_) != mpfr_get_prec(other.v_)) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
  }
  mpfr_set(v_, other.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator=(BigReal&& other) noexcept {
  if (this == &other) return *this;
  if (live_) mpfr_clear(v_);
  v_[0] = other.v_[0];
  live_ = other.live_;
  other.live_ = false;
  return *this;
}

BigReal::~BigReal() {
  if (live_) mpfr_clear(v_);
}

BigReal BigReal::from_double(double value, unsigned bits) {
  BigReal r(bits);
  mpfr_set_d(r.v_, value, MPFR_RNDN);
  return r;
}

BigReal BigReal::from_string(std::string_view text, unsigned bits) {
  BigReal r(bits);
  const std::string s(text);
  char* end = nullptr;
  if (!s.empty()) mpfr_strtofr(r.v_, s.c_str(), &end, 10, MPFR_RNDN);
  if (s.empty() || end == s.c_str() || *end != '\0') {
    throw Error(Errc::ParseError, "not a decimal number: '" + s + "'");
  }
  return r;
}

BigReal BigReal::from_rational(const ExactRational& q, unsigned bits) {
  BigReal r(bits);
  mpfr_set_q(r.v_, q.value().get_mpq_t(), MPFR_RNDN);
  return r;
}

BigReal BigReal::two_pow(long exponent, unsigned bits) {
  BigReal r(bits);
  mpfr_set_ui_2exp(r.v_, 1, exponent, MPFR_RNDN);
  return r;
}

BigReal BigReal::rounded(unsigned bits) const {
  BigReal r(bits);
  mpfr_set(r.v_, v_, MPFR_RNDN);
  return r;
}

long BigReal::exponent() const noexcept {
  if (!mpfr_regular_p(v_)) return LONG_MIN;
  return mpfr_get_exp(v_);
}

std::string BigReal::to_decimal(int digits) const {
  if (digits < 1) digits = 1;
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

BigReal& BigReal::operator+=(const BigReal& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(v_, static_cast<mpfr_prec_t>(rhs.bits()), MPFR_RNDN);
  mpfr_add(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator-=(const BigReal& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(v_, static_cast<mpfr_prec_t>(rhs.bits()), MPFR_RNDN);
  mpfr_sub(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator*=(const BigReal& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(v_, static_cast<mpfr_prec_t>(rhs.bits()), MPFR_RNDN);
  mpfr_mul(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator/=(const BigReal& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(v_, static_cast<mpfr_prec_t>(rhs.bits()), MPFR_RNDN);
  mpfr_div(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal BigReal::operator-() const {
  BigReal r(bits());
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

BigReal operator+(const BigReal& a, const BigReal& b) {
  BigReal r(static_cast<unsigned>(joint(a, b)));
  mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigReal operator-(const BigReal& a, const BigReal& b) {
  BigReal r(static_cast<unsigned>(joint(a, b)));
  mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigReal operator*(const BigReal& a, const BigReal& b) {
  BigReal r(static_cast<unsigned>(joint(a, b)));
  mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigReal operator/(const BigReal& a, const BigReal& b) {
  BigReal r(static_cast<unsigned>(joint(a, b)));
  mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

bool operator==(const BigReal& a, const BigReal& b) noexcept { return mpfr_equal_p(a.v_, b.v_) != 0; }

std::partial_ordering operator<=>(const BigReal& a, const BigReal& b) noexcept {
  if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.v_, b.v_);
  return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
}

bool operator==(const BigReal& a, long b) noexcept { return !mpfr_nan_p(a.v_) && mpfr_cmp_si(a.v_, b) == 0; }

std::partial_ordering operator<=>(const BigReal& a, long b) noexcept {
  if (mpfr_nan_p(a.v_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp_si(a.v_, b);
  return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
}

std::ostream& operator<<(std::ostream& os, const BigReal& x) { return os << x.to_decimal(20); }

BigReal abs(const BigReal& x) {
  BigReal r(x.bits());
  mpfr_abs(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal sqrt(const BigReal& x) {
  BigReal r(x.bits());
  mpfr_sqrt(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal exp(const BigReal& x) {
  BigReal r(x.bits());
  mpfr_exp(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal log(const BigReal& x) {
  BigReal r(x.bits());
  mpfr_log(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal gamma(const BigReal& x) {
  BigReal r(x.bits());
  mpfr_gamma(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal pow(const BigReal& x, long n) {
  BigReal r(x.bits());
  mpfr_pow_si(r.get(), x.get(), n, MPFR_RNDN);
  return r;
}

const BigReal& max(const BigReal& a, const BigReal& b) { return a < b ? b : a; }
const BigReal& min(const BigReal& a, const BigReal& b) { return b < a ? b : a; }

namespace {

mpfr_ptr scratch(unsigned bits) {
  thread_local BigReal tmp(kMinBits);
  if (tmp.bits() != bits) mpfr_set_prec(tmp.get(), static_cast<mpfr_prec_t>(bits));
  return tmp.get();
}

}  // namespace

void sub_mul(BigReal& acc, const BigReal& a, const BigReal& b) {
  mpfr_ptr t = scratch(acc.bits());
  mpfr_mul(t, a.get(), b.get(), MPFR_RNDN);
  mpfr_sub(acc.get(), acc.get(), t, MPFR_RNDN);
}

void add_mul(BigReal& acc, const BigReal& a, const BigReal& b) {
  mpfr_ptr t = scratch(acc.bits());
  mpfr_mul(t, a.get(), b.get(), MPFR_RNDN);
  mpfr_add(acc.get(), acc.get(), t, MPFR_RNDN);
}

BigReal relative_difference(const BigReal& a, const BigReal& b) {
  const unsigned bits = a.bits() > b.bits() ? a.bits() : b.bits();
  if (a.is_zero() && b.is_zero()) return BigReal(bits);
  BigReal scale = max(abs(a), abs(b));
  return abs(a - b) / scale;
}

BigReal zero_threshold(const BigReal& scale) {
  return abs(scale) * BigReal::two_pow(8 - static_cast<long>(scale.bits()), scale.bits());
}

bool numerically_zero(const BigReal& x, const BigReal& scale) {
  BigReal thr = abs(scale) * BigReal::two_pow(8 - static_cast<long>(x.bits()), x.bits());
  return abs(x) <= thr;
}

ExactRational::ExactRational(const mpz_class& num, const mpz_class& den) : q_(num, den) {
  if (den == 0) throw Error(Errc::InvalidParameter, "zero denominator");
  q_.canonicalize();
}

ExactRational operator/(const ExactRational& a, const ExactRational& b) {
  if (b.sign() == 0) throw Error(Errc::InvalidParameter, "division by zero");
  return ExactRational(mpq_class(a.q_ / b.q_));
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw Error(Errc::ParseError, "not a decimal number: '" + std::string(whole) + "'");
  mpz_class z(std::string(s), 10);
  return neg ? mpz_class(-z) : z;
}

}  // namespace

ExactRational ExactRational::parse(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  const auto bad = [&] { return Error(Errc::ParseError, "not a decimal number: '" + std::string(whole) + "'"); };
  if (text.empty()) throw bad();

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), whole);
    mpz_class den = parse_integer(text.substr(slash + 1), whole);
    if (den == 0) throw bad();
    return ExactRational(num, den);
  }

  bool neg = false;
  if (text[0] == '+' || text[0] == '-') {
    neg = text[0] == '-';
    text.remove_prefix(1);
  }
  long exp10 = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view es = text.substr(e + 1);
    bool eneg = false;
    if (!es.empty() && (es[0] == '+' || es[0] == '-')) {
      eneg = es[0] == '-';
      es.remove_prefix(1);
    }
    if (!all_digits(es) || es.size() > 9) throw bad();
    exp10 = std::stol(std::string(es));
    if (eneg) exp10 = -exp10;
    text = text.substr(0, e);
  }
  std::string digits;
  std::string_view int_part = text;
  std::string_view frac_part;
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) throw bad();
  if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part))) throw bad();
  digits.append(int_part);
  digits.append(frac_part);
  exp10 -= static_cast<long>(frac_part.size());

  mpz_class num(digits, 10);
  if (neg) num = -num;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  return exp10 >= 0 ? ExactRational(mpz_class(num * scale), mpz_class(1)) : ExactRational(num, scale);
}

std::string ExactRational::to_string() const { return q_.get_str(); }

std::ostream& operator<<(std::ostream& os, const ExactRational& q) { return os << q.to_string(); }

void PrecisionContext::validate() const {
  if (start_bits < kMinBits) throw Error(Errc::InvalidParameter, "start_bits must be >= 64");
  if (start_bits > max_bits) throw Error(Errc::InvalidParameter, "start_bits exceeds max_bits");
  if (!(target_rel_tol > 0.0 && target_rel_tol < 1.0)) throw Error(Errc::InvalidParameter, "target_rel_tol must lie in (0,1)");
  if (escalation_factor < 2) throw Error(Errc::InvalidParameter, "escalation_factor must be >= 2");
}

namespace detail {

void throw_exhausted(unsigned max_bits, double last_agreement) {
  throw Error(Errc::PrecisionExhausted, "no agreement up to " + std::to_string(max_bits) +
                                            " bits (last relative disagreement " + std::to_string(last_agreement) + ")");
}

bool is_numerical_failure(const Error& e) {
  switch (e.code()) {
    case Errc::NonFinite:
    case Errc::NotPositiveDefinite:
    case Errc::DegenerateSequence:
    case Errc::ClusteredEigenvalue:
      return true;
    default:
      return false;
  }
}

}  // namespace detail

StabilizedValue stabilize(const std::function<BigReal(unsigned)>& compute, const PrecisionContext& ctx) {
  auto checked = [&](unsigned bits) {
    BigReal v = compute(bits);
    if (!v.is_finite()) throw Error(Errc::NonFinite, "non-finite result at " + std::to_string(bits) + " bits");
    return v;
  };
  auto distance = [](const BigReal& a, const BigReal& b) { return relative_difference(a, b).to_double(); };
  auto r = stabilize_with(checked, distance, ctx);
  return {std::move(r.value), r.bits, r.agreement};
}

}  // namespace momdiag
