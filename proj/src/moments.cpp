#include "momdiag/moments.hpp"

#include <variant>

namespace momdiag {

namespace {

struct Weibull { ExactRational beta; };
struct Lognormal {};
struct ExpPower { ExactRational r; };
struct Explicit { std::vector<ExactRational> values; };
struct Shifted { MomentProvider inner; std::size_t p; };
struct Heyde { MomentProvider inner; ExactRational delta; };
struct Schmudgen { MomentProvider inner; ExactRational u; };

constexpr unsigned kGuardBits = 32;

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

mpz_class factorial(unsigned long n) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return f;
}

mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), n, k);
  return b;
}

/// Integer s with 1/beta == s, if any.
std::optional<unsigned long> reciprocal_integer(const ExactRational& beta) {
  if (beta.numerator() != 1) return std::nullopt;
  const mpz_class s = beta.denominator();
  if (!s.fits_ulong_p()) return std::nullopt;
  return s.get_ui();
}

std::optional<unsigned long> as_ulong(const ExactRational& r) {
  if (!r.is_integer() || r.sign() <= 0) return std::nullopt;
  const mpz_class z = r.numerator();
  if (!z.fits_ulong_p()) return std::nullopt;
  return z.get_ui();
}

/// Finite decimal expansion when the denominator is 2^a 5^b, else "p/q".
std::string decimal_or_fraction(const ExactRational& q) {
  if (q.is_integer()) return q.to_string();
  mpz_class den = q.denominator();
  unsigned long twos = 0, fives = 0;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) { den /= 2; ++twos; }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) { den /= 5; ++fives; }
  if (den != 1) return q.to_string();
  const unsigned long places = twos > fives ? twos : fives;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
  mpz_class scaled = q.numerator() * scale / q.denominator();
  const bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string digits = scaled.get_str();
  if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
  digits.insert(digits.size() - places, ".");
  return (neg ? "-" : "") + digits;
}

}  // namespace

struct MomentProvider::Node {
  std::variant<Weibull, Lognormal, ExpPower, Explicit, Shifted, Heyde, Schmudgen> kind;
};

namespace {

MomentProvider make(auto kind) {
  return MomentProvider(std::make_shared<const MomentProvider::Node>(MomentProvider::Node{std::move(kind)}));
}

BigReal schmudgen_float(const Schmudgen& s, std::size_t k, unsigned bits) {
  // Alternating binomial sums cancel; widen the working precision until the
  // cancellation leaves at least `bits` good bits.
  unsigned work = bits + kGuardBits;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const BigReal u = s.u.to_real(work);
    BigReal sum(work), magnitude(work);
    BigReal upow(1, work);
    for (std::size_t j = 0; j <= k; ++j) {
      BigReal term = BigReal::from_rational(ExactRational(mpq_class(binomial(k, j))), work) * upow *
                     s.inner.moment(k - j, work);
      magnitude += abs(term);
      if (j % 2 == 0) sum += term; else sum -= term;
      upow *= u;
    }
    if (magnitude.is_zero()) return BigReal(bits);
    const long lost = sum.is_zero() ? static_cast<long>(work) : magnitude.exponent() - sum.exponent();
    if (lost + static_cast<long>(bits) + 8 <= static_cast<long>(work)) return sum.rounded(bits);
    work = static_cast<unsigned>(bits + kGuardBits + (lost > 0 ? lost : 0) * 2);
  }
  throw Error(Errc::PrecisionExhausted, "schmudgen transform cancels beyond the working precision");
}

}  // namespace

Exactness MomentProvider::exactness() const {
  return std::visit(overloaded{
                        [](const Weibull& w) { return reciprocal_integer(w.beta) ? Exactness::rational : Exactness::transcendental; },
                        [](const Lognormal&) { return Exactness::transcendental; },
                        [](const ExpPower& e) { return as_ulong(e.r) ? Exactness::rational : Exactness::transcendental; },
                        [](const Explicit&) { return Exactness::rational; },
                        [](const Shifted& s) { return s.inner.exactness(); },
                        [](const Heyde& h) { return h.inner.exactness(); },
                        [](const Schmudgen& s) { return s.inner.exactness(); },
                    },
                    node_->kind);
}

std::optional<std::size_t> MomentProvider::domain_size() const {
  return std::visit(overloaded{
                        [](const Explicit& e) -> std::optional<std::size_t> { return e.values.size(); },
                        [](const Shifted& s) -> std::optional<std::size_t> {
                          auto n = s.inner.domain_size();
                          if (!n) return std::nullopt;
                          return *n > s.p ? *n - s.p : 0;
                        },
                        [](const Heyde& h) { return h.inner.domain_size(); },
                        [](const Schmudgen& s) { return s.inner.domain_size(); },
                        [](const auto&) -> std::optional<std::size_t> { return std::nullopt; },
                    },
                    node_->kind);
}

std::optional<ExactRational> MomentProvider::exact_moment(std::size_t k) const {
  if (!is_exact()) return std::nullopt;
  if (auto n = domain_size(); n && k >= *n) {
    throw Error(Errc::IndexOutOfRange, "moment index " + std::to_string(k) + " beyond " + std::to_string(*n) + " values");
  }
  return std::visit(overloaded{
                        [k](const Weibull& w) -> std::optional<ExactRational> {
                          const unsigned long s = *reciprocal_integer(w.beta);
                          return ExactRational(factorial((k + 1) * s - 1), factorial(s - 1));
                        },
                        [k](const ExpPower& e) -> std::optional<ExactRational> {
                          return ExactRational(factorial(*as_ulong(e.r) * k), mpz_class(1));
                        },
                        [k](const Explicit& e) -> std::optional<ExactRational> { return e.values[k]; },
                        [k](const Shifted& s) { return s.inner.exact_moment(k + s.p); },
                        [k](const Heyde& h) -> std::optional<ExactRational> {
                          if (k == 0) return ExactRational(1);
                          return *h.inner.exact_moment(k) / (ExactRational(1) + h.delta);
                        },
                        [k](const Schmudgen& s) -> std::optional<ExactRational> {
                          ExactRational sum(0);
                          ExactRational upow(1);
                          for (std::size_t j = 0; j <= k; ++j) {
                            ExactRational term = ExactRational(mpq_class(binomial(k, j))) * upow * *s.inner.exact_moment(k - j);
                            if (j % 2 == 0) sum += term; else sum -= term;
                            upow *= s.u;
                          }
                          return sum;
                        },
                        [](const auto&) -> std::optional<ExactRational> { return std::nullopt; },
                    },
                    node_->kind);
}

BigReal MomentProvider::moment(std::size_t k, unsigned bits) const {
  if (auto n = domain_size(); n && k >= *n) {
    throw Error(Errc::IndexOutOfRange, "moment index " + std::to_string(k) + " beyond " + std::to_string(*n) + " values");
  }
  if (auto q = exact_moment(k)) return q->to_real(bits);
  const unsigned work = bits + kGuardBits;
  return std::visit(overloaded{
                        [&](const Weibull& w) {
                          if (k == 0) return BigReal(1, bits);
                          const ExactRational inv = ExactRational(1) / w.beta;
                          const BigReal top = gamma((ExactRational(static_cast<long>(k + 1)) * inv).to_real(work));
                          const BigReal bottom = gamma(inv.to_real(work));
                          return (top / bottom).rounded(bits);
                        },
                        [&](const Lognormal&) {
                          if (k == 0) return BigReal(1, bits);
                          BigReal arg(static_cast<long>(k * k), work);
                          arg /= BigReal(2, work);
                          return exp(arg).rounded(bits);
                        },
                        [&](const ExpPower& e) {
                          if (k == 0) return BigReal(1, bits);
                          const ExactRational arg = ExactRational(1) + e.r * ExactRational(static_cast<long>(k));
                          return gamma(arg.to_real(work)).rounded(bits);
                        },
                        [&](const Shifted& s) { return s.inner.moment(k + s.p, bits); },
                        [&](const Heyde& h) {
                          if (k == 0) return BigReal(1, bits);
                          return (h.inner.moment(k, work) / (ExactRational(1) + h.delta).to_real(work)).rounded(bits);
                        },
                        [&](const Schmudgen& s) { return schmudgen_float(s, k, bits); },
                        [&](const Explicit&) -> BigReal { throw Error(Errc::InvalidParameter, "unreachable"); },
                    },
                    node_->kind);
}

std::string MomentProvider::describe() const {
  return std::visit(overloaded{
                        [](const Weibull& w) { return "weibull(beta=" + decimal_or_fraction(w.beta) + ")"; },
                        [](const Lognormal&) { return std::string("lognormal"); },
                        [](const ExpPower& e) { return "exp_power(r=" + decimal_or_fraction(e.r) + ")"; },
                        [](const Explicit& e) { return "explicit[" + std::to_string(e.values.size()) + "]"; },
                        [](const Shifted& s) { return "shift(" + s.inner.describe() + ", p=" + std::to_string(s.p) + ")"; },
                        [](const Heyde& h) { return "heyde(" + h.inner.describe() + ", delta=" + decimal_or_fraction(h.delta) + ")"; },
                        [](const Schmudgen& s) { return "schmudgen(" + s.inner.describe() + ", u=" + decimal_or_fraction(s.u) + ")"; },
                    },
                    node_->kind);
}

nlohmann::json MomentProvider::to_json() const {
  using nlohmann::json;
  json transforms = json::array();
  const MomentProvider* cur = this;
  std::vector<json> stack;
  for (;;) {
    const auto& kind = cur->node_->kind;
    if (const auto* s = std::get_if<Shifted>(&kind)) {
      stack.push_back({{"op", "shift"}, {"p", std::to_string(s->p)}});
      cur = &s->inner;
    } else if (const auto* h = std::get_if<Heyde>(&kind)) {
      stack.push_back({{"op", "heyde"}, {"delta", decimal_or_fraction(h->delta)}});
      cur = &h->inner;
    } else if (const auto* u = std::get_if<Schmudgen>(&kind)) {
      stack.push_back({{"op", "schmudgen"}, {"u", decimal_or_fraction(u->u)}});
      cur = &u->inner;
    } else {
      break;
    }
  }
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) transforms.push_back(*it);

  json doc = {{"values", nullptr}, {"generator", nullptr}, {"transforms", transforms}};
  std::visit(overloaded{
                 [&](const Weibull& w) { doc["generator"] = {{"kind", "weibull"}, {"beta", decimal_or_fraction(w.beta)}}; },
                 [&](const Lognormal&) { doc["generator"] = {{"kind", "lognormal"}}; },
                 [&](const ExpPower& e) { doc["generator"] = {{"kind", "exp_power"}, {"r", decimal_or_fraction(e.r)}}; },
                 [&](const Explicit& e) {
                   json values = json::array();
                   for (const auto& v : e.values) values.push_back(decimal_or_fraction(v));
                   doc["values"] = values;
                 },
                 [](const auto&) {},
             },
             cur->node_->kind);
  return doc;
}

MomentProvider weibull_moments(const ExactRational& beta) {
  if (beta.sign() <= 0) throw Error(Errc::InvalidParameter, "weibull beta must be > 0, got " + beta.to_string());
  return make(Weibull{beta});
}

MomentProvider lognormal_moments() { return make(Lognormal{}); }

MomentProvider exp_power_moments(const ExactRational& r) {
  if (r.sign() <= 0) throw Error(Errc::InvalidParameter, "exp_power r must be > 0, got " + r.to_string());
  return make(ExpPower{r});
}

MomentProvider explicit_moments(std::vector<ExactRational> values) {
  if (values.empty()) throw Error(Errc::InvalidParameter, "explicit moment list is empty");
  if (values.front().sign() <= 0) throw Error(Errc::InvalidParameter, "m_0 must be positive");
  return make(Explicit{std::move(values)});
}

MomentProvider shift(const MomentProvider& inner, std::size_t p) {
  if (p == 0) return inner;
  return make(Shifted{inner, p});
}

MomentProvider heyde_transform(const MomentProvider& inner, const ExactRational& delta) {
  if (delta.sign() <= 0 || delta >= ExactRational(1)) {
    throw Error(Errc::InvalidParameter, "heyde delta must lie in (0,1), got " + delta.to_string());
  }
  const bool normalized = inner.is_exact() ? *inner.exact_moment(0) == ExactRational(1) : inner.moment(0, 256) == 1;
  if (!normalized) throw Error(Errc::NotNormalized, "heyde transform needs m_0 = 1 for " + inner.describe());
  return make(Heyde{inner, delta});
}

MomentProvider schmudgen_shift(const MomentProvider& inner, const ExactRational& u) {
  if (u.sign() <= 0) throw Error(Errc::InvalidParameter, "schmudgen u must be > 0, got " + u.to_string());
  return make(Schmudgen{inner, u});
}

std::vector<BigReal> moment_table(const MomentProvider& provider, std::size_t count, unsigned bits) {
  std::vector<BigReal> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(provider.moment(k, bits));
  return out;
}

nlohmann::json moment_file(const MomentProvider& provider, const std::string& name, std::size_t count, unsigned bits,
                           int digits) {
  using nlohmann::json;
  json values = json::array();
  for (std::size_t k = 0; k < count; ++k) {
    if (auto q = provider.exact_moment(k)) {
      values.push_back(decimal_or_fraction(*q));
    } else {
      values.push_back(provider.moment(k, bits).to_decimal(digits));
    }
  }
  const bool normalized = provider.is_exact() ? *provider.exact_moment(0) == ExactRational(1) : provider.moment(0, bits) == 1;
  return json{{"name", name},
              {"normalized", normalized},
              {"values", values},
              {"generator", nullptr},
              {"transforms", json::array()}};
}

}  // namespace momdiag
