#include <doctest.h>

#include <cmath>

#include "momdiag/moments.hpp"
#include "oracles.hpp"

using namespace momdiag;

namespace {

// Unnormalized moment of the density e^(-x^beta) on (0, inf), integrated in
// s = log x so the integrand decays on both sides.
long double stretched_moment(long double beta, int k) {
  auto f = [=](long double s) { return std::exp((k + 1) * s - std::exp(beta * s)); };
  return oracle::simpson(f, -80.0L, 12.0L / beta, 60000);
}

}  // namespace

TEST_CASE("Weibull moments match direct quadrature") {
  const auto w = weibull_moments(ExactRational::parse("0.45"));
  CHECK_FALSE(w.is_exact());
  for (int k = 0; k <= 6; ++k) {
    const double q = static_cast<double>(stretched_moment(0.45L, k) / stretched_moment(0.45L, 0));
    CHECK(w.moment(k, 256).to_double() == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("Weibull with 1/beta integral is exact") {
  const auto w = weibull_moments(ExactRational::parse("0.5"));
  REQUIRE(w.is_exact());
  // m_k = Gamma(2k + 2) / Gamma(2) = (2k + 1)!
  CHECK(w.exact_moment(3)->to_string() == "5040");
  CHECK(w.exact_moment(1)->to_string() == "6");
  CHECK(w.exact_moment(0)->to_string() == "1");
}

TEST_CASE("exp_power(3) is (3k)!") {
  const auto z = exp_power_moments(3);
  REQUIRE(z.is_exact());
  CHECK(z.exact_moment(1)->to_string() == "6");
  CHECK(z.exact_moment(2)->to_string() == "720");
  CHECK(z.exact_moment(3)->to_string() == "362880");
  CHECK(z.moment(4, 128) == BigReal::from_string("479001600", 128));
}

TEST_CASE("exp_power with fractional r uses Gamma(rk + 1)") {
  const auto y = exp_power_moments(ExactRational::parse("1.5"));
  CHECK_FALSE(y.is_exact());
  CHECK(y.moment(2, 128).to_double() == doctest::Approx(6.0));  // Gamma(4)
  CHECK(y.moment(1, 128).to_double() == doctest::Approx(std::tgamma(2.5)));
}

TEST_CASE("lognormal moments are e^(k^2/2)") {
  const auto ln = lognormal_moments();
  for (int k = 0; k <= 5; ++k) CHECK(ln.moment(k, 128).to_double() == doctest::Approx(std::exp(k * k / 2.0)));
  const BigReal m24 = ln.moment(48, 256);
  CHECK(relative_difference(m24, exp(BigReal(1152, 256))).to_double() < 1e-60);
}

TEST_CASE("generators reject bad parameters") {
  CHECK_THROWS_AS(weibull_moments(0), Error);
  CHECK_THROWS_AS(exp_power_moments(ExactRational::parse("-1")), Error);
  CHECK_THROWS_AS(heyde_transform(lognormal_moments(), 1), Error);
  CHECK_THROWS_AS(heyde_transform(lognormal_moments(), 0), Error);
  CHECK_THROWS_AS(schmudgen_shift(lognormal_moments(), 0), Error);
}

TEST_CASE("shift, Heyde and binomial transforms") {
  const auto z = exp_power_moments(1);
  const auto s = shift(z, 2);
  CHECK(s.exact_moment(0)->to_string() == "2");
  CHECK(s.exact_moment(3)->to_string() == "120");

  const auto delta = ExactRational::parse("0.25");
  const auto h = heyde_transform(z, delta);
  CHECK(h.exact_moment(0)->to_string() == "1");
  for (int k = 1; k <= 6; ++k) CHECK(*h.exact_moment(k) == *z.exact_moment(k) / (ExactRational(1) + delta));

  // Binomial shift: moments of X - u, m_k = sum C(k,j) (-u)^(k-j) m_j.
  CHECK(schmudgen_shift(z, 1).exact_moment(2)->to_string() == "1");  // 2 - 2 + 1
  const auto u = ExactRational::parse("1/2");
  const auto b = schmudgen_shift(z, u);
  CHECK(b.exact_moment(0)->to_string() == "1");
  CHECK(b.exact_moment(1)->to_string() == "1/2");
  CHECK(b.exact_moment(2)->to_string() == "5/4");  // 2 - 2*(1/2)*1 + 1/4

  const auto bl = schmudgen_shift(lognormal_moments(), u);
  const double e = std::exp(0.5);
  CHECK(bl.moment(1, 256).to_double() == doctest::Approx(e - 0.5));
  CHECK(bl.moment(2, 256).to_double() == doctest::Approx(std::exp(2.0) - e + 0.25));
}

TEST_CASE("explicit providers are finite") {
  const auto p = explicit_moments({1, 2, 5});
  CHECK(p.domain_size() == 3u);
  CHECK(shift(p, 1).domain_size() == 2u);
  CHECK_THROWS_AS(p.moment(3, 64), Error);
  try {
    p.moment(5, 64);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IndexOutOfRange);
  }
}

TEST_CASE("moment documents round-trip") {
  const auto z = heyde_transform(exp_power_moments(3), ExactRational::parse("0.5"));
  const auto doc = moment_file(z, "t", 9, 128);
  CHECK(doc["values"][1] == "4");
  const auto back = provider_from_json(doc);
  REQUIRE(back.is_exact());
  for (int k = 0; k < 9; ++k) CHECK(*back.exact_moment(k) == *z.exact_moment(k));

  const auto gen_doc = nlohmann::json::parse(
      R"({"name":"w","normalized":false,"values":null,"generator":{"kind":"weibull","beta":"0.45"},"transforms":[{"op":"shift","p":"1"}]})");
  const auto w = provider_from_json(gen_doc);
  CHECK(relative_difference(w.moment(0, 256), weibull_moments(ExactRational::parse("0.45")).moment(1, 256)).to_double() < 1e-60);
}

TEST_CASE("moment document errors") {
  auto code_of = [](const std::string& text) {
    try {
      parse_moment_document(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  CHECK(code_of("{ not json") == Errc::ParseError);
  CHECK(code_of(R"({"name":"x","values":["1","abc"]})") == Errc::ParseError);
  CHECK(code_of(R"({"name":"x"})") == Errc::SchemaError);
  CHECK(code_of(R"({"name":"x","values":["1"],"generator":{"kind":"lognormal"}})") == Errc::SchemaError);
  CHECK(code_of(R"({"name":"x","generator":{"kind":"gaussian"}})") == Errc::SchemaError);
  CHECK(code_of(R"({"name":"x","normalized":true,"values":["2","1"]})") == Errc::SchemaError);
  CHECK(code_of(R"({"name":"x","values":["2","1"],"transforms":[{"op":"heyde","delta":"0.5"}]})") == Errc::NotNormalized);
  try {
    load_moments("/nonexistent/dir/m.json");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IoError);
  }
}

TEST_CASE("Lyapunov inequality for normalized generators") {
  for (const auto& g : {weibull_moments(ExactRational::parse("0.45")), exp_power_moments(1), exp_power_moments(3),
                        exp_power_moments(ExactRational::parse("2.1")), lognormal_moments(),
                        heyde_transform(exp_power_moments(3), ExactRational::parse("0.3"))}) {
    for (unsigned p = 1; p <= 8; ++p) {
      // m_p <= m_{p+1}^(p/(p+1)), compared in logarithms.
      const BigReal lhs = log(g.moment(p, 256)) * BigReal(p + 1, 256);
      const BigReal rhs = log(g.moment(p + 1, 256)) * BigReal(p, 256);
      CAPTURE(g.describe());
      CHECK(lhs <= rhs);
    }
  }
}
