#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "momdiag/parabola.hpp"
#include "oracles.hpp"

using namespace momdiag;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("n = 1 parabola is x m2 - y^2") {
  const auto z = exp_power_moments(3);
  const auto c = parabola_coeffs(z, 1);
  REQUIRE(c.exact);
  CHECK(c.exact->A == *z.exact_moment(2));
  CHECK(c.exact->B == ExactRational(-1));
  CHECK(c.exact->C.sign() == 0);
  CHECK(c.exact->D0.sign() == 0);
  CHECK(c.latus_rectum() == BigReal(720, 256));
}

TEST_CASE("coefficients reproduce D_n exactly at random points") {
  const auto e = exp_power_moments(1);
  std::mt19937 rng(12345);
  std::uniform_int_distribution<long> num(-50, 50), den(1, 9);
  for (unsigned n = 1; n <= 4; ++n) {
    const auto c = parabola_coeffs(e, n);
    REQUIRE(c.exact);
    for (int i = 0; i < 10; ++i) {
      const ExactRational x = ExactRational(num(rng)) / ExactRational(den(rng));
      const ExactRational y = ExactRational(num(rng)) / ExactRational(den(rng));
      const ExactRational fitted = c.exact->A * x + c.exact->B * y * y + c.exact->C * y + c.exact->D0;
      CHECK(fitted == det_with_leading_exact(e, n, x, y));
    }
  }
}

TEST_CASE("refitting from other points gives the same coefficients") {
  const auto z = exp_power_moments(3);
  for (unsigned n = 1; n <= 4; ++n) {
    const auto c = parabola_coeffs(z, n);
    const auto alt = parabola_coeffs_exact_from(
        z, n, {{ExactRational(2), ExactRational(3)}, {ExactRational(-1), ExactRational(5)},
               {ExactRational(7), ExactRational(-2)}, {ExactRational::parse("1/2"), ExactRational(0)}});
    CHECK(alt.A == c.exact->A);
    CHECK(alt.B == c.exact->B);
    CHECK(alt.C == c.exact->C);
    CHECK(alt.D0 == c.exact->D0);
  }
}

TEST_CASE("no x^2 or xy terms: D_n is affine in x and quadratic in y") {
  const auto e = exp_power_moments(1);
  const unsigned n = 3;
  auto d = [&](long x, long y) { return det_with_leading_exact(e, n, ExactRational(x), ExactRational(y)); };
  // Second difference in x and the mixed difference vanish; the third difference in y vanishes.
  CHECK((d(2, 1) - d(1, 1) * ExactRational(2) + d(0, 1)).sign() == 0);
  CHECK((d(1, 1) - d(1, 0) - d(0, 1) + d(0, 0)).sign() == 0);
  CHECK((d(0, 3) - d(0, 2) * ExactRational(3) + d(0, 1) * ExactRational(3) - d(0, 0)).sign() == 0);
}

TEST_CASE("latus rectum identity |A/B| = D_{n-1,2}/D_{n-2,4}") {
  for (const auto& p : {exp_power_moments(1), lognormal_moments(), weibull_moments(ExactRational::parse("0.45"))}) {
    for (unsigned n = 1; n <= 6; ++n) {
      const auto c = parabola_coeffs(p, n);
      CHECK(c.A.sign() > 0);
      CHECK(c.B.sign() < 0);
      CHECK(oracle::rel(c.latus_rectum(), latus_rectum(p, n)) <= 1e-12);
    }
  }
}

TEST_CASE("classification") {
  const auto e = exp_power_moments(1);
  const auto c = parabola_coeffs(e, 1);
  CHECK(classify_point(c, BigReal(1, 256), BigReal(1, 256), 1e-30) == Region::interior);
  CHECK(classify_point(c, BigReal(0, 256), BigReal(1, 256), 1e-30) == Region::exterior);
  const BigReal y = BigReal::from_double(0.7, 256);
  CHECK(classify_point(c, y * y / BigReal(2, 256), y, 1e-30) == Region::boundary);
}

TEST_CASE("moment point is interior iff the Hankel ratio is positive") {
  for (const auto& p : {exp_power_moments(1), exp_power_moments(3), schmudgen_shift(exp_power_moments(1), 1)}) {
    for (unsigned n = 1; n <= 5; ++n) {
      const auto c = parabola_coeffs(p, n);
      const bool interior = classify_point(c, p.moment(0, 256), p.moment(1, 256), 1e-40) == Region::interior;
      CHECK(interior == (ratio_exact(p, 0, n)->sign() > 0));
      CHECK(det_with_leading_exact(p, n, *p.exact_moment(0), *p.exact_moment(1)).sign() > 0);
    }
  }
}

TEST_CASE("regions are nested") {
  for (const auto& p : {weibull_moments(ExactRational::parse("0.45")), exp_power_moments(1), lognormal_moments()}) {
    for (unsigned n = 1; n <= 5; ++n) {
      const auto outer = parabola_coeffs(p, n);
      const auto inner = parabola_coeffs(p, n + 1);
      const BigReal span = BigReal(4, 256) * inner.latus_rectum();
      for (int i = 0; i < 200; ++i) {
        const BigReal y = inner.vertex_y() - span + span * BigReal(2 * i, 256) / BigReal(199, 256);
        const Region r = classify_point(outer, inner.x_boundary(y), y, 1e-30);
        CHECK(r != Region::exterior);
      }
    }
  }
}

TEST_CASE("degenerate parabola") {
  CHECK_THROWS_AS(parabola_coeffs(exp_power_moments(1), 0), Error);
  std::vector<ExactRational> m;
  for (int k = 0; k <= 6; ++k) m.push_back(ExactRational(1));  // point mass at 1
  try {
    parabola_coeffs(explicit_moments(m), 2);
    FAIL("expected DegenerateSequence");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateSequence);
  }
}

TEST_CASE("region emission") {
  const auto dir = std::filesystem::temp_directory_path() / "momdiag_parabola_test";
  std::filesystem::create_directories(dir);
  const auto w = weibull_moments(ExactRational::parse("0.45"));
  const std::vector<MarkedPoint> marked{{w.moment(0, 256), w.moment(1, 256), "(m0, m1)"}};

  emit_regions(w, {2, 4, 8}, marked, dir / "w.csv", PlotFormat::csv);
  const std::string csv = slurp(dir / "w.csv");
  CHECK(csv.rfind("n,y,x_boundary\n", 0) == 0);
  CHECK(count_of(csv, "\n") == 3 * 512 + 1);
  CHECK(count_of(csv, "\n8,") == 512);

  emit_regions(w, {2, 4, 8}, marked, dir / "w.svg", PlotFormat::svg);
  const std::string svg = slurp(dir / "w.svg");
  CHECK(count_of(svg, "<path") == 3);
  CHECK(count_of(svg, "<circle") == 1);
  CHECK(svg.find("H-indet geometry") != std::string::npos);

  const auto e = exp_power_moments(1);
  emit_regions(e, {2, 4, 8}, {{BigReal(1, 256), BigReal(1, 256), "(m0, m1)"}}, dir / "e.svg", PlotFormat::svg);
  CHECK(slurp(dir / "e.svg").find("H-det geometry") != std::string::npos);

  emit_regions(w, {}, marked, dir / "empty.svg", PlotFormat::svg);
  CHECK(std::filesystem::file_size(dir / "empty.svg") == 0);

  try {
    emit_regions(w, {2}, marked, dir / "missing" / "x.svg", PlotFormat::svg);
    FAIL("expected IoError");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::IoError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("moment point stays inside for Weibull and approaches the boundary for Exp(1)") {
  const auto w = weibull_moments(ExactRational::parse("0.45"));
  const auto e = exp_power_moments(1);
  std::vector<ParabolaCoeffs> rw, re;
  for (unsigned n : {2u, 4u, 8u}) {
    rw.push_back(parabola_coeffs(w, n));
    re.push_back(parabola_coeffs(e, n));
  }
  CHECK(geometry_label(rw, w.moment(0, 256), w.moment(1, 256)) == "H-indet geometry");
  CHECK(geometry_label(re, BigReal(1, 256), BigReal(1, 256)) == "H-det geometry");
}
