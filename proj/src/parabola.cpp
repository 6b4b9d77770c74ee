#include "momdiag/parabola.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace momdiag {

namespace {

constexpr int kSamples = 512;
constexpr int kCsvDigits = 20;

ParabolaCoeffs from_exact(unsigned n, const ParabolaCoeffs::Exact& e, unsigned bits) {
  ParabolaCoeffs c;
  c.n = n;
  c.A = e.A.to_real(bits);
  c.B = e.B.to_real(bits);
  c.C = e.C.to_real(bits);
  c.D0 = e.D0.to_real(bits);
  c.exact = e;
  return c;
}

ParabolaCoeffs at_bits(const MomentProvider& provider, unsigned n, unsigned bits) {
  const BigReal zero(bits), one(1, bits), minus_one(-1, bits);
  const BigReal d00 = det_with_leading(provider, n, zero, zero, bits);
  const BigReal d10 = det_with_leading(provider, n, one, zero, bits);
  const BigReal d01 = det_with_leading(provider, n, zero, one, bits);
  const BigReal d0m = det_with_leading(provider, n, zero, minus_one, bits);
  const BigReal two(2, bits);
  ParabolaCoeffs c;
  c.n = n;
  c.D0 = d00;
  c.A = d10 - d00;
  c.C = (d01 - d0m) / two;
  c.B = (d01 + d0m) / two - d00;
  return c;
}

double coeff_distance(const ParabolaCoeffs& a, const ParabolaCoeffs& b) {
  const BigReal scale = abs(b.A) + abs(b.B) + abs(b.C) + abs(b.D0);
  if (scale.is_zero()) return 0.0;
  const BigReal d = max(max(abs(a.A - b.A), abs(a.B - b.B)), max(abs(a.C - b.C), abs(a.D0 - b.D0)));
  return (d / scale).to_double();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Curve {
  unsigned n;
  std::vector<BigReal> ys;
  std::vector<BigReal> xs;
};

Curve sample(const ParabolaCoeffs& c) {
  Curve curve{c.n, {}, {}};
  const unsigned bits = c.A.bits();
  const BigReal span = BigReal(4, bits) * c.latus_rectum();
  const BigReal start = c.vertex_y() - span;
  const BigReal step = BigReal(2, bits) * span / BigReal(kSamples - 1, bits);
  for (int i = 0; i < kSamples; ++i) {
    BigReal y = start + step * BigReal(i, bits);
    curve.xs.push_back(c.x_boundary(y));
    curve.ys.push_back(std::move(y));
  }
  return curve;
}

}  // namespace

BigReal ParabolaCoeffs::evaluate(const BigReal& x, const BigReal& y) const { return A * x + B * y * y + C * y + D0; }

BigReal ParabolaCoeffs::x_boundary(const BigReal& y) const { return -(B * y * y + C * y + D0) / A; }

BigReal ParabolaCoeffs::vertex_y() const { return -C / (BigReal(2, B.bits()) * B); }

BigReal ParabolaCoeffs::latus_rectum() const { return abs(A / B); }

const char* to_string(Region r) {
  switch (r) {
    case Region::interior: return "interior";
    case Region::boundary: return "boundary";
    case Region::exterior: return "exterior";
  }
  return "?";
}

ParabolaCoeffs parabola_coeffs(const MomentProvider& provider, unsigned n, const PrecisionContext& ctx) {
  if (n == 0) throw Error(Errc::InvalidParameter, "parabola needs n >= 1");
  ParabolaCoeffs c;
  if (provider.is_exact()) {
    const ExactRational zero(0), one(1), minus_one(-1);
    const ExactRational d00 = det_with_leading_exact(provider, n, zero, zero);
    const ExactRational d10 = det_with_leading_exact(provider, n, one, zero);
    const ExactRational d01 = det_with_leading_exact(provider, n, zero, one);
    const ExactRational d0m = det_with_leading_exact(provider, n, zero, minus_one);
    const ExactRational half = ExactRational::parse("1/2");
    ParabolaCoeffs::Exact e{d10 - d00, (d01 + d0m) * half - d00, (d01 - d0m) * half, d00};
    if (e.A.sign() <= 0) throw Error(Errc::DegenerateSequence, "D_{n-1,2} is not positive at n=" + std::to_string(n));
    c = from_exact(n, e, ctx.start_bits);
  } else {
    c = stabilize_with([&](unsigned bits) { return at_bits(provider, n, bits); }, coeff_distance, ctx).value;
    const BigReal scale = abs(c.A) + abs(c.B) + abs(c.C) + abs(c.D0);
    if (c.A.sign() <= 0 || numerically_zero(c.A, scale)) {
      throw Error(Errc::DegenerateSequence, "D_{n-1,2} is numerically zero at n=" + std::to_string(n));
    }
  }
  return c;
}

ParabolaCoeffs::Exact parabola_coeffs_exact_from(const MomentProvider& provider, unsigned n,
                                                 const std::vector<std::pair<ExactRational, ExactRational>>& points) {
  if (points.size() != 4) throw Error(Errc::InvalidParameter, "need exactly four points");
  // Rows [x, y^2, y, 1 | D_n(x, y)], solved by exact Gauss-Jordan.
  std::vector<std::vector<ExactRational>> m;
  for (const auto& [x, y] : points) {
    m.push_back({x, y * y, y, ExactRational(1), det_with_leading_exact(provider, n, x, y)});
  }
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    while (piv < 4 && m[piv][col].sign() == 0) ++piv;
    if (piv == 4) throw Error(Errc::InvalidParameter, "points do not determine the parabola");
    std::swap(m[col], m[piv]);
    const ExactRational inv = ExactRational(1) / m[col][col];
    for (auto& v : m[col]) v = v * inv;
    for (std::size_t r = 0; r < 4; ++r) {
      if (r == col || m[r][col].sign() == 0) continue;
      const ExactRational f = m[r][col];
      for (std::size_t k = col; k < 5; ++k) m[r][k] = m[r][k] - f * m[col][k];
    }
  }
  return {m[0][4], m[1][4], m[2][4], m[3][4]};
}

Region classify_point(const ParabolaCoeffs& c, const BigReal& x, const BigReal& y, double tol) {
  const BigReal value = c.evaluate(x, y);
  const BigReal scale = abs(c.A * x) + abs(c.B) * y * y + abs(c.C * y) + abs(c.D0);
  if (abs(value) <= BigReal::from_double(tol, value.bits()) * scale) return Region::boundary;
  return value.sign() > 0 ? Region::interior : Region::exterior;
}

std::string geometry_label(const std::vector<ParabolaCoeffs>& regions, const BigReal& x, const BigReal& y) {
  if (regions.empty()) return "";
  // Horizontal distance from the point to each boundary, D_n(x, y) / A_n.
  const BigReal first = regions.front().evaluate(x, y) / regions.front().A;
  const BigReal last = regions.back().evaluate(x, y) / regions.back().A;
  if (last.sign() <= 0 || first.sign() <= 0) return "H-det geometry";
  const double shrink = (last / first).to_double();
  return shrink < 0.5 ? "H-det geometry" : "H-indet geometry";
}

void write_regions(const MomentProvider& provider, const std::vector<unsigned>& n_list,
                   const std::vector<MarkedPoint>& marked, std::ostream& os, PlotFormat format,
                   const PrecisionContext& ctx) {
  std::vector<ParabolaCoeffs> regions;
  std::vector<Curve> curves;
  for (unsigned n : n_list) {
    regions.push_back(parabola_coeffs(provider, n, ctx));
    curves.push_back(sample(regions.back()));
  }

  if (format == PlotFormat::csv) {
    if (!curves.empty()) os << "n,y,x_boundary\n";
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < c.ys.size(); ++i) {
        os << c.n << ',' << c.ys[i].to_decimal(kCsvDigits) << ',' << c.xs[i].to_decimal(kCsvDigits) << '\n';
      }
    }
  } else if (!curves.empty()) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    auto extend = [&](double x, double y) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    };
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < c.ys.size(); ++i) extend(c.xs[i].to_double(), c.ys[i].to_double());
    }
    for (const auto& m : marked) extend(m.x.to_double(), m.y.to_double());
    const double dx = std::max(xmax - xmin, 1e-12), dy = std::max(ymax - ymin, 1e-12);
    xmin -= 0.1 * dx;
    xmax += 0.1 * dx;
    ymin -= 0.1 * dy;
    ymax += 0.1 * dy;

    constexpr double W = 640, H = 480, legend_w = 200;
    auto px = [&](double x) { return (x - xmin) / (xmax - xmin) * W; };
    auto py = [&](double y) { return H - (y - ymin) / (ymax - ymin) * H; };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(W + legend_w) << "\" height=\""
       << fmt(H) << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(W) << "\" height=\"" << fmt(H)
       << "\" fill=\"white\" stroke=\"#999\"/>\n";
    if (ymin < 0 && ymax > 0) {
      os << "<line x1=\"0\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(W) << "\" y2=\"" << fmt(py(0))
         << "\" stroke=\"#ccc\"/>\n";
    }
    if (xmin < 0 && xmax > 0) {
      os << "<line x1=\"" << fmt(px(0)) << "\" y1=\"0\" x2=\"" << fmt(px(0)) << "\" y2=\"" << fmt(H)
         << "\" stroke=\"#ccc\"/>\n";
    }
    for (std::size_t k = 0; k < curves.size(); ++k) {
      const auto& c = curves[k];
      os << "<path id=\"region-n" << c.n << "\" fill=\"none\" stroke=\"" << palette[k % 7] << "\" stroke-width=\"1.5\" d=\"";
      for (std::size_t i = 0; i < c.ys.size(); ++i) {
        os << (i == 0 ? "M" : " L") << fmt(px(c.xs[i].to_double())) << ',' << fmt(py(c.ys[i].to_double()));
      }
      os << "\"/>\n";
    }
    for (const auto& m : marked) {
      const double x = px(m.x.to_double()), y = py(m.y.to_double());
      os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"4\" fill=\"black\"/>\n";
      os << "<text x=\"" << fmt(x + 6) << "\" y=\"" << fmt(y - 6) << "\" font-size=\"12\">" << xml_escape(m.label)
         << "</text>\n";
    }

    double ly = 20;
    auto legend_line = [&](const std::string& text) {
      os << "<text x=\"" << fmt(W + 10) << "\" y=\"" << fmt(ly) << "\" font-size=\"12\">" << xml_escape(text)
         << "</text>\n";
      ly += 18;
    };
    for (std::size_t k = 0; k < curves.size(); ++k) {
      os << "<line x1=\"" << fmt(W + 10) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(W + 30) << "\" y2=\""
         << fmt(ly - 4) << "\" stroke=\"" << palette[k % 7] << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << fmt(W + 36) << "\" y=\"" << fmt(ly) << "\" font-size=\"12\">n = " << curves[k].n
         << "</text>\n";
      ly += 18;
    }
    if (!marked.empty()) legend_line(geometry_label(regions, marked.front().x, marked.front().y));
    if (regions.size() >= 2) {
      const double shrink = (regions.back().latus_rectum() / regions.front().latus_rectum()).to_double();
      if (shrink < 0.5) legend_line("latus recta shrinking: limit may be a ray");
    }
    os << "</svg>\n";
  }
}

void emit_regions(const MomentProvider& provider, const std::vector<unsigned>& n_list,
                  const std::vector<MarkedPoint>& marked, const std::filesystem::path& out, PlotFormat format,
                  const PrecisionContext& ctx) {
  // Compute first so a numerical failure leaves no partial file behind.
  std::ostringstream buf;
  write_regions(provider, n_list, marked, buf, format, ctx);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error(Errc::IoError, "cannot open " + out.string() + " for writing");
  os << buf.str();
  if (!os) throw Error(Errc::IoError, "write failed for " + out.string());
}

}  // namespace momdiag
