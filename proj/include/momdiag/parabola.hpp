#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "momdiag/hankel.hpp"

namespace momdiag {

/// D_n(x, y) = A x + B y^2 + C y + D0 with (x, y) in place of (m_0, m_1).
struct ParabolaCoeffs {
  struct Exact {
    ExactRational A, B, C, D0;
  };

  unsigned n = 0;
  BigReal A, B, C, D0;
  std::optional<Exact> exact;

  BigReal evaluate(const BigReal& x, const BigReal& y) const;
  /// The x on the boundary at height y, i.e. -(B y^2 + C y + D0) / A.
  BigReal x_boundary(const BigReal& y) const;
  BigReal vertex_y() const;
  /// |A / B|.
  BigReal latus_rectum() const;
};

/// Recovers the coefficients from D_n at (0,0), (1,0), (0,1), (0,-1);
/// exactly for rational providers. Throws DegenerateSequence if A is not
/// positive and InvalidParameter for n = 0.
ParabolaCoeffs parabola_coeffs(const MomentProvider& provider, unsigned n, const PrecisionContext& ctx = {});

/// Same recovery from any four points with distinct y among three of them,
/// exact path only; used to cross-check the canonical fit.
ParabolaCoeffs::Exact parabola_coeffs_exact_from(const MomentProvider& provider, unsigned n,
                                                 const std::vector<std::pair<ExactRational, ExactRational>>& points);

enum class Region { interior, boundary, exterior };
const char* to_string(Region r);

Region classify_point(const ParabolaCoeffs& coeffs, const BigReal& x, const BigReal& y, double tol);

enum class PlotFormat { svg, csv };

struct MarkedPoint {
  BigReal x;
  BigReal y;
  std::string label;
};

/// Writes the boundaries of {D_n >= 0} for each n in n_list, sampled at
/// 512 heights spanning the vertex +- 4 latus recta, plus marked points.
/// Throws IoError.
void emit_regions(const MomentProvider& provider, const std::vector<unsigned>& n_list,
                  const std::vector<MarkedPoint>& marked, const std::filesystem::path& out, PlotFormat format,
                  const PrecisionContext& ctx = {});

/// emit_regions onto a stream.
void write_regions(const MomentProvider& provider, const std::vector<unsigned>& n_list,
                   const std::vector<MarkedPoint>& marked, std::ostream& os, PlotFormat format,
                   const PrecisionContext& ctx = {});

/// "H-indet geometry" when the marked point keeps a margin inside the
/// regions, "H-det geometry" when it approaches the boundary as n grows.
std::string geometry_label(const std::vector<ParabolaCoeffs>& regions, const BigReal& x, const BigReal& y);

}  // namespace momdiag
