#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toepspec/complex_matrix.hpp"
#include "toepspec/config.hpp"
#include "toepspec/multi_index.hpp"
#include "toepspec/symbol.hpp"

namespace toepspec {

enum class RangeSource { essential_range, essential_numerical_range };

/// Sampled range of a symbol. For essential_range, tag is the eigenvalue
/// index; for essential_numerical_range, the angle index.
struct RangeCloud {
  RangeSource source = RangeSource::essential_range;
  QuadratureGrid grid;
  CVector points;
  std::vector<std::size_t> sample;  // grid node (row-major) per point
  std::vector<int> tag;
  std::size_t skipped = 0;          // singular or failed nodes
};

/// Uniform, non-offset sampling grid with the configured default resolution
/// for a k-variate symbol.
QuadratureGrid default_range_grid(int k, const Tolerances& tol = default_tolerances());

/// Eigenvalues of sym at every grid node. Requires >= 64 nodes per dimension.
RangeCloud essential_range(const MatrixSymbol& sym, const QuadratureGrid& grid);

struct NumericalRange {
  RangeCloud cloud;              // extremal boundary points v* f(x) v
  std::vector<double> angles;    // theta_a = 2 pi a / angle_count
  std::vector<double> support;   // m(theta) = min_x lambda_min(H(e^{-i theta} f(x)))
};

/// Support-function sampling of the numerical range. angle_count >= 90. For
/// s = 1 the cloud is the essential range itself.
NumericalRange essential_numerical_range(const MatrixSymbol& sym, const QuadratureGrid& grid,
                                         int angle_count = default_tolerances().angle_count);

/// Whether z satisfies every sampled supporting half-plane, up to tol.
bool support_contains(const NumericalRange& enr, cplx z, double tol = 1e-9);

enum class Sectoriality { sectorial, weakly_sectorial, not_weakly_sectorial };
std::string to_string(Sectoriality s);

struct SectorReport {
  Sectoriality classification = Sectoriality::not_weakly_sectorial;
  double d = 0.0;             // max(0, max_theta m(theta))
  double max_support = 0.0;   // max_theta m(theta), possibly negative
  double best_angle = 0.0;    // theta*
  double witness_variance = 0.0;  // variance over x of the theta* support values
  bool zero_in_hull = false;  // max_support <= tol_d: 0 lies in the closed hull
  std::size_t skipped = 0;
};

/// sectorial when max m > tol_d; when |max m| <= tol_d, sectorial if the
/// support values at some maximizing angle vary over x (variance above
/// nondegeneracy_var), weakly sectorial otherwise; not weakly sectorial when
/// max m < -tol_d. The variance is a proxy for "not a.e. constant".
SectorReport sectoriality(const MatrixSymbol& sym, const QuadratureGrid& grid,
                          int angle_count = default_tolerances().angle_count,
                          const Tolerances& tol = default_tolerances());

/// Axis-aligned rectangle in the complex plane.
struct Rect {
  double re_min = -1, re_max = 1, im_min = -1, im_max = 1;
};

/// Bounding box of the points padded by `padding` times the larger side
/// (at least `min_half_width` on each side).
Rect bounding_rect(std::span<const cplx> points, double padding, double min_half_width = 1e-3);

/// Pixel grid over a rectangle; pixel (r, c) has center
/// (re_min + (c + 1/2) w, im_max - (r + 1/2) h). Row 0 is the top.
struct RegionMask {
  Rect rect;
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> mask;  // row-major, 1 = true

  double pixel_width() const { return (rect.re_max - rect.re_min) / static_cast<double>(width); }
  double pixel_height() const { return (rect.im_max - rect.im_min) / static_cast<double>(height); }
  cplx center(std::size_t row, std::size_t col) const;
  /// Pixel containing z, or nullopt outside the rectangle.
  std::optional<std::pair<std::size_t, std::size_t>> pixel_of(cplx z) const;
  bool at(std::size_t row, std::size_t col) const { return mask[row * width + col] != 0; }
  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * pixel_width() * pixel_height(); }
};

/// Mask of R(f, g) = {lambda : f - lambda g sectorial}. Throws
/// PreconditionViolated unless g is classified sectorial.
RegionMask localization_region(const MatrixSymbol& f, const MatrixSymbol& g, const Rect& rect,
                               std::size_t resolution, const QuadratureGrid& grid,
                               int angle_count = 180,
                               const Tolerances& tol = default_tolerances());

/// Area(K) for K the eps-dilated point set: rasterize, flood-fill the
/// unbounded component from the frame, return its complement. The rectangle
/// defaults to the bounding box padded by 2 eps + 10%.
RegionMask area_of_compact(std::span<const cplx> points, std::size_t resolution, double eps,
                           std::optional<Rect> rect = std::nullopt);

/// q_eps: number of eigenvalues farther than eps from every cloud point.
std::size_t outlier_count(std::span<const cplx> eigenvalues, std::span<const cplx> cloud, double eps);

struct MomentReport {
  int n_max = 0;
  std::vector<cplx> trace_mean;  // tr(A^N) / d_n, N = 0..n_max
  std::vector<cplx> integral;    // (2 pi)^-k int tr(h^N) / s
  std::vector<double> gap;       // |trace_mean - integral|; gap[0] == 0
};

/// A = T_n(g)^{-1} T_n(f) assembled densely (d_n <= 1024), h = g^{-1} f on
/// the quadrature grid. n_max <= 8.
MomentReport moment_test(const MatrixSymbol& f, const MatrixSymbol& g, const MultiIndex& n,
                         int n_max, const QuadratureGrid& quad_grid);

/// Sigma(F, A) = (1/d) sum_j F(lambda_j). Test-function ids:
///   one | monomial:N (N <= 8) | re_window:a:b:w | im_window:a:b:w
///   | bump:re:im:radius
/// Windows are smoothed indicators of [a, b] with transition width w; bumps
/// are C-infinity, 1 at the center and 0 beyond the radius.
cplx distribution_functional(std::span<const cplx> eigenvalues, const std::string& test_function);

// ---- export -------------------------------------------------------------------------

/// Lines "re,im,source" with source ER or ENR.
void write_cloud_csv(const RangeCloud& cloud, const std::filesystem::path& path);
/// Binary PGM (P5), 255 for true pixels, row 0 at the top (largest imaginary part).
void write_mask_pgm(const RegionMask& mask, const std::filesystem::path& path);

}  // namespace toepspec
