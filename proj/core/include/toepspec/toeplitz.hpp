#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "toepspec/complex_matrix.hpp"
#include "toepspec/linalg.hpp"
#include "toepspec/multi_index.hpp"
#include "toepspec/symbol.hpp"

namespace toepspec {

/// Block coefficient source: j -> s x s matrix, for -(n-e) <= j <= n-e.
using CoefficientFn = std::function<ComplexMatrix(const MultiIndex&)>;

/// T_n(f): block (i, j) is f_{i-j}, blocks ordered lexicographically over
/// e..n with the last index fastest. Vectors are block-major: entry p of
/// block i sits at s * linearize(i) + p.
///
/// Holds a dense copy (when assembled) and/or the spectra of the 2n-periodic
/// circulant embedding of every block entry (when embedded). Immutable.
class ToeplitzOperator {
public:
  /// Dense assembly; throws ResourceLimit above max_dense_order().
  static ToeplitzOperator dense(const MatrixSymbol& f, const MultiIndex& n,
                                std::optional<QuadratureGrid> grid = std::nullopt);
  /// Matrix-free operator with FFT matvec; no order cap.
  static ToeplitzOperator embedded(const MatrixSymbol& f, const MultiIndex& n,
                                   std::optional<QuadratureGrid> grid = std::nullopt);
  /// Dense and embedded.
  static ToeplitzOperator both(const MatrixSymbol& f, const MultiIndex& n,
                               std::optional<QuadratureGrid> grid = std::nullopt);
  /// Dense assembly from an explicit coefficient source.
  static ToeplitzOperator from_coefficients(int s, const MultiIndex& n, const CoefficientFn& coeff);

  const MultiIndex& size() const noexcept { return n_; }
  int block_size() const noexcept { return s_; }
  std::size_t order() const noexcept { return order_; }
  bool assembled() const noexcept { return dense_.has_value(); }
  bool is_embedded() const noexcept { return static_cast<bool>(embed_); }
  /// Largest |f_j| past the resolved band of the quadrature; 0 for trig symbols.
  double aliasing_estimate() const noexcept { return alias_; }

  /// Throws PreconditionViolated when not assembled.
  const ComplexMatrix& matrix() const;

  /// Embedded path when available, dense otherwise.
  CVector apply(std::span<const cplx> v) const;
  CVector apply_dense(std::span<const cplx> v) const;
  CVector apply_embedded(std::span<const cplx> v) const;

private:
  struct Embedding;
  ToeplitzOperator() = default;
  void check_length(std::size_t len) const;

  MultiIndex n_;
  int s_ = 1;
  std::size_t order_ = 0;
  double alias_ = 0.0;
  std::optional<ComplexMatrix> dense_;
  std::shared_ptr<const Embedding> embed_;
};

/// Convenience: dense T_n(f).
ComplexMatrix toeplitz_matrix(const MatrixSymbol& f, const MultiIndex& n);

/// Factorization of T_n(g) for preconditioner solves: banded LU when k = 1
/// and g is a trig polynomial (scalar bandwidth s(r+1)-1 on each side),
/// dense LU otherwise.
class PrecondFactor {
public:
  std::size_t order() const noexcept { return order_; }
  bool banded() const noexcept { return banded_.has_value(); }
  /// (lower, upper) scalar bandwidth of the banded path.
  std::pair<std::size_t, std::size_t> bandwidth() const noexcept { return band_; }
  CVector apply(std::span<const cplx> b) const;

private:
  friend PrecondFactor factor_preconditioner(const MatrixSymbol& g, const MultiIndex& n);
  std::size_t order_ = 0;
  std::pair<std::size_t, std::size_t> band_{0, 0};
  std::optional<BandedLuFactor> banded_;
  std::optional<LuFactor> dense_;
};

/// Throws SingularMatrix ("T_n(g) is numerically singular") when the
/// factorization meets a zero pivot.
PrecondFactor factor_preconditioner(const MatrixSymbol& g, const MultiIndex& n);

/// Dense T_n(g)^{-1} T_n(f), one preconditioner solve per column. Obeys the
/// dense-order cap.
ComplexMatrix preconditioned_matrix(const MatrixSymbol& f, const MatrixSymbol& g, const MultiIndex& n);

struct CommutatorGap {
  std::size_t rank = 0;
  double trace_norm = 0.0;
  std::size_t rank_bound = 0;
  bool within_bound = true;
};

/// T_n(g) T_n(f) - T_n(g f) for a trig-polynomial g of degree r. Requires
/// n_i >= 2 r_i + 1. General f use quadrature coefficients of f and the
/// exact table of g for the product symbol.
CommutatorGap commutator_gap(const MatrixSymbol& f, const MatrixSymbol& g, const MultiIndex& n);

/// Grid estimates of ||f||_{L^1} = int ||f(x)||_1 dx (trace norm inside) and
/// ||f||_{L^inf} = max ||f(x)||. Singular nodes are skipped.
struct SymbolNorms {
  double l1 = 0.0;
  double linf = 0.0;
};
SymbolNorms symbol_norms(const MatrixSymbol& f, const QuadratureGrid& grid);

// ---- export -----------------------------------------------------------------------

/// One line per row: re,im,re,im,... with 17 significant digits.
void write_matrix_csv(const ComplexMatrix& a, const std::filesystem::path& path);

/// Binary dump: "TOEPSPC1", uint32 k, uint32 s, uint32 n[k], then order^2
/// (re, im) float64 pairs row-major. All little-endian.
void write_matrix_binary(const ComplexMatrix& a, int s, const MultiIndex& n,
                         const std::filesystem::path& path);

struct MatrixDump {
  int s = 1;
  MultiIndex n;
  ComplexMatrix matrix;
};
MatrixDump read_matrix_binary(const std::filesystem::path& path);

}  // namespace toepspec
