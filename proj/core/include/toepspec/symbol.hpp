#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toepspec/complex_matrix.hpp"
#include "toepspec/config.hpp"
#include "toepspec/multi_index.hpp"

namespace toepspec {

enum class SymbolKind { trig_polynomial, general };

/// The set {x : x[variable] == value}; for k = 1 this is a point.
struct SingularHyperplane {
  int variable = 0;
  double value = 0.0;
  friend bool operator==(const SingularHyperplane&, const SingularHyperplane&) = default;
};

using Evaluator = std::function<ComplexMatrix(std::span<const double>)>;
using CoefficientTable = std::map<MultiIndex, ComplexMatrix>;

/// A measurable map x in (-pi,pi)^k -> s x s complex matrices. Immutable;
/// copies share state.
///
/// Trigonometric-polynomial symbols carry their exact coefficient table and
/// evaluate as sum_j c_j exp(i <j, x>). General symbols carry only an
/// evaluator and an optional list of singular hyperplanes.
class MatrixSymbol {
public:
  /// Builds a trig polynomial; zero coefficients are dropped. An empty table
  /// is the zero symbol.
  static MatrixSymbol trig(int k, int s, CoefficientTable coefficients, std::string name = {});
  static MatrixSymbol general(int k, int s, Evaluator evaluator, std::string name = {},
                              std::vector<SingularHyperplane> singular = {});
  static MatrixSymbol constant(int k, const ComplexMatrix& value, std::string name = {});
  static MatrixSymbol identity(int k, int s);

  int dims() const noexcept;
  int block_size() const noexcept;
  SymbolKind kind() const noexcept;
  bool is_trig() const noexcept { return kind() == SymbolKind::trig_polynomial; }
  const std::string& name() const noexcept;
  MatrixSymbol renamed(std::string name) const;

  /// Componentwise degree. Throws InvalidArgument for general symbols, whose
  /// degree is undefined.
  const MultiIndex& degree() const;
  /// Exact coefficient table. Throws InvalidArgument for general symbols.
  const CoefficientTable& coefficients() const;

  const std::vector<SingularHyperplane>& singular_set() const noexcept;
  bool is_singular_at(std::span<const double> x,
                      double tol = default_tolerances().singular_point) const;

  /// Throws DomainError at a declared singular point.
  ComplexMatrix evaluate(std::span<const double> x) const;
  ComplexMatrix evaluate(std::initializer_list<double> x) const {
    return evaluate(std::span<const double>(x.begin(), x.size()));
  }
  /// Returns nullopt at a declared singular point instead of throwing.
  std::optional<ComplexMatrix> try_evaluate(std::span<const double> x) const;

private:
  struct Impl;
  explicit MatrixSymbol(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// ---- algebra ---------------------------------------------------------------

MatrixSymbol symbol_add(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol symbol_sub(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol symbol_scale(const MatrixSymbol& a, cplx alpha);
MatrixSymbol symbol_mul(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol symbol_transpose(const MatrixSymbol& a);
MatrixSymbol symbol_conjugate(const MatrixSymbol& a);
/// Pointwise inverse (always general kind). Evaluation throws SingularSymbol
/// carrying x where a(x) is numerically singular.
MatrixSymbol symbol_inverse(const MatrixSymbol& a);
/// x -> Q(x) A(x) Q(x)^T.
MatrixSymbol similarity(const MatrixSymbol& q, const MatrixSymbol& a);

// ---- Fourier coefficients --------------------------------------------------

/// Uniform quadrature grid x_t = -pi + 2 pi (t + offset) / N per dimension,
/// with offset 0 or 1/2.
struct QuadratureGrid {
  std::vector<int> sizes;
  bool half_step = false;

  /// Node t of dimension d.
  double node(int d, int t) const;
  std::size_t total() const;
};

/// Grid used for the coefficients of a symbol when building T_n: at least the
/// per-dimension default and at least 4 n_i; half-step for general symbols.
QuadratureGrid default_coefficient_grid(const MatrixSymbol& sym, const MultiIndex& n,
                                        const Tolerances& tol = default_tolerances());

/// c_j = (2 pi)^-k integral f(x) exp(-i <j,x>) dx by the DFT on `grid`.
/// Trig-polynomial symbols read the stored table. Requires grid_i >= 2|j_i|+2.
ComplexMatrix fourier_coefficient(const MatrixSymbol& sym, const MultiIndex& j,
                                  const QuadratureGrid& grid);

/// Coefficients c_j for -radius <= j <= radius in lexicographic order.
struct FourierTable {
  MultiIndex radius;
  QuadratureGrid grid;
  double aliasing_estimate = 0.0;  // max |c_j| over the outer half of the resolved band
  int s = 1;
  std::vector<ComplexMatrix> coefficients;

  const ComplexMatrix& at(const MultiIndex& j) const;
};

FourierTable fourier_table(const MatrixSymbol& sym, const MultiIndex& radius,
                           const QuadratureGrid& grid);

/// Samples sym on every node of grid (row-major, last dimension fastest);
/// singular nodes are reported as nullopt.
std::vector<std::optional<ComplexMatrix>> sample_on_grid(const MatrixSymbol& sym,
                                                         const QuadratureGrid& grid);

}  // namespace toepspec
