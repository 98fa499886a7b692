#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "toepspec/complex_matrix.hpp"
#include "toepspec/config.hpp"

namespace toepspec {

struct EigenResult {
  CVector eigenvalues;                  // length = order
  std::optional<ComplexMatrix> vectors; // column j pairs with eigenvalues[j]
  std::vector<double> residuals;        // ||Av - lambda v|| per pair, empty without vectors
  bool converged = true;                // false when returned as partial result
};

struct SingularResult {
  std::vector<double> values;  // non-increasing, non-negative
};

/// Eigenvalues (and optionally right eigenvectors) of a general square complex
/// matrix: Householder reduction to Hessenberg form followed by single-shift
/// complex QR with deflation. Throws NumericFailure if some eigenvalue needs
/// more than tol.max_qr_sweeps iterations; call eig_dense_partial to get the
/// partial result instead.
EigenResult eig_dense(const ComplexMatrix& a, bool want_vectors = false,
                      const Tolerances& tol = default_tolerances());

/// Non-throwing variant: on non-convergence, returns converged=false with the
/// eigenvalues deflated so far and the remaining diagonal of the Schur form.
EigenResult eig_dense_partial(const ComplexMatrix& a, bool want_vectors = false,
                              const Tolerances& tol = default_tolerances());

/// Singular values via Householder bidiagonalization and QR iteration on the
/// associated Golub-Kahan tridiagonal. Absolute accuracy ~ eps * sigma_max.
SingularResult svd_values(const ComplexMatrix& a);

enum class SchattenP { one, two, infinity };
double schatten_norm(const ComplexMatrix& a, SchattenP p);

/// Count of singular values strictly above threshold_rel * sigma_max.
std::size_t numerical_rank(const ComplexMatrix& a,
                           double threshold_rel = default_tolerances().rank_rel);

/// Eigen decomposition of a small Hermitian matrix (cyclic Jacobi). Values
/// ascending; vectors as columns.
struct HermitianEigen {
  std::vector<double> values;
  ComplexMatrix vectors;
};
HermitianEigen hermitian_eig(const ComplexMatrix& h);

/// Smallest eigenvalue of the Hermitian part (M + M^*)/2 of a square matrix.
double min_hermitian_part_eigenvalue(const ComplexMatrix& m);

/// Dense LU with partial pivoting. Throws SingularMatrix on an exactly zero pivot.
class LuFactor {
public:
  explicit LuFactor(ComplexMatrix a);
  std::size_t order() const noexcept { return lu_.rows(); }
  CVector solve(std::span<const cplx> b) const;
  /// Solves A X = B column by column.
  ComplexMatrix solve(const ComplexMatrix& b) const;

private:
  ComplexMatrix lu_;
  std::vector<std::size_t> piv_;
};

/// Banded LU with partial pivoting. Only entries with -lower <= j - i <= upper
/// are read from the input; pivoting widens the upper band to upper + lower.
class BandedLuFactor {
public:
  BandedLuFactor(const ComplexMatrix& a, std::size_t lower, std::size_t upper);
  std::size_t order() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }
  CVector solve(std::span<const cplx> b) const;

private:
  cplx& at(std::size_t i, std::size_t j) { return band_[i * width_ + (j + kl_ - i)]; }
  const cplx& at(std::size_t i, std::size_t j) const {
    return band_[i * width_ + (j + kl_ - i)];
  }

  std::size_t n_, kl_, ku_, width_;
  std::vector<cplx> band_;
  std::vector<std::size_t> piv_;
};

/// Smallest band (lower, upper) containing every nonzero of a.
std::pair<std::size_t, std::size_t> detect_bandwidth(const ComplexMatrix& a);

}  // namespace toepspec
