#include "toepspec/complex_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "toepspec/errors.hpp"

namespace toepspec {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw InvalidArgument("matrix dimensions must be positive");
  a_.assign(rows * cols, cplx{});
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw InvalidArgument("matrix dimensions must be positive");
  if (a_.size() != rows * cols) throw InvalidArgument("entry count does not match rows*cols");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  if (rows_ == 0 || cols_ == 0) throw InvalidArgument("matrix dimensions must be positive");
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("ragged matrix literal");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  return t;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix t = *this;
  for (auto& z : t.a_) z = std::conj(z);
  return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw InvalidArgument("shape mismatch in +");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw InvalidArgument("shape mismatch in -");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= other.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx alpha) noexcept {
  for (auto& z : a_) z *= alpha;
  return *this;
}

double ComplexMatrix::frobenius_norm() const noexcept { return norm2(a_); }

double ComplexMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : a_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(a_.begin(), a_.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

cplx ComplexMatrix::trace() const {
  if (!is_square()) throw InvalidArgument("trace of non-square matrix");
  cplx t{};
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("shape mismatch in matrix product");
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx* ci = c.row(i).data();
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const cplx ail = a(i, l);
      if (ail == cplx{}) continue;
      const cplx* bl = b.row(l).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

ComplexMatrix operator*(cplx alpha, ComplexMatrix a) { return a *= alpha; }

CVector operator*(const ComplexMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw InvalidArgument("length mismatch in matrix-vector product");
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const cplx* ai = a.row(i).data();
    cplx acc{};
    for (std::size_t j = 0; j < x.size(); ++j) acc += ai[j] * x[j];
    y[i] = acc;
  }
  return y;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return k;
}

double norm2(std::span<const cplx> v) noexcept {
  // scaled to avoid overflow for very large entries
  double scale = 0.0, ssq = 1.0;
  for (const auto& z : v) {
    for (double t : {std::abs(z.real()), std::abs(z.imag())}) {
      if (t == 0.0) continue;
      if (scale < t) {
        ssq = 1.0 + ssq * (scale / t) * (scale / t);
        scale = t;
      } else {
        ssq += (t / scale) * (t / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

}  // namespace toepspec
