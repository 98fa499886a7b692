#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace toepspec {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Dense complex matrix, row-major. Never empty: rows, cols >= 1.
class ComplexMatrix {
public:
  ComplexMatrix() : ComplexMatrix(1, 1) {}
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const cplx> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept {
    return a_[i * cols_ + j];
  }

  std::span<cplx> entries() noexcept { return a_; }
  std::span<const cplx> entries() const noexcept { return a_; }
  std::span<cplx> row(std::size_t i) noexcept { return {a_.data() + i * cols_, cols_}; }
  std::span<const cplx> row(std::size_t i) const noexcept {
    return {a_.data() + i * cols_, cols_};
  }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conjugate() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cplx alpha) noexcept;

  double frobenius_norm() const noexcept;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;
  cplx trace() const;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<cplx> a_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx alpha, ComplexMatrix a);
CVector operator*(const ComplexMatrix& a, std::span<const cplx> x);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

double norm2(std::span<const cplx> v) noexcept;
cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept;  // a^* b

/// max |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace toepspec
