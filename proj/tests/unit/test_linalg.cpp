#include "doctest.h"

#include <toepspec/errors.hpp>
#include <toepspec/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace toepspec;

namespace {

ComplexMatrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ComplexMatrix a(m, n);
  for (auto& z : a.entries()) z = {nd(rng), nd(rng)};
  return a;
}

// Random unitary via Gram-Schmidt on a Gaussian matrix.
ComplexMatrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  auto a = random_matrix(n, n, rng);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      cplx c{};
      for (std::size_t i = 0; i < n; ++i) c += std::conj(a(i, p)) * a(i, j);
      for (std::size_t i = 0; i < n; ++i) a(i, j) -= c * a(i, p);
    }
    double nrm = 0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(a(i, j));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) a(i, j) /= nrm;
  }
  return a;
}

// Greedy matching distance between two spectra as multisets.
double spectrum_distance(CVector a, CVector b) {
  double worst = 0;
  for (auto z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cplx u, cplx v) {
      return std::abs(u - z) < std::abs(v - z);
    });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST_CASE("eigenvalues of a 2x2 example") {
  ComplexMatrix a{{cplx(2, 0), cplx(1, 0)}, {cplx(0, 0), cplx(3, 0)}};
  auto r = eig_dense(a);
  CHECK(spectrum_distance(r.eigenvalues, {2.0, 3.0}) < 1e-12);
}

TEST_CASE("eigenvalues are preserved under unitary similarity") {
  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 2u, 5u, 16u, 40u}) {
    CAPTURE(n);
    CVector lam(n);
    std::normal_distribution<double> nd;
    for (auto& z : lam) z = {nd(rng) * 3, nd(rng) * 3};
    // Upper triangular with prescribed diagonal, then a unitary similarity.
    auto t = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) t(i, j) = 0;
      t(i, i) = lam[i];
    }
    auto u = random_unitary(n, rng);
    auto a = u * t * u.adjoint();
    auto r = eig_dense(a, true);
    CHECK(spectrum_distance(r.eigenvalues, lam) < 1e-8 * (1 + a.frobenius_norm()));
    REQUIRE(r.vectors.has_value());
    for (double res : r.residuals) CHECK(res < 1e-9 * (1 + a.frobenius_norm()));
  }
}

TEST_CASE("trace equals sum of eigenvalues for random matrices") {
  std::mt19937_64 rng(9);
  for (std::size_t n : {3u, 10u, 33u, 64u}) {
    auto a = random_matrix(n, n, rng);
    auto r = eig_dense(a);
    cplx s{};
    for (auto z : r.eigenvalues) s += z;
    CHECK(std::abs(s - a.trace()) < 1e-9 * double(n));
  }
}

TEST_CASE("non-finite input is rejected") {
  ComplexMatrix a(2, 2);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eig_dense(a), InvalidArgument);
}

TEST_CASE("singular values of a diagonal with unitary factors") {
  std::mt19937_64 rng(2);
  const std::vector<double> sig{10.0, 4.0, 1.0, 1e-3, 1e-12, 0.0};
  const std::size_t n = sig.size();
  ComplexMatrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = sig[i];
  auto a = random_unitary(n, rng) * d * random_unitary(n, rng);
  auto s = svd_values(a);
  REQUIRE(s.values.size() == n);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(s.values[i] - sig[i]) < 1e-13 * 10 * 10);
  CHECK(numerical_rank(a) == 4);
  CHECK(numerical_rank(a, 1e-3) == 3);
  CHECK(schatten_norm(a, SchattenP::infinity) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(schatten_norm(a, SchattenP::one) == doctest::Approx(15.001).epsilon(1e-12));
}

TEST_CASE("svd of rectangular matrices agrees with Frobenius norm") {
  std::mt19937_64 rng(4);
  for (auto [m, n] : {std::pair{7u, 3u}, std::pair{3u, 7u}, std::pair{30u, 30u}}) {
    auto a = random_matrix(m, n, rng);
    auto s = svd_values(a);
    double sum = 0;
    for (double v : s.values) sum += v * v;
    CHECK(std::sqrt(sum) == doctest::Approx(a.frobenius_norm()).epsilon(1e-12));
    CHECK(std::is_sorted(s.values.rbegin(), s.values.rend()));
  }
}

TEST_CASE("rank edge cases") {
  CHECK(numerical_rank(ComplexMatrix(4, 4)) == 0);
  CHECK_THROWS_AS(numerical_rank(ComplexMatrix::identity(2), 0.0), InvalidArgument);
  CHECK_THROWS_AS(numerical_rank(ComplexMatrix::identity(2), 1.0), InvalidArgument);
}

TEST_CASE("hermitian eig and minimum of the hermitian part") {
  std::mt19937_64 rng(8);
  for (std::size_t n : {1u, 2u, 3u, 6u}) {
    auto m = random_matrix(n, n, rng);
    auto h = 0.5 * (m + m.adjoint());
    auto he = hermitian_eig(h);
    // Rayleigh quotient oracle: reconstruct H from V diag V^*.
    ComplexMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = he.values[i];
    CHECK(max_abs_diff(he.vectors * d * he.vectors.adjoint(), h) < 1e-11);
    CHECK(min_hermitian_part_eigenvalue(m) == doctest::Approx(he.values.front()).epsilon(1e-10));
  }
}

TEST_CASE("dense and banded LU solve") {
  std::mt19937_64 rng(1);
  const std::size_t n = 50, kl = 3, ku = 2;
  auto a = random_matrix(n, n, rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j + kl < i || i + ku < j) a(i, j) = 0;
  CVector x(n);
  std::normal_distribution<double> nd;
  for (auto& z : x) z = {nd(rng), nd(rng)};
  auto b = a * std::span<const cplx>(x);
  auto xd = LuFactor(a).solve(b);
  auto xb = BandedLuFactor(a, kl, ku).solve(b);
  double ed = 0, eb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ed = std::max(ed, std::abs(xd[i] - x[i]));
    eb = std::max(eb, std::abs(xb[i] - x[i]));
  }
  CHECK(ed < 1e-9);
  CHECK(eb < 1e-9);
  CHECK(detect_bandwidth(a) == std::pair<std::size_t, std::size_t>{kl, ku});
  CHECK_THROWS(BandedLuFactor(a, 1, 1));
  CHECK_THROWS_AS(LuFactor(ComplexMatrix(3, 3)), SingularMatrix);
}
