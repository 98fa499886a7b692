#include "doctest.h"

#include <toepspec/catalog.hpp>
#include <toepspec/dsl.hpp>
#include <toepspec/errors.hpp>
#include <toepspec/toeplitz.hpp>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace toepspec;

namespace {

const cplx I{0.0, 1.0};

CVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return v;
}

double rel_diff(const CVector& a, const CVector& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

MatrixSymbol random_trig(int k, int s, int r, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CoefficientTable t;
  for_each_in_range(MultiIndex(k, -r), MultiIndex(k, r), [&](const MultiIndex& j) {
    ComplexMatrix c(static_cast<std::size_t>(s), static_cast<std::size_t>(s));
    for (auto& z : c.entries()) z = {nd(rng), nd(rng)};
    t.emplace(j, c);
  });
  return MatrixSymbol::trig(k, s, t);
}

// Brute-force oracle: block (i,j) = coefficient(i - j) by direct index loops.
ComplexMatrix brute_toeplitz(const MatrixSymbol& f, const MultiIndex& n) {
  const int k = n.dims();
  const auto s = static_cast<std::size_t>(f.block_size());
  std::vector<MultiIndex> idx;
  for_each_in_range(MultiIndex(k, 1), n, [&](const MultiIndex& j) { idx.push_back(j); });
  ComplexMatrix a(idx.size() * s, idx.size() * s);
  for (std::size_t bi = 0; bi < idx.size(); ++bi)
    for (std::size_t bj = 0; bj < idx.size(); ++bj) {
      auto it = f.coefficients().find(idx[bi] - idx[bj]);
      if (it == f.coefficients().end()) continue;
      for (std::size_t p = 0; p < s; ++p)
        for (std::size_t q = 0; q < s; ++q) a(bi * s + p, bj * s + q) = it->second(p, q);
    }
  return a;
}

}  // namespace

TEST_CASE("small examples") {
  auto f = dsl::compile_text("2+2*cos(x)", 1, 1);
  auto t = toeplitz_matrix(f, MultiIndex{3});
  const ComplexMatrix expect{{2.0, 1.0, 0.0}, {1.0, 2.0, 1.0}, {0.0, 1.0, 2.0}};
  CHECK(max_abs_diff(t, expect) == 0.0);

  auto shift = dsl::compile_text("exp(i*x)", 1, 1);
  auto j4 = toeplitz_matrix(shift, MultiIndex{4});
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(j4(r, c) == cplx(r == c + 1 ? 1.0 : 0.0));

  ComplexMatrix c{{1.0, I}, {2.0, 3.0}};
  auto tc = toeplitz_matrix(MatrixSymbol::constant(2, c), MultiIndex{2, 3});
  CHECK(max_abs_diff(tc, kron(ComplexMatrix::identity(6), c)) == 0.0);

  auto op = ToeplitzOperator::both(shift, MultiIndex{4});
  const CVector v{1.0, 2.0, 3.0, 4.0};
  auto w = op.apply_embedded(v);
  const CVector expect_w{0.0, 1.0, 2.0, 3.0};
  CHECK(rel_diff(w, expect_w) < 1e-14);
  CHECK_THROWS_AS(op.apply(CVector(3)), InvalidArgument);
}

TEST_CASE("dense assembly matches the brute-force block layout") {
  std::mt19937_64 rng(3);
  for (int k : {1, 2, 3}) {
    auto f = random_trig(k, 2, 2, rng);
    MultiIndex n = k == 1 ? MultiIndex{6} : k == 2 ? MultiIndex{3, 4} : MultiIndex{2, 3, 2};
    CHECK(max_abs_diff(toeplitz_matrix(f, n), brute_toeplitz(f, n)) == 0.0);
  }
}

TEST_CASE("embedded matvec agrees with dense") {
  std::mt19937_64 rng(8);
  auto c1 = catalog(1, 4.8);
  auto op = ToeplitzOperator::both(c1.f, MultiIndex{32});
  auto v = random_vector(op.order(), rng);
  CHECK(rel_diff(op.apply_embedded(v), op.apply_dense(v)) < 1e-10);

  for (int id : {3, 4, 5, 6}) {
    auto c = catalog(id);
    MultiIndex n = c.f.dims() == 1 ? MultiIndex{40} : MultiIndex{6, 7};
    auto o = ToeplitzOperator::both(c.f, n);
    auto x = random_vector(o.order(), rng);
    CHECK(rel_diff(o.apply_embedded(x), o.apply_dense(x)) < 1e-10);
  }
  auto id = ToeplitzOperator::embedded(MatrixSymbol::identity(2, 2), MultiIndex{3, 5});
  auto x = random_vector(id.order(), rng);
  CHECK(rel_diff(id.apply(x), x) < 1e-14);
}

TEST_CASE("linearity and constant similarity") {
  std::mt19937_64 rng(4);
  for (int k : {1, 2}) {
    auto f = random_trig(k, 2, 1, rng);
    auto g = random_trig(k, 2, 2, rng);
    const cplx alpha(0.3, -1.2), beta(2.0, 0.5);
    MultiIndex n = k == 1 ? MultiIndex{7} : MultiIndex{3, 4};
    auto lhs = toeplitz_matrix(symbol_add(symbol_scale(f, alpha), symbol_scale(g, beta)), n);
    auto rhs = alpha * toeplitz_matrix(f, n) + beta * toeplitz_matrix(g, n);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);

    // Constant unitary Q: T_n(Q f Q^*) = (I x Q) T_n(f) (I x Q)^*.
    const double th = 0.7;
    ComplexMatrix q{{std::cos(th), std::sin(th) * I}, {std::sin(th) * I, std::cos(th)}};
    auto qs = MatrixSymbol::constant(k, q);
    auto conj_f = symbol_mul(symbol_mul(qs, f), MatrixSymbol::constant(k, q.adjoint()));
    auto big = kron(ComplexMatrix::identity(static_cast<std::size_t>(n.product())), q);
    CHECK(max_abs_diff(toeplitz_matrix(conj_f, n), big * toeplitz_matrix(f, n) * big.adjoint()) < 1e-12);
  }
}

TEST_CASE("general symbols use quadrature coefficients") {
  // Hermitian-valued general symbol gives a Hermitian matrix.
  auto h = dsl::compile_text("[[x^2, 1 + i*x], [1 - i*x, cos(x)]]", 1, 2);
  REQUIRE_FALSE(h.is_trig());
  auto t = toeplitz_matrix(h, MultiIndex{12});
  CHECK(max_abs_diff(t, t.adjoint()) < 1e-10);
  // x^2 has coefficients 2(-1)^j / j^2 off the diagonal and pi^2/3 on it.
  auto sq = toeplitz_matrix(dsl::compile_text("x^2", 1, 1), MultiIndex{5});
  CHECK(std::abs(sq(0, 0) - std::numbers::pi * std::numbers::pi / 3) < 1e-5);
  CHECK(std::abs(sq(1, 0) - (-2.0)) < 1e-5);
  CHECK(std::abs(sq(2, 0) - 0.5) < 1e-5);
}

TEST_CASE("resource limit on dense order") {
  auto f = MatrixSymbol::identity(2, 2);
  CHECK_THROWS_AS(toeplitz_matrix(f, MultiIndex{40, 40}), ResourceLimit);
  CHECK_NOTHROW(ToeplitzOperator::embedded(f, MultiIndex{40, 40}));
  CHECK_THROWS_AS(toeplitz_matrix(f, MultiIndex{3}), InvalidArgument);
}

TEST_CASE("preconditioner factorization") {
  std::mt19937_64 rng(10);
  auto c1 = catalog(1, 4.8);
  auto pf = factor_preconditioner(c1.g, MultiIndex{50});
  CHECK(pf.banded());
  auto tg = toeplitz_matrix(c1.g, MultiIndex{50});
  auto b = random_vector(pf.order(), rng);
  auto x = pf.apply(b);
  CHECK(rel_diff(tg * std::span<const cplx>(x), b) < 1e-9);

  auto idf = factor_preconditioner(MatrixSymbol::identity(1, 2), MultiIndex{5});
  auto y = random_vector(idf.order(), rng);
  CHECK(rel_diff(idf.apply(y), y) < 1e-15);

  // 1 - e^{ix}: unit lower bidiagonal, invertible despite the zero at x = 0.
  auto g = dsl::compile_text("1 - exp(i*x)", 1, 1);
  auto gf = factor_preconditioner(g, MultiIndex{20});
  auto bb = random_vector(20, rng);
  auto xx = gf.apply(bb);
  CHECK(rel_diff(toeplitz_matrix(g, MultiIndex{20}) * std::span<const cplx>(xx), bb) < 1e-12);

  auto c5 = catalog(5);
  auto p5 = factor_preconditioner(c5.g, MultiIndex{6, 6});
  CHECK_FALSE(p5.banded());
  auto b5 = random_vector(p5.order(), rng);
  auto x5 = p5.apply(b5);
  CHECK(rel_diff(toeplitz_matrix(c5.g, MultiIndex{6, 6}) * std::span<const cplx>(x5), b5) < 1e-10);

  CHECK_THROWS_AS(factor_preconditioner(MatrixSymbol::trig(1, 1, {}), MultiIndex{4}), SingularMatrix);
}

TEST_CASE("commutator gap examples") {
  auto f = dsl::compile_text("1 + exp(i*x) + exp(-i*x)", 1, 1);
  auto g = dsl::compile_text("exp(i*x)", 1, 1);
  auto gap = commutator_gap(f, g, MultiIndex{5});
  CHECK(gap.rank_bound == 2);
  CHECK(gap.rank <= 2);
  CHECK(gap.within_bound);

  auto cgap = commutator_gap(f, MatrixSymbol::constant(1, ComplexMatrix{{cplx(2, 1)}}), MultiIndex{6});
  CHECK(cgap.rank == 0);
  CHECK(cgap.trace_norm < 1e-12);

  CHECK_THROWS_AS(commutator_gap(f, dsl::compile_text("cos(3*x)", 1, 1), MultiIndex{6}),
                  InvalidArgument);
}

TEST_CASE("norm bounds hold on catalog symbols") {
  for (int id = 1; id <= 6; ++id) {
    auto c = catalog(id, 2.0);
    for (const auto& sym : {c.f, c.g}) {
      CAPTURE(id);
      const int k = sym.dims();
      MultiIndex n = k == 1 ? MultiIndex{64} : MultiIndex{8, 8};
      QuadratureGrid grid{std::vector<int>(static_cast<std::size_t>(k), k == 1 ? 1024 : 128), true};
      auto norms = symbol_norms(sym, grid);
      auto t = toeplitz_matrix(sym, n);
      const double nhat = static_cast<double>(n.product());
      if (id == 2) continue;  // unbounded symbol: no L-infinity bound
      CHECK(schatten_norm(t, SchattenP::infinity) <= norms.linf * 1.02);
      CHECK(schatten_norm(t, SchattenP::one) <=
            nhat / std::pow(2 * std::numbers::pi, k) * norms.l1 * 1.02);
    }
  }
}

TEST_CASE("matrix export formats") {
  auto dir = std::filesystem::temp_directory_path() / "toepspec_test_export";
  std::filesystem::create_directories(dir);
  auto c5 = catalog(5);
  auto t = toeplitz_matrix(c5.f, MultiIndex{2, 3});
  write_matrix_binary(t, 2, MultiIndex{2, 3}, dir / "t.bin");
  auto back = read_matrix_binary(dir / "t.bin");
  CHECK(back.s == 2);
  CHECK(back.n == MultiIndex{2, 3});
  CHECK(max_abs_diff(back.matrix, t) == 0.0);
  CHECK(std::filesystem::file_size(dir / "t.bin") == 8 + 4 * 4 + 12 * 12 * 16);

  write_matrix_csv(t, dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 23);
  }
  CHECK(rows == 12);
  std::filesystem::remove_all(dir);
}
