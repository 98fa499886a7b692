#include "doctest.h"

#include <toepspec/catalog.hpp>
#include <toepspec/errors.hpp>
#include <toepspec/linalg.hpp>
#include <toepspec/symbol.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace toepspec;

namespace {

constexpr double pi = std::numbers::pi;
const cplx I{0.0, 1.0};

std::vector<double> random_point(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  std::vector<double> x(static_cast<std::size_t>(k));
  for (auto& v : x) v = u(rng);
  return x;
}

// Same values as `sym`, but only through an evaluator, so quadrature is used.
MatrixSymbol as_general(const MatrixSymbol& sym) {
  return MatrixSymbol::general(sym.dims(), sym.block_size(),
                               [sym](std::span<const double> x) { return sym.evaluate(x); });
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

CVector sorted(CVector v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

}  // namespace

TEST_CASE("multi-index lexicographic ordering, last index fastest") {
  const MultiIndex lo{1, 1}, hi{2, 3};
  std::vector<MultiIndex> seen;
  for_each_in_range(lo, hi, [&](const MultiIndex& j) { seen.push_back(j); });
  const std::vector<MultiIndex> expect{{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}};
  CHECK(seen == expect);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(linearize(seen[i], lo, hi) == i);
  CHECK(linearize(MultiIndex{4}, MultiIndex{1}, MultiIndex{9}) == 3);
  for_each_in_range(MultiIndex{2, 2, 2}, MultiIndex{3, 3, 3}, [&](const MultiIndex& j) {
    const MultiIndex a{2, 2, 2}, b{3, 3, 3};
    CHECK(delinearize(linearize(j, a, b), a, b) == j);
  });
  CHECK_THROWS_AS(linearize(MultiIndex{3, 1}, lo, hi), InvalidArgument);
  CHECK(MultiIndex::parse("20,20") == MultiIndex{20, 20});
  CHECK(MultiIndex::parse("(1,2)") == MultiIndex{1, 2});
}

TEST_CASE("trig symbols evaluate their coefficient table and report degree") {
  std::mt19937_64 rng(17);
  CoefficientTable t;
  t.emplace(MultiIndex{2}, ComplexMatrix{{cplx(1, 2)}});
  t.emplace(MultiIndex{-1}, ComplexMatrix{{cplx(0.5, 0)}});
  t.emplace(MultiIndex{3}, ComplexMatrix{{cplx(0, 0)}});
  auto f = MatrixSymbol::trig(1, 1, t);
  CHECK(f.degree() == MultiIndex{2});
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_point(1, rng);
    const cplx expect = cplx(1, 2) * std::exp(2.0 * I * x[0]) + 0.5 * std::exp(-I * x[0]);
    CHECK(std::abs(f.evaluate(x)(0, 0) - expect) < 1e-12);
  }
  CHECK_THROWS_AS(as_general(f).degree(), InvalidArgument);
}

TEST_CASE("quadrature recovers coefficient tables of trig symbols") {
  std::mt19937_64 rng(21);
  for (int k : {1, 2}) {
    auto f = random_trig(k, 2, 2, rng);
    auto g = as_general(f);
    QuadratureGrid grid{std::vector<int>(static_cast<std::size_t>(k), 16), false};
    for_each_in_range(MultiIndex(k, -2), MultiIndex(k, 2), [&](const MultiIndex& j) {
      CHECK(max_abs_diff(fourier_coefficient(g, j, grid), f.coefficients().at(j)) < 1e-10);
    });
    CHECK_THROWS_AS(fourier_coefficient(g, MultiIndex(k, 8), grid), InvalidArgument);
  }
}

TEST_CASE("constant and pure-frequency coefficients") {
  ComplexMatrix c{{cplx(1, 1), 2.0}, {3.0, cplx(0, -4)}};
  auto f = as_general(MatrixSymbol::constant(1, c));
  QuadratureGrid grid{{32}, true};
  CHECK(max_abs_diff(fourier_coefficient(f, MultiIndex{0}, grid), c) < 1e-13);
  CHECK(fourier_coefficient(f, MultiIndex{3}, grid).max_abs() < 1e-13);

  auto e11 = MatrixSymbol::general(1, 2, [](std::span<const double> x) {
    ComplexMatrix m(2, 2);
    m(0, 0) = std::exp(I * x[0]);
    return m;
  });
  auto table = fourier_table(e11, MultiIndex{4}, QuadratureGrid{{16}, false});
  for (int j = -4; j <= 4; ++j) {
    const double expect = j == 1 ? 1.0 : 0.0;
    CHECK(std::abs(table.at(MultiIndex{j})(0, 0) - expect) < 1e-13);
    CHECK(table.at(MultiIndex{j})(1, 1) == cplx{});
  }
}

TEST_CASE("product degree is additive for generic coefficients") {
  std::mt19937_64 rng(2);
  auto a = random_trig(2, 2, 1, rng);
  auto b = random_trig(2, 2, 2, rng);
  auto p = symbol_mul(a, b);
  CHECK(p.is_trig());
  CHECK(p.degree() == MultiIndex{3, 3});
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_point(2, rng);
    CHECK(max_abs_diff(p.evaluate(x), a.evaluate(x) * b.evaluate(x)) < 1e-11);
  }
}

TEST_CASE("similarity with a rotation preserves pointwise eigenvalues") {
  std::mt19937_64 rng(6);
  for (int k : {1, 2}) {
    auto a = random_trig(k, 2, 1, rng);
    auto q = rotation_symbol(k);
    auto f = similarity(q, a);
    for (int trial = 0; trial < 10; ++trial) {
      auto x = random_point(k, rng);
      const auto qx = q.evaluate(x);
      CHECK(max_abs_diff(f.evaluate(x), qx * a.evaluate(x) * qx.transpose()) < 1e-13);
      auto e1 = sorted(eig_dense(f.evaluate(x)).eigenvalues);
      auto e2 = sorted(eig_dense(a.evaluate(x)).eigenvalues);
      for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(e1[i] - e2[i]) < 1e-10);
    }
  }
}

TEST_CASE("catalog values at the origin") {
  auto c1 = catalog(1, 4.8);
  CHECK(max_abs_diff(c1.f.evaluate({0.0}), ComplexMatrix{{cplx(3, 1), 0.0}, {1.0, 9.8}}) < 1e-13);
  CHECK(c1.g.is_trig());

  auto c5 = catalog(5);
  CHECK(c5.f.dims() == 2);
  CHECK(c5.f.block_size() == 2);
  CHECK(max_abs_diff(c5.a.evaluate({0.0, 0.0}),
                     ComplexMatrix{{cplx(2, 3), 0.0}, {0.0, 14.0}}) < 1e-13);
  auto g5inv = symbol_inverse(c5.g).evaluate({0.0, 0.0});
  auto ev = sorted(eig_dense(g5inv).eigenvalues);
  CHECK(std::abs(ev[0] - 1.0 / 14.0) < 1e-13);
  CHECK(std::abs(ev[1] - 1.0) < 1e-13);

  auto c3 = catalog(3);
  CHECK(c3.g.is_trig());
  CHECK(c3.g.degree() == MultiIndex{3});
  auto g30 = c3.g.evaluate({0.0});
  CHECK(std::abs(g30(0, 0) * g30(1, 1) - g30(0, 1) * g30(1, 0)) < 1e-14);

  for (int id : {1, 2, 3, 4, 5, 6}) {
    auto c = catalog(id, 2.0);
    const int k = id >= 5 ? 2 : 1;
    CHECK(c.f.dims() == k);
    CHECK(c.g.is_trig());
  }
  CHECK_THROWS_AS(catalog(7), InvalidArgument);
  CHECK_THROWS_AS(catalog(1), InvalidArgument);
}

TEST_CASE("case 2 declares singular points") {
  auto c2 = catalog(2, 1.0);
  CHECK_FALSE(c2.f.is_trig());
  CHECK_THROWS_AS(c2.f.evaluate({1.0}), DomainError);
  CHECK_THROWS_AS(c2.f.evaluate({-1.0}), DomainError);
  const std::vector<double> one{1.0};
  CHECK_FALSE(c2.f.try_evaluate(one).has_value());
  CHECK(c2.f.evaluate({0.5}).all_finite());
}

TEST_CASE("preconditioned symbol of case 1 has eigenvalues 2+i+cos x and 1") {
  std::mt19937_64 rng(12);
  auto c = catalog(1, 4.8);
  auto h = symbol_mul(symbol_inverse(c.g), c.f);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_point(1, rng);
    auto ev = sorted(eig_dense(h.evaluate(x)).eigenvalues);
    CVector expect = sorted({cplx(2 + std::cos(x[0]), 1), 1.0});
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(ev[i] - expect[i]) < 1e-10);
  }
}

TEST_CASE("symbolic expansion of g1 coefficients matches quadrature") {
  // Q = C0 + C1 e^{ix} + C-1 e^{-ix}, B = B0 + B1 e^{ix}; expand Q B Q^T by hand.
  const double r = 4.8;
  ComplexMatrix q0(2, 2), q1{{0.5, -0.5 * I}, {0.5 * I, 0.5}}, qm{{0.5, 0.5 * I}, {-0.5 * I, 0.5}};
  ComplexMatrix b0{{1.0, 0.0}, {0.0, 5.0}}, b1{{0.0, 0.0}, {0.0, r}};
  std::map<int, ComplexMatrix> qs{{1, q1}, {-1, qm}}, bs{{0, b0}, {1, b1}};
  (void)q0;
  std::map<int, ComplexMatrix> expect;
  for (auto& [i, qi] : qs)
    for (auto& [j, bj] : bs)
      for (auto& [l, ql] : qs) {
        auto term = qi * bj * ql.transpose();
        auto [it, fresh] = expect.try_emplace(i + j + l, term);
        if (!fresh) it->second += term;
      }
  auto g = as_general(catalog(1, r).g);
  QuadratureGrid grid{{64}, false};
  for (int j = -3; j <= 3; ++j) {
    ComplexMatrix e = expect.count(j) ? expect.at(j) : ComplexMatrix(2, 2);
    CHECK(max_abs_diff(fourier_coefficient(g, MultiIndex{j}, grid), e) < 1e-10);
  }
}

TEST_CASE("catalog window only moves the non-periodic factors") {
  constexpr double pi = std::numbers::pi;
  for (int id : {1, 5, 6}) {
    auto a = catalog(id, 2.0), b = catalog(id, 2.0, CatalogWindow::from_zero);
    const std::vector<double> x(static_cast<std::size_t>(a.f.dims()), -0.7);
    CHECK(max_abs_diff(a.f.evaluate(x), b.f.evaluate(x)) == 0.0);
  }
  auto a3 = catalog(3).a, b3 = catalog(3, {}, CatalogWindow::from_zero).a;
  CHECK(max_abs_diff(a3.evaluate({0.5}), b3.evaluate({0.5})) == 0.0);
  const cplx expected = (1.0 - std::polar(1.0, -0.5)) * (1.0 + std::pow(2 * pi - 0.5, 2) / (pi * pi));
  CHECK(std::abs(b3.evaluate({-0.5})(0, 0) - expected) < 1e-14);
  CHECK(catalog(4, {}, CatalogWindow::from_zero).a.evaluate({-1.0})(1, 0) == cplx(2 * pi - 1.0));
  auto b2 = catalog(2, 1.0, CatalogWindow::from_zero);
  CHECK_NOTHROW(b2.a.evaluate({-1.0}));
  CHECK_THROWS_AS(b2.a.evaluate({1.0}), DomainError);
  CHECK(parse_catalog_window("from_zero") == CatalogWindow::from_zero);
  CHECK_THROWS_AS(parse_catalog_window("left"), InvalidArgument);
}
