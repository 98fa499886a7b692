#include "doctest.h"

#include <toepspec/catalog.hpp>
#include <toepspec/errors.hpp>
#include <toepspec/krylov.hpp>
#include <toepspec/linalg.hpp>
#include <toepspec/toeplitz.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

using namespace toepspec;

namespace {

LinearOperator dense_op(const ComplexMatrix& a) {
  return [&a](std::span<const cplx> v) { return a * v; };
}

ComplexMatrix random_well_conditioned(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = cplx(u(rng), u(rng)) * 0.3;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 4.0;
  return a;
}

double rel_err(std::span<const cplx> x, std::span<const cplx> y) {
  CVector d(x.begin(), x.end());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= y[i];
  return norm2(d) / norm2(y);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("identity converges in one step") {
  const auto id = ComplexMatrix::identity(7);
  const CVector b = random_rhs(7, 3);
  auto res = gmres(dense_op(id), b);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 1);
  CHECK(res.report.history.size() == 1);
  CHECK(rel_err(res.x, b) < 1e-14);
}

TEST_CASE("solution matches a direct solve") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = random_well_conditioned(10, seed);
    const CVector b = random_rhs(10, seed + 100);
    const CVector direct = LuFactor(a).solve(b);
    GmresOptions opts;
    opts.tol = 1e-10;
    auto res = gmres(dense_op(a), b, opts);
    CHECK(res.report.converged);
    CHECK(rel_err(res.x, direct) < 1e-6);
  }
}

TEST_CASE("history is monotone and consistent with the returned solution") {
  auto c = catalog(1, 4.8);
  const MultiIndex n{60};
  const auto t = toeplitz_matrix(c.f, n);
  const auto m = factor_preconditioner(c.g, n);
  const CVector b = random_rhs(t.rows(), 11);
  for (bool prec : {false, true}) {
    auto res = gmres(dense_op(t), b, {}, prec ? &m : nullptr);
    const auto& h = res.report.history;
    REQUIRE(res.report.converged);
    CHECK(h.size() == res.report.iterations);
    CHECK(h.back() <= 1e-6);
    for (std::size_t i = 0; i < h.size(); ++i) {
      CHECK(h[i] >= 0.0);
      if (i > 0) CHECK(h[i] <= h[i - 1] * (1 + 1e-12));
    }
    CVector r = t * std::span<const cplx>(res.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    double actual = prec ? norm2(m.apply(r)) / norm2(m.apply(b)) : norm2(r) / norm2(b);
    CHECK(actual <= 1.1 * h.back());
    CHECK(actual >= h.back() / 1.1);
  }
}

TEST_CASE("true-residual stopping") {
  auto c = catalog(3);
  const MultiIndex n{40};
  const auto t = toeplitz_matrix(c.f, n);
  const auto m = factor_preconditioner(c.g, n);
  const CVector b = random_rhs(t.rows(), 5);
  GmresOptions opts;
  opts.true_residual = true;
  auto res = gmres(dense_op(t), b, opts, &m);
  REQUIRE(res.report.converged);
  CHECK(res.report.config.true_residual);
  CVector r = t * std::span<const cplx>(res.x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  CHECK(norm2(r) / norm2(b) <= 1e-6);
  CHECK(std::abs(norm2(r) / norm2(b) - res.report.history.back()) < 1e-12);
}

TEST_CASE("iteration cap and argument errors") {
  const auto a = random_well_conditioned(12, 9);
  const CVector b = random_rhs(12, 1);
  GmresOptions opts;
  opts.max_iter = 3;
  opts.tol = 1e-14;
  auto res = gmres(dense_op(a), b, opts);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.iterations == 3);
  CHECK(res.x.size() == 12);

  opts.max_iter = 13;
  CHECK_THROWS_AS(gmres(dense_op(a), b, opts), InvalidArgument);
  CHECK_THROWS_AS(gmres(dense_op(a), CVector(12, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(gmres(dense_op(a), CVector{}), InvalidArgument);
}

TEST_CASE("breakdown without convergence raises stagnation with a partial report") {
  const ComplexMatrix nil{{0.0, 1.0}, {0.0, 0.0}};
  const CVector b{1.0, 0.0};
  try {
    gmres(dense_op(nil), b);
    FAIL("expected stagnation");
  } catch (const GmresStagnation& e) {
    CHECK(e.report().iterations == 1);
    CHECK(e.report().history.size() == 1);
    CHECK_FALSE(e.report().converged);
  }
  // Happy breakdown: b is an eigenvector.
  const ComplexMatrix diag{{2.0, 0.0}, {0.0, 3.0}};
  auto res = gmres(dense_op(diag), CVector{1.0, 0.0});
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 1);
}

TEST_CASE("catalog runs") {
  auto r50 = run_case(1, 4.8, MultiIndex{50}, true, 42);
  CHECK(r50.converged);
  CHECK(r50.iterations >= 11);
  CHECK(r50.iterations <= 17);
  CHECK(r50.config.case_id == 1);
  CHECK(r50.config.r == 4.8);
  CHECK(r50.seed == 42);

  auto c4 = run_case(4, std::nullopt, MultiIndex{100}, false, 42);
  auto p4 = run_case(4, std::nullopt, MultiIndex{100}, true, 42);
  CHECK(c4.iterations >= 160);
  CHECK(c4.iterations <= 240);
  CHECK(p4.iterations >= 7);
  CHECK(p4.iterations <= 12);

  // f = g: the preconditioned operator is the identity.
  auto g = catalog(1, 2.0).g;
  for (int n : {20, 80}) CHECK(solve_system(g, g, MultiIndex{n}, 1).report.iterations <= 2);

  CHECK_THROWS_AS(run_case(5, std::nullopt, MultiIndex{10}, true, 1), InvalidArgument);
  CHECK_THROWS_AS(run_case(7, std::nullopt, MultiIndex{10}, true, 1), InvalidArgument);
}

TEST_CASE("iteration trends in n") {
  std::size_t prev = 0;
  for (int n : {50, 100, 200}) {
    auto p = run_case(1, 4.8, MultiIndex{n}, true, 7);
    if (prev) CHECK(p.iterations <= prev + 2);
    prev = p.iterations;
  }
  for (int id : {3, 4}) {
    prev = 0;
    for (int n : {50, 100, 200}) {
      auto p = run_case(id, std::nullopt, MultiIndex{n}, true, 7);
      if (prev) CHECK(p.iterations <= prev + 2);
      prev = p.iterations;
    }
  }
  // Two-level cases double n from (10,10); Case 5 is still climbing below that.
  for (int id : {5, 6}) {
    const auto a = run_case(id, std::nullopt, MultiIndex{10, 10}, true, 7);
    const auto b = run_case(id, std::nullopt, MultiIndex{20, 20}, true, 7);
    CHECK(b.iterations <= a.iterations + 2);
  }
  for (int id : {3, 4}) {
    std::size_t last = 0;
    for (int n : {25, 50, 100}) {
      auto u = run_case(id, std::nullopt, MultiIndex{n}, false, 7);
      CHECK(u.iterations > last);
      last = u.iterations;
    }
  }
}

TEST_CASE("embedded matvec path agrees with the dense path") {
  auto c = catalog(6);
  const MultiIndex n{9, 9};
  const auto dense = ToeplitzOperator::dense(c.f, n);
  const auto fft = ToeplitzOperator::embedded(c.f, n);
  const CVector b = random_rhs(dense.order(), 4);
  auto a = gmres([&](std::span<const cplx> v) { return dense.apply(v); }, b);
  auto e = gmres([&](std::span<const cplx> v) { return fft.apply(v); }, b);
  CHECK(a.report.iterations == e.report.iterations);
  CHECK(rel_err(a.x, e.x) < 1e-8);
}

TEST_CASE("reports are deterministic and serializable") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "toepspec_krylov_test";
  fs::create_directories(dir);
  auto a = run_case(5, std::nullopt, MultiIndex{6, 6}, true, 99);
  auto b = run_case(5, std::nullopt, MultiIndex{6, 6}, true, 99);
  REQUIRE(a.history.size() == b.history.size());
  CHECK(std::memcmp(a.history.data(), b.history.data(), a.history.size() * sizeof(double)) == 0);
  write_residual_csv(a, dir / "a.csv");
  write_residual_csv(b, dir / "b.csv");
  const std::string text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  CHECK(text.rfind("iter,relres\n1,", 0) == 0);

  auto j = nlohmann::json::parse(to_json(a));
  CHECK(j["iterations"] == a.iterations);
  CHECK(j["seed"] == 99);
  CHECK(j["config"]["case"] == 5);
  CHECK(j["config"]["n"] == std::vector<int>{6, 6});
  CHECK(j["config"]["preconditioned"] == true);
  CHECK(j["config"]["r"].is_null());
  CHECK(j["history"].size() == a.history.size());
  fs::remove_all(dir);
}
