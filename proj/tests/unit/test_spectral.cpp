#include "doctest.h"

#include <toepspec/catalog.hpp>
#include <toepspec/dsl.hpp>
#include <toepspec/errors.hpp>
#include <toepspec/linalg.hpp>
#include <toepspec/spectral.hpp>
#include <toepspec/toeplitz.hpp>

#include "support/hull_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace toepspec;

namespace {

constexpr double pi = std::numbers::pi;

QuadratureGrid grid1(int n = 256) { return QuadratureGrid{{n}, false}; }

}  // namespace

TEST_CASE("essential range examples") {
  auto c = MatrixSymbol::constant(1, ComplexMatrix{{cplx(1, 2), 0.0}, {0.0, -3.0}});
  auto er = essential_range(c, grid1(64));
  for (auto z : er.points) CHECK((std::abs(z - cplx(1, 2)) < 1e-14 || std::abs(z + 3.0) < 1e-14));
  CHECK_THROWS_AS(essential_range(c, grid1(32)), InvalidArgument);

  auto c1 = catalog(1, 4.8);
  auto h1 = symbol_mul(symbol_inverse(c1.g), c1.f);
  for (auto z : essential_range(h1, grid1()).points) {
    const bool on_segment = std::abs(z.imag() - 1) < 1e-8 && z.real() > 1 - 1e-8 && z.real() < 3 + 1e-8;
    CHECK((on_segment || std::abs(z - 1.0) < 1e-8));
  }

  auto c5 = catalog(5);
  for (auto z : essential_range(c5.f, QuadratureGrid{{64, 64}, false}).points) {
    const bool seg = std::abs(z.imag() - 3) < 1e-10 && std::abs(z.real()) <= 2 + 1e-10;
    const bool disk = std::abs(z - 10.0) <= 4 + 1e-10;
    CHECK((seg || disk));
  }
}

TEST_CASE("numerical range examples") {
  auto f = dsl::compile_text("2 + exp(i*x)", 1, 1);
  auto enr = essential_numerical_range(f, grid1());
  auto er = essential_range(f, grid1());
  CHECK(enr.cloud.points == er.points);

  auto herm = dsl::compile_text("[[cos(x), 1], [1, 2]]", 1, 2);
  auto hr = essential_numerical_range(herm, grid1(), 360);
  for (auto z : hr.cloud.points) CHECK(std::abs(z.imag()) < 1e-12);
  // support at theta = pi/2 and 3 pi/2 is Im z = 0 on both sides
  CHECK(std::abs(hr.support[90]) < 1e-12);
  CHECK(std::abs(hr.support[270]) < 1e-12);
  CHECK_THROWS_AS(essential_numerical_range(herm, grid1(), 45), InvalidArgument);
}

TEST_CASE("essential range lies in the numerical range hull for every catalog symbol") {
  for (int id = 1; id <= 6; ++id) {
    auto c = catalog(id, 3.0);
    for (const auto& sym : {c.f, c.g}) {
      auto grid = default_range_grid(sym.dims());
      auto enr = essential_numerical_range(sym, grid);
      for (auto z : essential_range(sym, grid).points) CHECK(support_contains(enr, z, 1e-6));
    }
  }
}

TEST_CASE("sectoriality of g1 against a planar hull oracle") {
  for (double r : {1.0, 2.0, 3.0, 4.0, 4.8}) {
    CAPTURE(r);
    const double oracle = oracle::g1_separation(r);
    CHECK(oracle == doctest::Approx(r <= 4 ? 1.0 : 0.2).epsilon(1e-4));
    auto rep = sectoriality(catalog(1, r).g, grid1());
    CHECK(rep.classification == Sectoriality::sectorial);
    CHECK(rep.d == doctest::Approx(oracle).epsilon(0.02));
    CHECK_FALSE(rep.zero_in_hull);
  }
}

TEST_CASE("sectoriality edge cases") {
  auto one = sectoriality(MatrixSymbol::identity(1, 1), grid1(64));
  CHECK(one.classification == Sectoriality::sectorial);
  CHECK(one.d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::min(one.best_angle, 2 * pi - one.best_angle) < 1e-6);

  // g3: 0 on the hull boundary, support values vary over x.
  auto g3 = sectoriality(catalog(3).g, grid1());
  CHECK(g3.d == 0.0);
  CHECK(g3.zero_in_hull);
  CHECK(g3.witness_variance > 1e-10);
  CHECK(g3.classification == Sectoriality::sectorial);

  // Constant on the boundary: weakly sectorial only.
  auto flat = sectoriality(dsl::compile_text("i", 1, 1), grid1(64));
  CHECK(flat.d == doctest::Approx(1.0));
  auto zero_line = sectoriality(dsl::compile_text("i*cos(x)", 1, 1), grid1(64));
  CHECK(zero_line.classification == Sectoriality::weakly_sectorial);
  auto circle = sectoriality(dsl::compile_text("exp(i*x)", 1, 1), grid1(64));
  CHECK(circle.classification == Sectoriality::not_weakly_sectorial);
}

TEST_CASE("sectoriality is invariant under unimodular scaling") {
  auto g = catalog(1, 3.0).g;
  auto base = sectoriality(g, grid1());
  for (double phi : {0.3, 1.7, -2.2}) {
    auto rot = sectoriality(symbol_scale(g, std::polar(1.0, phi)), grid1());
    CHECK(std::abs(rot.d - base.d) < 1e-8);
    double shift = std::remainder(rot.best_angle - base.best_angle - phi, 2 * pi);
    CHECK(std::abs(shift) < 1e-5);
  }
}

TEST_CASE("inverse norm of a sectorial symbol is bounded by 1/d") {
  for (double r : {1.0, 4.8}) {
    auto g = catalog(1, r).g;
    auto rep = sectoriality(g, grid1());
    auto inv = symbol_inverse(g);
    for (int t = 0; t < 256; ++t) {
      const double x = -pi + 2 * pi * t / 256;
      CHECK(schatten_norm(inv.evaluate({x}), SchattenP::infinity) <= 1 / rep.d + 1e-6);
    }
  }
  auto g5 = catalog(5).g;
  auto rep5 = sectoriality(g5, QuadratureGrid{{64, 64}, false});
  CHECK(rep5.classification == Sectoriality::sectorial);
}

TEST_CASE("localization region examples") {
  auto g = catalog(1, 2.0).g;
  Rect rect{-1, 3, -2, 2};
  auto same = localization_region(g, g, rect, 33, grid1(128), 90);
  for (std::size_t r = 0; r < same.height; ++r)
    for (std::size_t c = 0; c < same.width; ++c) {
      const cplx lam = same.center(r, c);
      if (std::abs(lam - 1.0) > 1e-3) CHECK(same.at(r, c));
    }

  auto shift = dsl::compile_text("exp(i*x)", 1, 1);
  auto id = MatrixSymbol::identity(1, 1);
  auto m = localization_region(shift, id, Rect{-2, 2, -2, 2}, 41, grid1(128), 90);
  for (std::size_t r = 0; r < m.height; ++r)
    for (std::size_t c = 0; c < m.width; ++c) {
      const double rad = std::abs(m.center(r, c));
      if (rad < 0.95) CHECK_FALSE(m.at(r, c));
      if (rad > 1.05) CHECK(m.at(r, c));
    }

  CHECK_THROWS_AS(localization_region(g, shift, rect, 8, grid1(64), 90), InvalidArgument);
  auto bad = dsl::compile_text("[[exp(i*x), 0], [0, 1]]", 1, 2);
  CHECK_THROWS_AS(localization_region(g, bad, rect, 8, grid1(64), 90), PreconditionViolated);
}

TEST_CASE("area of compact sets") {
  const std::vector<cplx> two{0.0, cplx(3, 0)};
  auto a = area_of_compact(two, 256, 0.2);
  CHECK(a.area() == doctest::Approx(2 * pi * 0.04).epsilon(0.1));
  CHECK_FALSE(a.at(a.pixel_of(1.5)->first, a.pixel_of(1.5)->second));

  std::vector<cplx> circle;
  for (int t = 0; t < 2000; ++t) circle.push_back(std::polar(1.0, 2 * pi * t / 2000));
  auto disk = area_of_compact(circle, 128, 0.05);
  auto o = disk.pixel_of(0.0);
  CHECK(disk.at(o->first, o->second));
  CHECK(disk.area() == doctest::Approx(pi * 1.05 * 1.05).epsilon(0.05));

  CHECK_THROWS_AS(area_of_compact(two, 16, 0.1), InvalidArgument);
  CHECK_THROWS_AS(area_of_compact({}, 64, 0.1), InvalidArgument);

  // Frame pixels are never in Area(K).
  for (std::size_t i = 0; i < disk.width; ++i) CHECK_FALSE(disk.at(0, i));
}

TEST_CASE("outlier counting") {
  const std::vector<cplx> cloud{0.0, 1.0, 2.0};
  const std::vector<cplx> eigs{0.05, cplx(1, 0.09), 5.0, cplx(2, -0.5), -0.1};
  CHECK(outlier_count(eigs, cloud, 0.1) == 2);
  CHECK(outlier_count(eigs, cloud, 1.0) == 1);
  CHECK(outlier_count(eigs, cloud, 10.0) == 0);
  CHECK_THROWS_AS(outlier_count(eigs, cloud, 0.0), InvalidArgument);
}

TEST_CASE("moment test examples") {
  auto c1 = catalog(1, 1.0);
  auto same = moment_test(c1.g, c1.g, MultiIndex{16}, 4, grid1(1024));
  for (int p = 0; p <= 4; ++p) {
    CHECK(std::abs(same.trace_mean[p] - 1.0) < 1e-10);
    CHECK(std::abs(same.integral[p] - 1.0) < 1e-10);
  }
  auto rep = moment_test(c1.f, c1.g, MultiIndex{32}, 2, grid1(1024));
  CHECK(rep.gap[0] == 0.0);
  CHECK(std::abs(rep.integral[1] - cplx(1.5, 0.5)) < 1e-10);
  CHECK_THROWS_AS(moment_test(c1.f, c1.g, MultiIndex{32}, 9, grid1(64)), InvalidArgument);
}

TEST_CASE("distribution functionals") {
  const std::vector<cplx> eig{2 + std::sqrt(2.0), 2.0, 2 - std::sqrt(2.0)};
  CHECK(std::abs(distribution_functional(eig, "monomial:2") - 16.0 / 3.0) < 1e-12);
  CHECK(distribution_functional(eig, "one") == cplx(1.0));
  CHECK(distribution_functional(eig, "bump:2:0:10").real() > 0.9);
  const std::vector<cplx> ones(5, 1.0);
  CHECK(distribution_functional(ones, "monomial:1") == cplx(1.0));
  CHECK(distribution_functional(eig, "re_window:1.9:2.1:0.01").real() == doctest::Approx(1.0 / 3.0));
  CHECK(distribution_functional(eig, "im_window:-1:1:0.1").real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(distribution_functional(eig, "nope"), InvalidArgument);
  CHECK_THROWS_AS(distribution_functional(eig, "monomial:9"), InvalidArgument);
  CHECK_THROWS_AS(distribution_functional(eig, "bump:0:0:x"), InvalidArgument);
}
