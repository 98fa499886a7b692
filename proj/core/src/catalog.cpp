#include "toepspec/catalog.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "toepspec/errors.hpp"

namespace toepspec {
namespace {

using namespace std::complex_literals;

/// Accumulates scalar terms c * exp(i<j,x>) into entry (row, col).
class TrigBuilder {
public:
  TrigBuilder(int k, int s) : k_(k), s_(s) {}

  TrigBuilder& add(std::initializer_list<int> j, int row, int col, cplx c) {
    return add(MultiIndex(j), row, col, c);
  }

  TrigBuilder& add(const MultiIndex& idx, int row, int col, cplx c) {
    auto it = table_.find(idx);
    if (it == table_.end())
      it = table_.emplace(idx, ComplexMatrix(static_cast<std::size_t>(s_), static_cast<std::size_t>(s_))).first;
    it->second(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) += c;
    return *this;
  }

  MatrixSymbol build(std::string name) const { return MatrixSymbol::trig(k_, s_, table_, std::move(name)); }

private:
  int k_, s_;
  CoefficientTable table_;
};

MatrixSymbol diag_general(int k, std::string name,
                          std::function<std::array<cplx, 4>(std::span<const double>)> entries,
                          std::vector<SingularHyperplane> singular = {}) {
  return MatrixSymbol::general(
      k, 2,
      [entries](std::span<const double> x) {
        const auto e = entries(x);
        return ComplexMatrix{{e[0], e[1]}, {e[2], e[3]}};
      },
      std::move(name), std::move(singular));
}

double require_r(int id, std::optional<double> r) {
  if (!r) throw InvalidArgument("catalog case " + std::to_string(id) + " requires parameter r");
  if (!std::isfinite(*r) || *r <= 0) throw InvalidArgument("catalog parameter r must be positive");
  return *r;
}

}  // namespace

MatrixSymbol rotation_symbol(int k) {
  if (k != 1 && k != 2) throw InvalidArgument("rotation symbol defined for k = 1, 2");
  TrigBuilder q(k, 2);
  // cos u = (e^{iu} + e^{-iu})/2, sin u = (e^{iu} - e^{-iu})/(2i)
  const MultiIndex plus(k, 1), minus(k, -1);
  const cplx half = 0.5, sin_p = -0.5i, sin_m = 0.5i;
  q.add(plus, 0, 0, half).add(minus, 0, 0, half);
  q.add(plus, 1, 1, half).add(minus, 1, 1, half);
  q.add(plus, 0, 1, sin_p).add(minus, 0, 1, sin_m);
  q.add(plus, 1, 0, -sin_p).add(minus, 1, 0, -sin_m);
  return q.build("Q");
}

std::string to_string(CatalogWindow window) {
  return window == CatalogWindow::symmetric ? "symmetric" : "from_zero";
}

CatalogWindow parse_catalog_window(const std::string& text) {
  if (text == "symmetric") return CatalogWindow::symmetric;
  if (text == "from_zero") return CatalogWindow::from_zero;
  throw InvalidArgument("unknown catalog window '" + text + "' (symmetric | from_zero)");
}

CatalogCase catalog(int case_id, std::optional<double> r_param, CatalogWindow window) {
  const bool shift = window == CatalogWindow::from_zero;
  // argument of the non-periodic factors
  const auto arg = [shift](double t) { return shift && t < 0 ? t + 2 * std::numbers::pi : t; };
  struct {
    std::optional<double> r;
    MatrixSymbol q = MatrixSymbol::identity(1, 1), a = q, b = q;
    std::string description;
  } c;
  constexpr double pi = std::numbers::pi;
  switch (case_id) {
    case 1: {
      const double r = require_r(1, r_param);
      c.r = r;
      c.q = rotation_symbol(1);
      c.a = TrigBuilder(1, 2)
                .add({0}, 0, 0, 2.0 + 1i).add({1}, 0, 0, 0.5).add({-1}, 0, 0, 0.5)
                .add({0}, 1, 0, 1.0)
                .add({0}, 1, 1, 5.0).add({1}, 1, 1, r)
                .build("A1");
      c.b = TrigBuilder(1, 2).add({0}, 0, 0, 1.0).add({0}, 1, 1, 5.0).add({1}, 1, 1, r).build("B1");
      c.description = "A1 = [[2+i+cos x, 0],[1, 5+r e^{ix}]], B1 = diag(1, 5+r e^{ix})";
      break;
    }
    case 2: {
      const double r = require_r(2, r_param);
      c.r = r;
      c.q = rotation_symbol(1);
      c.a = diag_general(
          1, "A2",
          [r, arg](std::span<const double> x) -> std::array<cplx, 4> {
            const double t = x[0], u = arg(t);
            return {2.0 + 1i + std::cos(t), 0.0, 1.0 / (u * u - 1.0), 5.0 + r * std::polar(1.0, t)};
          },
          shift ? std::vector<SingularHyperplane>{{0, 1.0}}
                : std::vector<SingularHyperplane>{{0, -1.0}, {0, 1.0}});
      c.b = TrigBuilder(1, 2).add({0}, 0, 0, 1.0).add({0}, 1, 1, 5.0).add({1}, 1, 1, r).build("B2");
      c.description = "A2 = [[2+i+cos x, 0],[1/(x^2-1), 5+r e^{ix}]], B2 = B1 (singular at x = +-1)";
      break;
    }
    case 3: {
      c.q = rotation_symbol(1);
      c.a = diag_general(1, "A3", [arg](std::span<const double> x) -> std::array<cplx, 4> {
        const double t = x[0], u = arg(t);
        return {(1.0 - std::polar(1.0, t)) * (1.0 + u * u / (pi * pi)), 0.0, 0.0, 2.0 + std::cos(t)};
      });
      c.b = TrigBuilder(1, 2).add({0}, 0, 0, 1.0).add({1}, 0, 0, -1.0).add({0}, 1, 1, 1.0).build("B3");
      c.description = "A3 = diag((1-e^{ix})(1+x^2/pi^2), 2+cos x), B3 = diag(1-e^{ix}, 1)";
      break;
    }
    case 4: {
      c.q = rotation_symbol(1);
      c.a = diag_general(1, "A4", [arg](std::span<const double> x) -> std::array<cplx, 4> {
        const double t = x[0];
        const double sn = std::sin(t);
        return {(1.0 - std::polar(1.0, t)) * (sn * sn + 3.0), 0.0, arg(t), 1.0 + std::cos(t)};
      });
      c.b = TrigBuilder(1, 2)
                .add({0}, 0, 0, 1.0).add({1}, 0, 0, -1.0)
                .add({0}, 1, 1, 1.0).add({1}, 1, 1, 0.5).add({-1}, 1, 1, 0.5)
                .build("B4");
      c.description = "A4 = [[(1-e^{ix})(sin^2 x+3), 0],[x, 1+cos x]], B4 = diag(1-e^{ix}, 1+cos x)";
      break;
    }
    case 5: {
      c.q = rotation_symbol(2);
      c.a = TrigBuilder(2, 2)
                .add({0, 0}, 0, 0, 3i)
                .add({1, 0}, 0, 0, 0.5).add({-1, 0}, 0, 0, 0.5)
                .add({0, 1}, 0, 0, 0.5).add({0, -1}, 0, 0, 0.5)
                .add({0, 0}, 1, 1, 10.0).add({1, 0}, 1, 1, 2.0).add({0, 1}, 1, 1, 2.0)
                .build("A5");
      c.b = TrigBuilder(2, 2)
                .add({0, 0}, 0, 0, 1.0)
                .add({0, 0}, 1, 1, 10.0).add({1, 0}, 1, 1, 2.0).add({0, 1}, 1, 1, 2.0)
                .build("B5");
      c.description = "A5 = diag(3i+cos x1+cos x2, 10+2(e^{ix1}+e^{ix2})), B5 = diag(1, 10+2(e^{ix1}+e^{ix2}))";
      break;
    }
    case 6: {
      c.q = rotation_symbol(2);
      c.a = TrigBuilder(2, 2)
                .add({0, 0}, 0, 0, 1.0).add({1, 0}, 0, 0, -0.5).add({0, 1}, 0, 0, -0.5)
                .add({0, 0}, 1, 1, 10.0)
                .add({1, 0}, 1, 1, 0.5).add({-1, 0}, 1, 1, 0.5)
                .add({0, 1}, 1, 1, 0.5).add({0, -1}, 1, 1, 0.5)
                .build("A6");
      c.b = TrigBuilder(2, 2)
                .add({0, 0}, 0, 0, 1.0).add({1, 0}, 0, 0, -0.5).add({0, 1}, 0, 0, -0.5)
                .add({0, 0}, 1, 1, 1.0)
                .build("B6");
      c.description = "A6 = diag(1-(e^{ix1}+e^{ix2})/2, 10+cos x1+cos x2), B6 = diag(1-(e^{ix1}+e^{ix2})/2, 1)";
      break;
    }
    default:
      throw InvalidArgument("unknown catalog case " + std::to_string(case_id) + " (expected 1..6)");
  }
  const std::string tag = std::to_string(case_id);
  if (shift && case_id >= 2 && case_id <= 4) c.description += "; non-periodic factors read x in [0, 2 pi)";
  return CatalogCase{case_id,
                     c.r,
                     similarity(c.q, c.a).renamed("f" + tag),
                     similarity(c.q, c.b).renamed("g" + tag),
                     c.a,
                     c.b,
                     c.q,
                     c.description};
}

}  // namespace toepspec
