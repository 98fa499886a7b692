#include "toepspec/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "toepspec/errors.hpp"
#include "toepspec/fft.hpp"
#include "toepspec/linalg.hpp"

namespace toepspec {

struct MatrixSymbol::Impl {
  int k = 1;
  int s = 1;
  SymbolKind kind = SymbolKind::general;
  std::string name;
  CoefficientTable table;
  MultiIndex degree;
  Evaluator evaluator;
  std::vector<SingularHyperplane> singular;
};

namespace {

void check_shape(int k, int s) {
  if (k < 1 || k > MultiIndex::kMaxDims) throw InvalidArgument("symbol dimension k must be 1..3");
  if (s < 1 || s > 8) throw InvalidArgument("symbol block size s must be 1..8");
}

void check_compatible(const MatrixSymbol& a, const MatrixSymbol& b, const char* op) {
  if (a.dims() != b.dims() || a.block_size() != b.block_size())
    throw InvalidArgument(std::string(op) + ": symbols differ in (k, s)");
}

std::vector<SingularHyperplane> merge_singular(const MatrixSymbol& a, const MatrixSymbol& b) {
  auto out = a.singular_set();
  for (const auto& h : b.singular_set())
    if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
  return out;
}

ComplexMatrix eval_table(const CoefficientTable& table, int s, std::span<const double> x) {
  ComplexMatrix out(static_cast<std::size_t>(s), static_cast<std::size_t>(s));
  for (const auto& [j, c] : table) {
    double phase = 0.0;
    for (int d = 0; d < j.dims(); ++d) phase += j[d] * x[static_cast<std::size_t>(d)];
    const cplx w = std::polar(1.0, phase);
    for (std::size_t e = 0; e < c.entries().size(); ++e) out.entries()[e] += c.entries()[e] * w;
  }
  return out;
}

std::string combine_name(const MatrixSymbol& a, const char* op, const MatrixSymbol& b) {
  if (a.name().empty() || b.name().empty()) return {};
  return "(" + a.name() + op + b.name() + ")";
}

}  // namespace

MatrixSymbol MatrixSymbol::trig(int k, int s, CoefficientTable coefficients, std::string name) {
  check_shape(k, s);
  auto impl = std::make_shared<Impl>();
  impl->k = k;
  impl->s = s;
  impl->kind = SymbolKind::trig_polynomial;
  impl->name = std::move(name);
  impl->degree = MultiIndex(k, 0);
  for (auto& [j, c] : coefficients) {
    if (j.dims() != k) throw InvalidArgument("coefficient multi-index has wrong dimension");
    if (c.rows() != static_cast<std::size_t>(s) || c.cols() != static_cast<std::size_t>(s))
      throw InvalidArgument("coefficient block has wrong size");
    if (!c.all_finite()) throw InvalidArgument("non-finite trig coefficient");
    if (c.max_abs() == 0.0) continue;
    for (int d = 0; d < k; ++d) impl->degree[d] = std::max(impl->degree[d], std::abs(j[d]));
    impl->table.emplace(j, std::move(c));
  }
  return MatrixSymbol(std::move(impl));
}

MatrixSymbol MatrixSymbol::general(int k, int s, Evaluator evaluator, std::string name,
                                   std::vector<SingularHyperplane> singular) {
  check_shape(k, s);
  if (!evaluator) throw InvalidArgument("general symbol needs an evaluator");
  for (const auto& h : singular)
    if (h.variable < 0 || h.variable >= k) throw InvalidArgument("singular hyperplane variable out of range");
  auto impl = std::make_shared<Impl>();
  impl->k = k;
  impl->s = s;
  impl->kind = SymbolKind::general;
  impl->name = std::move(name);
  impl->evaluator = std::move(evaluator);
  impl->singular = std::move(singular);
  return MatrixSymbol(std::move(impl));
}

MatrixSymbol MatrixSymbol::constant(int k, const ComplexMatrix& value, std::string name) {
  if (!value.is_square()) throw InvalidArgument("constant symbol must be square");
  CoefficientTable t;
  t.emplace(MultiIndex(k, 0), value);
  return trig(k, static_cast<int>(value.rows()), std::move(t), std::move(name));
}

MatrixSymbol MatrixSymbol::identity(int k, int s) {
  return constant(k, ComplexMatrix::identity(static_cast<std::size_t>(s)), "I");
}

int MatrixSymbol::dims() const noexcept { return impl_->k; }
int MatrixSymbol::block_size() const noexcept { return impl_->s; }
SymbolKind MatrixSymbol::kind() const noexcept { return impl_->kind; }
const std::string& MatrixSymbol::name() const noexcept { return impl_->name; }

MatrixSymbol MatrixSymbol::renamed(std::string name) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->name = std::move(name);
  return MatrixSymbol(std::move(impl));
}

const MultiIndex& MatrixSymbol::degree() const {
  if (!is_trig()) throw InvalidArgument("degree is undefined for a general (non-trigonometric) symbol");
  return impl_->degree;
}

const CoefficientTable& MatrixSymbol::coefficients() const {
  if (!is_trig()) throw InvalidArgument("general symbols have no exact coefficient table");
  return impl_->table;
}

const std::vector<SingularHyperplane>& MatrixSymbol::singular_set() const noexcept {
  return impl_->singular;
}

bool MatrixSymbol::is_singular_at(std::span<const double> x, double tol) const {
  for (const auto& h : impl_->singular)
    if (std::abs(x[static_cast<std::size_t>(h.variable)] - h.value) <= tol) return true;
  return false;
}

std::optional<ComplexMatrix> MatrixSymbol::try_evaluate(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(impl_->k))
    throw InvalidArgument("evaluation point has wrong dimension");
  for (double v : x)
    if (!(std::abs(v) <= std::numbers::pi + 1e-9))
      throw InvalidArgument("evaluation point outside [-pi, pi]^k");
  if (is_singular_at(x)) return std::nullopt;
  if (is_trig()) return eval_table(impl_->table, impl_->s, x);
  ComplexMatrix m = impl_->evaluator(x);
  if (m.rows() != static_cast<std::size_t>(impl_->s) || m.cols() != static_cast<std::size_t>(impl_->s))
    throw InvalidArgument("evaluator returned a block of the wrong size");
  return m;
}

ComplexMatrix MatrixSymbol::evaluate(std::span<const double> x) const {
  auto v = try_evaluate(x);
  if (!v) {
    std::string where;
    for (double t : x) where += (where.empty() ? "" : ",") + std::to_string(t);
    throw DomainError("symbol '" + name() + "' evaluated at a declared singular point (" + where + ")");
  }
  return std::move(*v);
}

// ---- algebra ---------------------------------------------------------------

MatrixSymbol symbol_add(const MatrixSymbol& a, const MatrixSymbol& b) {
  check_compatible(a, b, "symbol_add");
  auto name = combine_name(a, "+", b);
  if (a.is_trig() && b.is_trig()) {
    CoefficientTable t = a.coefficients();
    for (const auto& [j, c] : b.coefficients()) {
      auto it = t.find(j);
      if (it == t.end()) t.emplace(j, c);
      else it->second += c;
    }
    return MatrixSymbol::trig(a.dims(), a.block_size(), std::move(t), std::move(name));
  }
  return MatrixSymbol::general(
      a.dims(), a.block_size(),
      [a, b](std::span<const double> x) { return a.evaluate(x) + b.evaluate(x); }, std::move(name),
      merge_singular(a, b));
}

MatrixSymbol symbol_scale(const MatrixSymbol& a, cplx alpha) {
  if (a.is_trig()) {
    CoefficientTable t = a.coefficients();
    for (auto& [j, c] : t) c *= alpha;
    return MatrixSymbol::trig(a.dims(), a.block_size(), std::move(t), a.name());
  }
  return MatrixSymbol::general(
      a.dims(), a.block_size(),
      [a, alpha](std::span<const double> x) { return alpha * a.evaluate(x); }, a.name(),
      a.singular_set());
}

MatrixSymbol symbol_sub(const MatrixSymbol& a, const MatrixSymbol& b) {
  return symbol_add(a, symbol_scale(b, -1.0)).renamed(combine_name(a, "-", b));
}

MatrixSymbol symbol_mul(const MatrixSymbol& a, const MatrixSymbol& b) {
  check_compatible(a, b, "symbol_mul");
  auto name = combine_name(a, "*", b);
  if (a.is_trig() && b.is_trig()) {
    CoefficientTable t;
    for (const auto& [ja, ca] : a.coefficients())
      for (const auto& [jb, cb] : b.coefficients()) {
        const MultiIndex j = ja + jb;
        ComplexMatrix prod = ca * cb;
        auto it = t.find(j);
        if (it == t.end()) t.emplace(j, std::move(prod));
        else it->second += prod;
      }
    return MatrixSymbol::trig(a.dims(), a.block_size(), std::move(t), std::move(name));
  }
  return MatrixSymbol::general(
      a.dims(), a.block_size(),
      [a, b](std::span<const double> x) { return a.evaluate(x) * b.evaluate(x); }, std::move(name),
      merge_singular(a, b));
}

MatrixSymbol symbol_transpose(const MatrixSymbol& a) {
  const std::string name = a.name().empty() ? "" : a.name() + "^T";
  if (a.is_trig()) {
    CoefficientTable t;
    for (const auto& [j, c] : a.coefficients()) t.emplace(j, c.transpose());
    return MatrixSymbol::trig(a.dims(), a.block_size(), std::move(t), name);
  }
  return MatrixSymbol::general(
      a.dims(), a.block_size(),
      [a](std::span<const double> x) { return a.evaluate(x).transpose(); }, name,
      a.singular_set());
}

MatrixSymbol symbol_conjugate(const MatrixSymbol& a) {
  const std::string name = a.name().empty() ? "" : "conj(" + a.name() + ")";
  if (a.is_trig()) {
    CoefficientTable t;
    for (const auto& [j, c] : a.coefficients()) t.emplace(-j, c.conjugate());
    return MatrixSymbol::trig(a.dims(), a.block_size(), std::move(t), name);
  }
  return MatrixSymbol::general(
      a.dims(), a.block_size(),
      [a](std::span<const double> x) { return a.evaluate(x).conjugate(); }, name,
      a.singular_set());
}

MatrixSymbol symbol_inverse(const MatrixSymbol& a) {
  const std::string name = a.name().empty() ? "" : a.name() + "^-1";
  return MatrixSymbol::general(
      a.dims(), a.block_size(),
      [a](std::span<const double> x) {
        ComplexMatrix m = a.evaluate(x);
        const auto sv = svd_values(m).values;
        if (sv.front() == 0.0 || sv.back() <= 1e-13 * sv.front())
          throw SingularSymbol("symbol_inverse: symbol '" + a.name() +
                                   "' is numerically singular at the evaluation point",
                               std::vector<double>(x.begin(), x.end()));
        LuFactor lu(std::move(m));
        return lu.solve(ComplexMatrix::identity(static_cast<std::size_t>(a.block_size())));
      },
      name, a.singular_set());
}

MatrixSymbol similarity(const MatrixSymbol& q, const MatrixSymbol& a) {
  auto r = symbol_mul(symbol_mul(q, a), symbol_transpose(q));
  return r.renamed(a.name().empty() ? "" : "Q" + a.name() + "Q^T");
}

// ---- Fourier coefficients --------------------------------------------------

double QuadratureGrid::node(int d, int t) const {
  const double n = sizes[static_cast<std::size_t>(d)];
  const double off = half_step ? 0.5 : 0.0;
  return -std::numbers::pi + 2.0 * std::numbers::pi * (t + off) / n;
}

std::size_t QuadratureGrid::total() const {
  std::size_t t = 1;
  for (int n : sizes) t *= static_cast<std::size_t>(n);
  return t;
}

QuadratureGrid default_coefficient_grid(const MatrixSymbol& sym, const MultiIndex& n,
                                        const Tolerances& tol) {
  const int k = sym.dims();
  const int base = k == 1 ? tol.coeff_grid_1d : k == 2 ? tol.coeff_grid_2d : tol.coeff_grid_3d;
  QuadratureGrid g;
  for (int d = 0; d < k; ++d) g.sizes.push_back(std::max(base, 4 * n[d]));
  g.half_step = !sym.is_trig();
  return g;
}

namespace {

void check_grid(const MatrixSymbol& sym, const MultiIndex& radius, const QuadratureGrid& grid) {
  if (grid.sizes.size() != static_cast<std::size_t>(sym.dims()) || radius.dims() != sym.dims())
    throw InvalidArgument("quadrature grid / index dimension does not match the symbol");
  for (int d = 0; d < sym.dims(); ++d)
    if (grid.sizes[static_cast<std::size_t>(d)] < 2 * std::abs(radius[d]) + 2)
      throw InvalidArgument("quadrature grid too small: need at least 2|j|+2 nodes per dimension");
}

}  // namespace

std::vector<std::optional<ComplexMatrix>> sample_on_grid(const MatrixSymbol& sym,
                                                         const QuadratureGrid& grid) {
  const int k = sym.dims();
  std::vector<std::optional<ComplexMatrix>> out;
  out.reserve(grid.total());
  MultiIndex lo(k, 0), hi(k, 0);
  for (int d = 0; d < k; ++d) hi[d] = grid.sizes[static_cast<std::size_t>(d)] - 1;
  std::vector<double> x(static_cast<std::size_t>(k));
  for_each_in_range(lo, hi, [&](const MultiIndex& t) {
    for (int d = 0; d < k; ++d) x[static_cast<std::size_t>(d)] = grid.node(d, t[d]);
    out.push_back(sym.try_evaluate(x));
  });
  return out;
}

const ComplexMatrix& FourierTable::at(const MultiIndex& j) const {
  return coefficients[linearize(j, -radius, radius)];
}

FourierTable fourier_table(const MatrixSymbol& sym, const MultiIndex& radius,
                           const QuadratureGrid& grid) {
  check_grid(sym, radius, grid);
  const int k = sym.dims();
  const auto s = static_cast<std::size_t>(sym.block_size());
  FourierTable out;
  out.radius = radius;
  out.grid = grid;
  out.s = sym.block_size();
  const std::size_t count = range_size(-radius, radius);
  out.coefficients.assign(count, ComplexMatrix(s, s));

  if (sym.is_trig()) {
    for (const auto& [j, c] : sym.coefficients()) {
      bool inside = true;
      for (int d = 0; d < k; ++d) inside = inside && std::abs(j[d]) <= radius[d];
      if (inside) out.coefficients[linearize(j, -radius, radius)] = c;
    }
    return out;
  }

  const auto samples = sample_on_grid(sym, grid);
  const std::size_t total = grid.total();
  std::vector<std::size_t> sizes(grid.sizes.begin(), grid.sizes.end());
  MultiFftPlan plan(sizes);
  CVector buf(total);
  const double inv_total = 1.0 / static_cast<double>(total);
  const double off = grid.half_step ? 0.5 : 0.0;
  double alias = 0.0;
  for (std::size_t p = 0; p < s; ++p) {
    for (std::size_t q = 0; q < s; ++q) {
      for (std::size_t t = 0; t < total; ++t) buf[t] = samples[t] ? (*samples[t])(p, q) : cplx{};
      plan.execute(buf, FftDirection::forward);
      // c_j = (1/N) prod_d (-1)^{j_d} exp(-2 pi i j_d off / N_d) * DFT[j mod N]
      auto coefficient_at = [&](const MultiIndex& j) {
        std::size_t idx = 0;
        double phase = 0.0;
        for (int d = 0; d < k; ++d) {
          const int n = grid.sizes[static_cast<std::size_t>(d)];
          const int jm = ((j[d] % n) + n) % n;
          idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(jm);
          phase += std::numbers::pi * j[d] - 2.0 * std::numbers::pi * j[d] * off / n;
        }
        return buf[idx] * std::polar(inv_total, phase);
      };
      for (std::size_t e = 0; e < count; ++e) {
        const MultiIndex j = delinearize(e, -radius, radius);
        out.coefficients[e](p, q) = coefficient_at(j);
      }
      // tail magnitude: frequencies in the outer half of the resolved band
      MultiIndex lo(k, 0), hi(k, 0);
      for (int d = 0; d < k; ++d) {
        lo[d] = -(grid.sizes[static_cast<std::size_t>(d)] - 1) / 2;
        hi[d] = grid.sizes[static_cast<std::size_t>(d)] / 2 - 1;
      }
      for_each_in_range(lo, hi, [&](const MultiIndex& j) {
        bool outer = false;
        for (int d = 0; d < k; ++d)
          outer = outer || std::abs(j[d]) * 4 >= grid.sizes[static_cast<std::size_t>(d)];
        if (outer) alias = std::max(alias, std::abs(coefficient_at(j)));
      });
    }
  }
  out.aliasing_estimate = alias;
  return out;
}

ComplexMatrix fourier_coefficient(const MatrixSymbol& sym, const MultiIndex& j,
                                  const QuadratureGrid& grid) {
  MultiIndex radius(j.dims(), 0);
  for (int d = 0; d < j.dims(); ++d) radius[d] = std::abs(j[d]);
  check_grid(sym, radius, grid);
  if (sym.is_trig()) {
    auto it = sym.coefficients().find(j);
    const auto s = static_cast<std::size_t>(sym.block_size());
    return it == sym.coefficients().end() ? ComplexMatrix(s, s) : it->second;
  }
  return fourier_table(sym, radius, grid).at(j);
}

}  // namespace toepspec
