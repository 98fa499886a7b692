#include "toepspec/toeplitz.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "toepspec/config.hpp"
#include "toepspec/errors.hpp"
#include "toepspec/fft.hpp"

namespace toepspec {

static_assert(std::endian::native == std::endian::little,
              "binary dump assumes a little-endian host");

namespace {

std::size_t checked_order(int s, const MultiIndex& n) {
  for (int d = 0; d < n.dims(); ++d)
    if (n[d] < 1) throw InvalidArgument("matrix size n must be >= 1 in every component");
  const long long nhat = n.product();
  if (nhat <= 0 || nhat > std::numeric_limits<long long>::max() / s)
    throw ResourceLimit("matrix order overflows");
  return static_cast<std::size_t>(nhat) * static_cast<std::size_t>(s);
}

MultiIndex ones(int k) { return MultiIndex(k, 1); }

/// Coefficients for -(n-e)..(n-e): exact for trig symbols, quadrature otherwise.
FourierTable coefficients_for(const MatrixSymbol& f, const MultiIndex& n,
                              const std::optional<QuadratureGrid>& grid) {
  const auto radius = n - ones(n.dims());
  return fourier_table(f, radius, grid ? *grid : default_coefficient_grid(f, n));
}

/// Block-row positions inside the box -R..R: offset(i) - offset(j) + center
/// linearizes i - j.
struct BoxOffsets {
  std::vector<std::size_t> offset;  // per block index, 0-based multi-index
  std::size_t center = 0;
};

BoxOffsets box_offsets(const MultiIndex& n) {
  const int k = n.dims();
  std::vector<std::size_t> stride(static_cast<std::size_t>(k));
  std::size_t acc = 1;
  for (int d = k - 1; d >= 0; --d) {
    stride[static_cast<std::size_t>(d)] = acc;
    acc *= static_cast<std::size_t>(2 * n[d] - 1);
  }
  BoxOffsets out;
  for (int d = 0; d < k; ++d)
    out.center += static_cast<std::size_t>(n[d] - 1) * stride[static_cast<std::size_t>(d)];
  for_each_in_range(ones(k), n, [&](const MultiIndex& i) {
    std::size_t off = 0;
    for (int d = 0; d < k; ++d)
      off += static_cast<std::size_t>(i[d] - 1) * stride[static_cast<std::size_t>(d)];
    out.offset.push_back(off);
  });
  return out;
}

ComplexMatrix assemble(int s, const MultiIndex& n, const std::vector<ComplexMatrix>& box) {
  const std::size_t order = checked_order(s, n);
  if (order > max_dense_order())
    throw ResourceLimit("dense order " + std::to_string(order) + " exceeds the cap " +
                        std::to_string(max_dense_order()) + " (TOEPSPEC_MAX_ORDER)");
  const auto bs = static_cast<std::size_t>(s);
  const auto pos = box_offsets(n);
  const std::size_t blocks = pos.offset.size();
  ComplexMatrix a(order, order);
  for (std::size_t bi = 0; bi < blocks; ++bi)
    for (std::size_t bj = 0; bj < blocks; ++bj) {
      const ComplexMatrix& c = box[pos.offset[bi] + pos.center - pos.offset[bj]];
      for (std::size_t p = 0; p < bs; ++p)
        for (std::size_t q = 0; q < bs; ++q) a(bi * bs + p, bj * bs + q) = c(p, q);
    }
  return a;
}

}  // namespace

struct ToeplitzOperator::Embedding {
  std::vector<std::size_t> sizes;      // 2 n_d
  MultiFftPlan plan;
  std::vector<CVector> spectra;        // s*s, entry (p, q) at p*s + q
  std::vector<std::size_t> positions;  // block index -> embedded position

  Embedding(int s, const MultiIndex& n, const FourierTable& table)
      : sizes(make_sizes(n)), plan(sizes) {
    const int k = n.dims();
    std::size_t total = 1;
    for (auto m : sizes) total *= m;
    const auto bs = static_cast<std::size_t>(s);
    auto embedded_index = [&](const MultiIndex& j) {
      std::size_t idx = 0;
      for (int d = 0; d < k; ++d) {
        const auto m = static_cast<long long>(sizes[static_cast<std::size_t>(d)]);
        idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(((j[d] % m) + m) % m);
      }
      return idx;
    };
    spectra.assign(bs * bs, CVector(total));
    const MultiIndex radius = n - ones(k);
    for_each_in_range(-radius, radius, [&](const MultiIndex& j) {
      const ComplexMatrix& c = table.at(j);
      const std::size_t idx = embedded_index(j);
      for (std::size_t p = 0; p < bs; ++p)
        for (std::size_t q = 0; q < bs; ++q) spectra[p * bs + q][idx] = c(p, q);
    });
    for (auto& sp : spectra) plan.execute(sp, FftDirection::forward);
    for_each_in_range(ones(k), n,
                      [&](const MultiIndex& i) { positions.push_back(embedded_index(i - ones(k))); });
  }

  static std::vector<std::size_t> make_sizes(const MultiIndex& n) {
    std::vector<std::size_t> out;
    for (int d = 0; d < n.dims(); ++d) out.push_back(2 * static_cast<std::size_t>(n[d]));
    return out;
  }
};

ToeplitzOperator ToeplitzOperator::dense(const MatrixSymbol& f, const MultiIndex& n,
                                         std::optional<QuadratureGrid> grid) {
  if (n.dims() != f.dims()) throw InvalidArgument("n has " + std::to_string(n.dims()) +
                                                  " components but the symbol has k = " +
                                                  std::to_string(f.dims()));
  ToeplitzOperator op;
  op.n_ = n;
  op.s_ = f.block_size();
  op.order_ = checked_order(op.s_, n);
  if (op.order_ > max_dense_order())
    throw ResourceLimit("dense order " + std::to_string(op.order_) + " exceeds the cap " +
                        std::to_string(max_dense_order()) + " (TOEPSPEC_MAX_ORDER)");
  const auto table = coefficients_for(f, n, grid);
  op.alias_ = table.aliasing_estimate;
  op.dense_ = assemble(op.s_, n, table.coefficients);
  return op;
}

ToeplitzOperator ToeplitzOperator::embedded(const MatrixSymbol& f, const MultiIndex& n,
                                            std::optional<QuadratureGrid> grid) {
  if (n.dims() != f.dims()) throw InvalidArgument("n does not match the symbol dimension");
  ToeplitzOperator op;
  op.n_ = n;
  op.s_ = f.block_size();
  op.order_ = checked_order(op.s_, n);
  const auto table = coefficients_for(f, n, grid);
  op.alias_ = table.aliasing_estimate;
  op.embed_ = std::make_shared<const Embedding>(op.s_, n, table);
  return op;
}

ToeplitzOperator ToeplitzOperator::both(const MatrixSymbol& f, const MultiIndex& n,
                                        std::optional<QuadratureGrid> grid) {
  if (n.dims() != f.dims()) throw InvalidArgument("n does not match the symbol dimension");
  ToeplitzOperator op;
  op.n_ = n;
  op.s_ = f.block_size();
  op.order_ = checked_order(op.s_, n);
  const auto table = coefficients_for(f, n, grid);
  op.alias_ = table.aliasing_estimate;
  op.dense_ = assemble(op.s_, n, table.coefficients);
  op.embed_ = std::make_shared<const Embedding>(op.s_, n, table);
  return op;
}

ToeplitzOperator ToeplitzOperator::from_coefficients(int s, const MultiIndex& n,
                                                     const CoefficientFn& coeff) {
  ToeplitzOperator op;
  op.n_ = n;
  op.s_ = s;
  op.order_ = checked_order(s, n);
  const MultiIndex radius = n - ones(n.dims());
  std::vector<ComplexMatrix> box;
  box.reserve(range_size(-radius, radius));
  for_each_in_range(-radius, radius, [&](const MultiIndex& j) {
    auto c = coeff(j);
    if (c.rows() != static_cast<std::size_t>(s) || c.cols() != static_cast<std::size_t>(s))
      throw InvalidArgument("coefficient block has the wrong size");
    box.push_back(std::move(c));
  });
  op.dense_ = assemble(s, n, box);
  return op;
}

const ComplexMatrix& ToeplitzOperator::matrix() const {
  if (!dense_) throw PreconditionViolated("operator was not assembled densely");
  return *dense_;
}

void ToeplitzOperator::check_length(std::size_t len) const {
  if (len != order_)
    throw InvalidArgument("vector length " + std::to_string(len) + " does not match order " +
                          std::to_string(order_));
}

CVector ToeplitzOperator::apply(std::span<const cplx> v) const {
  return embed_ ? apply_embedded(v) : apply_dense(v);
}

CVector ToeplitzOperator::apply_dense(std::span<const cplx> v) const {
  check_length(v.size());
  return matrix() * v;
}

CVector ToeplitzOperator::apply_embedded(std::span<const cplx> v) const {
  check_length(v.size());
  if (!embed_) throw PreconditionViolated("operator has no circulant embedding");
  const auto& e = *embed_;
  const auto bs = static_cast<std::size_t>(s_);
  const std::size_t total = e.spectra.front().size();
  std::vector<CVector> in(bs, CVector(total));
  for (std::size_t q = 0; q < bs; ++q) {
    for (std::size_t b = 0; b < e.positions.size(); ++b) in[q][e.positions[b]] = v[b * bs + q];
    e.plan.execute(in[q], FftDirection::forward);
  }
  CVector out(order_);
  CVector acc(total);
  for (std::size_t p = 0; p < bs; ++p) {
    std::fill(acc.begin(), acc.end(), cplx{});
    for (std::size_t q = 0; q < bs; ++q) {
      const CVector& c = e.spectra[p * bs + q];
      for (std::size_t t = 0; t < total; ++t) acc[t] += c[t] * in[q][t];
    }
    e.plan.execute(acc, FftDirection::inverse);
    for (std::size_t b = 0; b < e.positions.size(); ++b) out[b * bs + p] = acc[e.positions[b]];
  }
  return out;
}

ComplexMatrix toeplitz_matrix(const MatrixSymbol& f, const MultiIndex& n) {
  return ToeplitzOperator::dense(f, n).matrix();
}

// ---- preconditioner ---------------------------------------------------------------

CVector PrecondFactor::apply(std::span<const cplx> b) const {
  if (b.size() != order_) throw InvalidArgument("preconditioner: vector length mismatch");
  return banded_ ? banded_->solve(b) : dense_->solve(b);
}

PrecondFactor factor_preconditioner(const MatrixSymbol& g, const MultiIndex& n) {
  PrecondFactor out;
  auto t = toeplitz_matrix(g, n);
  out.order_ = t.rows();
  try {
    if (g.dims() == 1 && g.is_trig()) {
      const auto s = static_cast<std::size_t>(g.block_size());
      const auto r = static_cast<std::size_t>(g.degree()[0]);
      const std::size_t bw = std::min(out.order_ - 1, s * (r + 1) - 1);
      out.band_ = {bw, bw};
      out.banded_.emplace(t, bw, bw);
    } else {
      out.dense_.emplace(std::move(t));
    }
  } catch (const SingularMatrix&) {
    throw SingularMatrix("T_n(g) is numerically singular for n = " + n.to_string() +
                         "; the preconditioner symbol is likely not sectorial");
  }
  return out;
}

// ---- commutator gap -----------------------------------------------------------------

ComplexMatrix preconditioned_matrix(const MatrixSymbol& f, const MatrixSymbol& g, const MultiIndex& n) {
  if (f.dims() != g.dims() || f.block_size() != g.block_size())
    throw InvalidArgument("f and g must agree in k and s");
  const auto pf = factor_preconditioner(g, n);
  const auto tf = toeplitz_matrix(f, n);
  const std::size_t order = tf.rows();
  ComplexMatrix a(order, order);
  CVector col(order);
  for (std::size_t j = 0; j < order; ++j) {
    for (std::size_t i = 0; i < order; ++i) col[i] = tf(i, j);
    const auto x = pf.apply(col);
    for (std::size_t i = 0; i < order; ++i) a(i, j) = x[i];
  }
  return a;
}

CommutatorGap commutator_gap(const MatrixSymbol& f, const MatrixSymbol& g, const MultiIndex& n) {
  if (!g.is_trig()) throw InvalidArgument("commutator gap needs a trig-polynomial g");
  if (f.dims() != g.dims() || f.block_size() != g.block_size() || n.dims() != f.dims())
    throw InvalidArgument("commutator gap: f, g and n must agree in k and s");
  const int k = n.dims();
  const MultiIndex r = g.degree();
  for (int d = 0; d < k; ++d)
    if (n[d] < 2 * r[d] + 1)
      throw InvalidArgument("commutator gap needs n >= 2r + e, got n = " + n.to_string() +
                            ", r = " + r.to_string());
  const int s = g.block_size();

  // One coefficient table of f, wide enough for the product, feeds both T_n(f)
  // and T_n(gf) so quadrature error cancels in the gap.
  const MultiIndex wide = n - ones(k) + r;
  const auto grid = default_coefficient_grid(f, n + r);
  const auto ftab = fourier_table(f, wide, grid);
  const auto& gtab = g.coefficients();

  auto tf = ToeplitzOperator::from_coefficients(s, n, [&](const MultiIndex& j) { return ftab.at(j); });
  auto tg = toeplitz_matrix(g, n);
  auto tgf = ToeplitzOperator::from_coefficients(s, n, [&](const MultiIndex& j) {
    ComplexMatrix c(static_cast<std::size_t>(s), static_cast<std::size_t>(s));
    for (const auto& [l, gl] : gtab) c += gl * ftab.at(j - l);
    return c;
  });
  auto gap = tg * tf.matrix() - tgf.matrix();

  CommutatorGap out;
  out.rank = numerical_rank(gap);
  out.trace_norm = schatten_norm(gap, SchattenP::one);
  long long inner = 1;
  for (int d = 0; d < k; ++d) inner *= n[d] - 2 * r[d];
  out.rank_bound = static_cast<std::size_t>(s) * static_cast<std::size_t>(n.product() - inner);
  out.within_bound = out.rank <= out.rank_bound;
  return out;
}

SymbolNorms symbol_norms(const MatrixSymbol& f, const QuadratureGrid& grid) {
  const auto samples = sample_on_grid(f, grid);
  SymbolNorms out;
  for (const auto& m : samples) {
    if (!m) continue;
    const auto sv = svd_values(*m).values;
    double sum = 0;
    for (double v : sv) sum += v;
    out.l1 += sum;
    out.linf = std::max(out.linf, sv.front());
  }
  out.l1 *= std::pow(2.0 * std::numbers::pi, f.dims()) / static_cast<double>(grid.total());
  return out;
}

// ---- export -------------------------------------------------------------------------

void write_matrix_csv(const ComplexMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  char buf[64];
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", j ? "," : "", a(i, j).real(), a(i, j).imag());
      out << buf;
    }
    out << '\n';
  }
}

namespace {

constexpr char kMagic[8] = {'T', 'O', 'E', 'P', 'S', 'P', 'C', '1'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void write_matrix_binary(const ComplexMatrix& a, int s, const MultiIndex& n,
                         const std::filesystem::path& path) {
  if (a.rows() != checked_order(s, n) || !a.is_square())
    throw InvalidArgument("binary dump: matrix order does not match s * prod(n)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(n.dims()));
  put_u32(out, static_cast<std::uint32_t>(s));
  for (int d = 0; d < n.dims(); ++d) put_u32(out, static_cast<std::uint32_t>(n[d]));
  static_assert(sizeof(cplx) == 16);
  out.write(reinterpret_cast<const char*>(a.entries().data()),
            static_cast<std::streamsize>(a.entries().size() * sizeof(cplx)));
}

MatrixDump read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw InvalidArgument("not a toepspec matrix dump");
  const auto k = get_u32(in);
  const auto s = get_u32(in);
  if (k < 1 || k > 3 || s < 1 || s > 8) throw InvalidArgument("corrupt matrix dump header");
  MultiIndex n(static_cast<int>(k), 1);
  for (int d = 0; d < static_cast<int>(k); ++d) n[d] = static_cast<int>(get_u32(in));
  const std::size_t order = checked_order(static_cast<int>(s), n);
  if (order > max_dense_order()) throw ResourceLimit("matrix dump exceeds the dense order cap");
  ComplexMatrix a(order, order);
  in.read(reinterpret_cast<char*>(a.entries().data()),
          static_cast<std::streamsize>(order * order * sizeof(cplx)));
  if (!in) throw InvalidArgument("truncated matrix dump");
  return {static_cast<int>(s), n, std::move(a)};
}

}  // namespace toepspec
