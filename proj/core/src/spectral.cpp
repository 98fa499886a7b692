#include "toepspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "toepspec/errors.hpp"
#include "toepspec/linalg.hpp"
#include "toepspec/toeplitz.hpp"

namespace toepspec {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

void check_range_grid(const MatrixSymbol& sym, const QuadratureGrid& grid) {
  if (grid.sizes.size() != static_cast<std::size_t>(sym.dims()))
    throw InvalidArgument("sampling grid dimension does not match the symbol");
  for (int n : grid.sizes)
    if (n < 64) throw InvalidArgument("range sampling needs at least 64 nodes per dimension");
}

/// Eigenvalues of a small matrix; closed form for s <= 2.
std::optional<CVector> small_eigenvalues(const ComplexMatrix& m) {
  if (m.rows() == 1) return CVector{m(0, 0)};
  if (m.rows() == 2) {
    const cplx half_tr = 0.5 * (m(0, 0) + m(1, 1));
    const cplx disc = std::sqrt(0.25 * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(1, 0));
    return CVector{half_tr + disc, half_tr - disc};
  }
  auto r = eig_dense_partial(m);
  if (!r.converged) return std::nullopt;
  return r.eigenvalues;
}

/// Hermitian pair (A, B) per sample with M = A + iB, so that
/// H(e^{-i theta} M) = cos(theta) A + sin(theta) B.
class SupportEngine {
public:
  explicit SupportEngine(int s) : s_(static_cast<std::size_t>(s)) {}

  std::size_t size() const { return count_; }
  std::size_t block() const { return s_; }

  void add(const ComplexMatrix& m) {
    for (std::size_t p = 0; p < s_; ++p)
      for (std::size_t q = 0; q < s_; ++q) {
        const cplx x = m(p, q), y = std::conj(m(q, p));
        a_.push_back(0.5 * (x + y));
        b_.push_back((x - y) / cplx(0.0, 2.0));
      }
    ++count_;
  }

  /// Appends A = a, B = b directly (both Hermitian, flat s*s).
  void add_pair(const cplx* a, const cplx* b) {
    a_.insert(a_.end(), a, a + s_ * s_);
    b_.insert(b_.end(), b, b + s_ * s_);
    ++count_;
  }

  double lambda_min(std::size_t x, double c, double sn) const {
    const cplx* a = &a_[x * s_ * s_];
    const cplx* b = &b_[x * s_ * s_];
    if (s_ == 1) return c * a[0].real() + sn * b[0].real();
    if (s_ == 2) {
      const double h00 = c * a[0].real() + sn * b[0].real();
      const double h11 = c * a[3].real() + sn * b[3].real();
      const cplx h01 = c * a[1] + sn * b[1];
      const double half_diff = 0.5 * (h00 - h11);
      return 0.5 * (h00 + h11) - std::sqrt(half_diff * half_diff + std::norm(h01));
    }
    return hermitian_eig(rotated(x, c, sn)).values.front();
  }

  /// Minimum eigenvector of H(e^{-i theta} M_x).
  CVector min_vector(std::size_t x, double c, double sn) const {
    auto he = hermitian_eig(rotated(x, c, sn));
    CVector v(s_);
    for (std::size_t p = 0; p < s_; ++p) v[p] = he.vectors(p, 0);
    return v;
  }

  ComplexMatrix matrix(std::size_t x) const {
    ComplexMatrix m(s_, s_);
    for (std::size_t e = 0; e < s_ * s_; ++e)
      m.entries()[e] = a_[x * s_ * s_ + e] + cplx(0.0, 1.0) * b_[x * s_ * s_ + e];
    return m;
  }

  /// m(theta); stops early (returning a value below `bound`) once some sample
  /// falls below bound.
  double support(double theta, double bound = -inf, std::size_t* argmin = nullptr) const {
    const double c = std::cos(theta), sn = std::sin(theta);
    double best = inf;
    for (std::size_t x = 0; x < count_; ++x) {
      const double v = lambda_min(x, c, sn);
      if (v < best) {
        best = v;
        if (argmin) *argmin = x;
        if (best < bound) return best;
      }
    }
    return best;
  }

  double variance_at(double theta) const {
    const double c = std::cos(theta), sn = std::sin(theta);
    double mean = 0, sq = 0;
    for (std::size_t x = 0; x < count_; ++x) {
      const double v = lambda_min(x, c, sn);
      mean += v;
      sq += v * v;
    }
    const double n = static_cast<double>(count_);
    mean /= n;
    return std::max(0.0, sq / n - mean * mean);
  }

  struct Max {
    double value = -inf;
    double theta = 0.0;
  };

  /// Coarse scan with bound pruning, then golden-section refinement.
  Max maximize(int angle_count, double warm_theta = 0.0) const {
    Max best;
    const double step = two_pi / angle_count;
    const int warm = static_cast<int>(std::lround(warm_theta / step));
    for (int q = 0; q < angle_count; ++q) {
      const int a = ((warm + q) % angle_count + angle_count) % angle_count;
      const double th = step * a;
      const double v = support(th, best.value);
      if (v > best.value) best = {v, th};
    }
    double lo = best.theta - step, hi = best.theta + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = support(x1), f2 = support(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = support(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = support(x1);
      }
    }
    if (f1 > best.value) best = {f1, x1};
    if (f2 > best.value) best = {f2, x2};
    best.theta = std::fmod(std::fmod(best.theta, two_pi) + two_pi, two_pi);
    return best;
  }

private:
  ComplexMatrix rotated(std::size_t x, double c, double sn) const {
    ComplexMatrix h(s_, s_);
    for (std::size_t e = 0; e < s_ * s_; ++e)
      h.entries()[e] = c * a_[x * s_ * s_ + e] + sn * b_[x * s_ * s_ + e];
    return h;
  }

  std::size_t s_;
  std::size_t count_ = 0;
  std::vector<cplx> a_, b_;
};

struct Classification {
  Sectoriality kind;
  double variance;
};

Classification classify(const SupportEngine& engine, const SupportEngine::Max& best,
                        int angle_count, const Tolerances& tol) {
  if (best.value > tol.tol_d) return {Sectoriality::sectorial, engine.variance_at(best.theta)};
  if (best.value < -tol.tol_d) return {Sectoriality::not_weakly_sectorial, 0.0};
  // Degenerate: 0 on the hull boundary. Any maximizing angle may certify.
  double variance = engine.variance_at(best.theta);
  const double step = two_pi / angle_count;
  for (int a = 0; a < angle_count && variance <= tol.nondegeneracy_var; ++a) {
    const double th = step * a;
    if (engine.support(th, -tol.tol_d) >= -tol.tol_d) variance = std::max(variance, engine.variance_at(th));
  }
  return {variance > tol.nondegeneracy_var ? Sectoriality::sectorial : Sectoriality::weakly_sectorial,
          variance};
}

SupportEngine engine_for(const MatrixSymbol& sym, const QuadratureGrid& grid, std::size_t& skipped) {
  SupportEngine engine(sym.block_size());
  for (const auto& m : sample_on_grid(sym, grid)) {
    if (!m || !m->all_finite()) {
      ++skipped;
      continue;
    }
    engine.add(*m);
  }
  if (engine.size() == 0) throw DomainError("symbol is singular at every sample");
  return engine;
}

}  // namespace

std::string to_string(Sectoriality s) {
  switch (s) {
    case Sectoriality::sectorial: return "sectorial";
    case Sectoriality::weakly_sectorial: return "weakly-sectorial";
    case Sectoriality::not_weakly_sectorial: return "not-weakly-sectorial";
  }
  return "unknown";
}

QuadratureGrid default_range_grid(int k, const Tolerances& tol) {
  const int n = k == 1 ? tol.range_grid_1d : k == 2 ? tol.range_grid_2d : tol.range_grid_3d;
  return QuadratureGrid{std::vector<int>(static_cast<std::size_t>(k), std::max(n, 64)), false};
}

RangeCloud essential_range(const MatrixSymbol& sym, const QuadratureGrid& grid) {
  check_range_grid(sym, grid);
  RangeCloud cloud;
  cloud.source = RangeSource::essential_range;
  cloud.grid = grid;
  const auto samples = sample_on_grid(sym, grid);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (!samples[t] || !samples[t]->all_finite()) {
      ++cloud.skipped;
      continue;
    }
    auto ev = small_eigenvalues(*samples[t]);
    if (!ev) {
      ++cloud.skipped;
      continue;
    }
    for (std::size_t i = 0; i < ev->size(); ++i) {
      cloud.points.push_back((*ev)[i]);
      cloud.sample.push_back(t);
      cloud.tag.push_back(static_cast<int>(i));
    }
  }
  return cloud;
}

NumericalRange essential_numerical_range(const MatrixSymbol& sym, const QuadratureGrid& grid,
                                         int angle_count) {
  check_range_grid(sym, grid);
  if (angle_count < 90) throw InvalidArgument("angle_count must be >= 90");
  NumericalRange out;
  std::size_t skipped = 0;
  auto engine = engine_for(sym, grid, skipped);
  // map engine index -> grid node
  std::vector<std::size_t> node;
  {
    const auto samples = sample_on_grid(sym, grid);
    for (std::size_t t = 0; t < samples.size(); ++t)
      if (samples[t] && samples[t]->all_finite()) node.push_back(t);
  }
  out.cloud.source = RangeSource::essential_numerical_range;
  out.cloud.grid = grid;
  out.cloud.skipped = skipped;
  for (int a = 0; a < angle_count; ++a) {
    const double th = two_pi * a / angle_count;
    std::size_t arg = 0;
    out.angles.push_back(th);
    out.support.push_back(engine.support(th, -inf, &arg));
    if (sym.block_size() > 1) {
      const auto v = engine.min_vector(arg, std::cos(th), std::sin(th));
      const auto mv = engine.matrix(arg) * std::span<const cplx>(v);
      out.cloud.points.push_back(dot(v, mv));
      out.cloud.sample.push_back(node[arg]);
      out.cloud.tag.push_back(a);
    }
  }
  if (sym.block_size() == 1) {
    auto er = essential_range(sym, grid);
    out.cloud.points = std::move(er.points);
    out.cloud.sample = std::move(er.sample);
    out.cloud.tag.assign(out.cloud.points.size(), -1);
  }
  return out;
}

bool support_contains(const NumericalRange& enr, cplx z, double tol) {
  for (std::size_t a = 0; a < enr.angles.size(); ++a) {
    const double proj = std::real(std::polar(1.0, -enr.angles[a]) * z);
    if (proj < enr.support[a] - tol) return false;
  }
  return true;
}

SectorReport sectoriality(const MatrixSymbol& sym, const QuadratureGrid& grid, int angle_count,
                          const Tolerances& tol) {
  check_range_grid(sym, grid);
  if (angle_count < 90) throw InvalidArgument("angle_count must be >= 90");
  SectorReport rep;
  auto engine = engine_for(sym, grid, rep.skipped);
  const auto best = engine.maximize(angle_count);
  const auto cls = classify(engine, best, angle_count, tol);
  rep.classification = cls.kind;
  rep.max_support = best.value;
  rep.d = std::max(0.0, best.value);
  rep.best_angle = best.theta;
  rep.witness_variance = cls.variance;
  rep.zero_in_hull = best.value <= tol.tol_d;
  return rep;
}

Rect bounding_rect(std::span<const cplx> points, double padding, double min_half_width) {
  if (points.empty()) throw InvalidArgument("bounding_rect of an empty point set");
  Rect r{inf, -inf, inf, -inf};
  for (auto z : points) {
    r.re_min = std::min(r.re_min, z.real());
    r.re_max = std::max(r.re_max, z.real());
    r.im_min = std::min(r.im_min, z.imag());
    r.im_max = std::max(r.im_max, z.imag());
  }
  const double side = std::max(r.re_max - r.re_min, r.im_max - r.im_min);
  const double pad = std::max(padding * side, min_half_width);
  r.re_min -= pad;
  r.re_max += pad;
  r.im_min -= pad;
  r.im_max += pad;
  return r;
}

cplx RegionMask::center(std::size_t row, std::size_t col) const {
  return {rect.re_min + (static_cast<double>(col) + 0.5) * pixel_width(),
          rect.im_max - (static_cast<double>(row) + 0.5) * pixel_height()};
}

std::optional<std::pair<std::size_t, std::size_t>> RegionMask::pixel_of(cplx z) const {
  const double c = (z.real() - rect.re_min) / pixel_width();
  const double r = (rect.im_max - z.imag()) / pixel_height();
  if (!(c >= 0 && r >= 0 && c <= static_cast<double>(width) && r <= static_cast<double>(height)))
    return std::nullopt;
  return std::pair{std::min(static_cast<std::size_t>(r), height - 1),
                   std::min(static_cast<std::size_t>(c), width - 1)};
}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

RegionMask localization_region(const MatrixSymbol& f, const MatrixSymbol& g, const Rect& rect,
                               std::size_t resolution, const QuadratureGrid& grid, int angle_count,
                               const Tolerances& tol) {
  if (f.dims() != g.dims() || f.block_size() != g.block_size())
    throw InvalidArgument("f and g must agree in k and s");
  if (resolution < 2) throw InvalidArgument("resolution must be >= 2");
  if (angle_count < 8) throw InvalidArgument("angle_count must be >= 8");
  const auto grep = sectoriality(g, grid, std::max(angle_count, 90), tol);
  if (grep.classification != Sectoriality::sectorial)
    throw PreconditionViolated("localization needs a sectorial g; g is " +
                               to_string(grep.classification));

  // Per node: Hermitian/skew parts of f and g.
  const auto fs = sample_on_grid(f, grid);
  const auto gs = sample_on_grid(g, grid);
  const auto s = static_cast<std::size_t>(f.block_size());
  SupportEngine fe(f.block_size()), ge(f.block_size());
  for (std::size_t t = 0; t < fs.size(); ++t) {
    if (!fs[t] || !gs[t] || !fs[t]->all_finite() || !gs[t]->all_finite()) continue;
    fe.add(*fs[t]);
    ge.add(*gs[t]);
  }
  if (fe.size() == 0) throw DomainError("no regular sample nodes");
  // Reconstruct flat parts through matrix(): A = (M + M*)/2, B = (M - M*)/(2i).
  std::vector<cplx> hf, kf, hg, kg;
  for (std::size_t x = 0; x < fe.size(); ++x) {
    auto mf = fe.matrix(x), mg = ge.matrix(x);
    for (std::size_t p = 0; p < s; ++p)
      for (std::size_t q = 0; q < s; ++q) {
        hf.push_back(0.5 * (mf(p, q) + std::conj(mf(q, p))));
        kf.push_back((mf(p, q) - std::conj(mf(q, p))) / cplx(0.0, 2.0));
        hg.push_back(0.5 * (mg(p, q) + std::conj(mg(q, p))));
        kg.push_back((mg(p, q) - std::conj(mg(q, p))) / cplx(0.0, 2.0));
      }
  }

  RegionMask out;
  out.rect = rect;
  out.width = resolution;
  out.height = resolution;
  out.mask.assign(resolution * resolution, 0);

  auto work = [&](std::size_t row_begin, std::size_t row_end) {
    std::vector<cplx> a(s * s), b(s * s);
    double warm = 0.0;
    for (std::size_t row = row_begin; row < row_end; ++row)
      for (std::size_t col = 0; col < resolution; ++col) {
        const cplx lam = out.center(row, col);
        // f - lambda g with lambda = p + i q:
        //   H = Hf - p Hg + q Kg,  K = Kf - p Kg - q Hg
        SupportEngine e(f.block_size());
        for (std::size_t x = 0; x < fe.size(); ++x) {
          for (std::size_t idx = 0; idx < s * s; ++idx) {
            const std::size_t o = x * s * s + idx;
            a[idx] = hf[o] - lam.real() * hg[o] + lam.imag() * kg[o];
            b[idx] = kf[o] - lam.real() * kg[o] - lam.imag() * hg[o];
          }
          e.add_pair(a.data(), b.data());
        }
        const auto best = e.maximize(angle_count, warm);
        warm = best.theta;
        const auto cls = classify(e, best, angle_count, tol);
        out.mask[row * resolution + col] = cls.kind == Sectoriality::sectorial ? 1 : 0;
      }
  };

  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), resolution));
  if (threads == 1) {
    work(0, resolution);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (resolution + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk, hi = std::min(resolution, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

RegionMask area_of_compact(std::span<const cplx> points, std::size_t resolution, double eps,
                           std::optional<Rect> rect) {
  if (resolution < 32) throw InvalidArgument("area resolution must be >= 32");
  if (points.empty()) throw InvalidArgument("area of an empty point set");
  if (!(eps > 0)) throw InvalidArgument("dilation eps must be positive");
  RegionMask m;
  if (rect) {
    m.rect = *rect;
  } else {
    Rect r = bounding_rect(points, 0.1, 0.0);
    r.re_min -= 2 * eps;
    r.re_max += 2 * eps;
    r.im_min -= 2 * eps;
    r.im_max += 2 * eps;
    m.rect = r;
  }
  m.width = m.height = resolution;
  std::vector<std::uint8_t> solid(resolution * resolution, 0);
  const double pw = m.pixel_width(), ph = m.pixel_height();
  for (auto z : points) {
    if (auto px = m.pixel_of(z)) solid[px->first * resolution + px->second] = 1;
    const auto c0 = static_cast<long long>(std::floor((z.real() - eps - m.rect.re_min) / pw));
    const auto c1 = static_cast<long long>(std::floor((z.real() + eps - m.rect.re_min) / pw));
    const auto r0 = static_cast<long long>(std::floor((m.rect.im_max - z.imag() - eps) / ph));
    const auto r1 = static_cast<long long>(std::floor((m.rect.im_max - z.imag() + eps) / ph));
    const auto last = static_cast<long long>(resolution) - 1;
    for (long long r = std::max(0LL, r0); r <= std::min(last, r1); ++r)
      for (long long c = std::max(0LL, c0); c <= std::min(last, c1); ++c)
        if (std::abs(m.center(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) - z) <= eps)
          solid[static_cast<std::size_t>(r) * resolution + static_cast<std::size_t>(c)] = 1;
  }
  // Flood the unbounded component (4-connected) from the frame.
  std::vector<std::uint8_t> outside(resolution * resolution, 0);
  std::deque<std::size_t> queue;
  auto seed = [&](std::size_t idx) {
    if (!solid[idx] && !outside[idx]) {
      outside[idx] = 1;
      queue.push_back(idx);
    }
  };
  for (std::size_t i = 0; i < resolution; ++i) {
    seed(i);
    seed((resolution - 1) * resolution + i);
    seed(i * resolution);
    seed(i * resolution + resolution - 1);
  }
  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    const std::size_t r = idx / resolution, c = idx % resolution;
    if (r > 0) seed(idx - resolution);
    if (r + 1 < resolution) seed(idx + resolution);
    if (c > 0) seed(idx - 1);
    if (c + 1 < resolution) seed(idx + 1);
  }
  m.mask.resize(solid.size());
  for (std::size_t i = 0; i < solid.size(); ++i) m.mask[i] = outside[i] ? 0 : 1;
  return m;
}

std::size_t outlier_count(std::span<const cplx> eigenvalues, std::span<const cplx> cloud, double eps) {
  if (!(eps > 0)) throw InvalidArgument("outlier eps must be positive");
  if (cloud.empty()) return eigenvalues.size();
  auto cell = [eps](double v) { return static_cast<long long>(std::floor(v / eps)); };
  auto key = [](long long a, long long b) { return (a << 32) ^ (b & 0xffffffffLL); };
  std::unordered_map<long long, std::vector<cplx>> buckets;
  for (auto z : cloud) buckets[key(cell(z.real()), cell(z.imag()))].push_back(z);
  std::size_t count = 0;
  for (auto z : eigenvalues) {
    const long long cr = cell(z.real()), ci = cell(z.imag());
    bool near = false;
    for (long long dr = -1; dr <= 1 && !near; ++dr)
      for (long long di = -1; di <= 1 && !near; ++di) {
        auto it = buckets.find(key(cr + dr, ci + di));
        if (it == buckets.end()) continue;
        for (auto w : it->second)
          if (std::abs(w - z) <= eps) {
            near = true;
            break;
          }
      }
    if (!near) ++count;
  }
  return count;
}

MomentReport moment_test(const MatrixSymbol& f, const MatrixSymbol& g, const MultiIndex& n,
                         int n_max, const QuadratureGrid& quad_grid) {
  if (n_max < 0 || n_max > 8) throw InvalidArgument("moment order must be in 0..8");
  if (f.dims() != g.dims() || f.block_size() != g.block_size())
    throw InvalidArgument("f and g must agree in k and s");
  const auto order = static_cast<std::size_t>(n.product()) * static_cast<std::size_t>(f.block_size());
  if (order > 1024) throw ResourceLimit("moment test uses dense products; d_n must be <= 1024");
  if (quad_grid.sizes.size() != static_cast<std::size_t>(f.dims()))
    throw InvalidArgument("quadrature grid dimension does not match the symbols");

  MomentReport rep;
  rep.n_max = n_max;
  rep.trace_mean.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  rep.integral.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  rep.gap.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  rep.trace_mean[0] = 1.0;
  rep.integral[0] = 1.0;

  // Trace side: A = T_n(g)^{-1} T_n(f), column by column.
  const ComplexMatrix a = preconditioned_matrix(f, g, n);
  ComplexMatrix power = a;
  const double d = static_cast<double>(order);
  for (int p = 1; p <= n_max; ++p) {
    if (p > 1) power = power * a;
    rep.trace_mean[static_cast<std::size_t>(p)] = power.trace() / d;
  }

  // Integral side: mean over the grid of tr(h^N)/s, h = g^{-1} f.
  const auto fs = sample_on_grid(f, quad_grid);
  const auto gs = sample_on_grid(g, quad_grid);
  std::vector<cplx> sums(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::size_t used = 0;
  const double s = static_cast<double>(f.block_size());
  for (std::size_t t = 0; t < fs.size(); ++t) {
    if (!fs[t] || !gs[t]) continue;
    ComplexMatrix h;
    try {
      h = LuFactor(*gs[t]).solve(*fs[t]);
    } catch (const SingularMatrix&) {
      continue;
    }
    ++used;
    ComplexMatrix hp = h;
    for (int p = 1; p <= n_max; ++p) {
      if (p > 1) hp = hp * h;
      sums[static_cast<std::size_t>(p)] += hp.trace() / s;
    }
  }
  if (used == 0) throw DomainError("h = g^{-1} f is singular at every quadrature node");
  for (int p = 1; p <= n_max; ++p) {
    const auto q = static_cast<std::size_t>(p);
    rep.integral[q] = sums[q] / static_cast<double>(used);
    rep.gap[q] = std::abs(rep.trace_mean[q] - rep.integral[q]);
  }
  return rep;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& id) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("bad number '" + s + "' in test function '" + id + "'");
  }
}

double smoothstep(double u) {
  if (u <= 0) return 0;
  if (u >= 1) return 1;
  return u * u * (3 - 2 * u);
}

}  // namespace

cplx distribution_functional(std::span<const cplx> eigenvalues, const std::string& id) {
  if (eigenvalues.empty()) throw InvalidArgument("no eigenvalues");
  const auto parts = split(id, ':');
  std::function<cplx(cplx)> fn;
  if (id == "one") {
    fn = [](cplx) { return cplx(1.0); };
  } else if (parts.size() == 2 && parts[0] == "monomial") {
    const double nd = to_double(parts[1], id);
    const int n = static_cast<int>(nd);
    if (nd != n || n < 0 || n > 8) throw InvalidArgument("monomial degree must be an integer in 0..8");
    fn = [n](cplx z) { return std::pow(z, n); };
  } else if (parts.size() == 4 && (parts[0] == "re_window" || parts[0] == "im_window")) {
    const double a = to_double(parts[1], id), b = to_double(parts[2], id), w = to_double(parts[3], id);
    if (!(w > 0) || b < a) throw InvalidArgument("window needs a <= b and w > 0");
    const bool re = parts[0] == "re_window";
    fn = [=](cplx z) {
      const double t = re ? z.real() : z.imag();
      return cplx(smoothstep((t - a) / w + 0.5) * smoothstep((b - t) / w + 0.5));
    };
  } else if (parts.size() == 4 && parts[0] == "bump") {
    const cplx c(to_double(parts[1], id), to_double(parts[2], id));
    const double r = to_double(parts[3], id);
    if (!(r > 0)) throw InvalidArgument("bump radius must be positive");
    fn = [=](cplx z) {
      const double rho = std::abs(z - c) / r;
      return rho >= 1 ? cplx(0.0) : cplx(std::exp(1.0 - 1.0 / (1.0 - rho * rho)));
    };
  } else {
    throw InvalidArgument("unknown test function '" + id + "'");
  }
  cplx sum = 0;
  for (auto z : eigenvalues) sum += fn(z);
  return sum / static_cast<double>(eigenvalues.size());
}

void write_cloud_csv(const RangeCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  const char* src = cloud.source == RangeSource::essential_range ? "ER" : "ENR";
  out << "re,im,source\n";
  char buf[96];
  for (auto z : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", z.real(), z.imag(), src);
    out << buf;
  }
}

void write_mask_pgm(const RegionMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  for (auto v : mask.mask) out.put(static_cast<char>(v ? 255 : 0));
}

}  // namespace toepspec
