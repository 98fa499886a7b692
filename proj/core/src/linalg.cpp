#include "toepspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "toepspec/errors.hpp"

namespace toepspec {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_order(const ComplexMatrix& a, const char* what) {
  if (std::max(a.rows(), a.cols()) > max_dense_order())
    throw ResourceLimit(std::string(what) + ": order " +
                        std::to_string(std::max(a.rows(), a.cols())) +
                        " exceeds dense cap " + std::to_string(max_dense_order()));
}

/// Householder vector for x so that (I - 2 v v^*) x = beta e_1.
/// Returns false when x is already zero below its first entry.
bool householder(std::span<cplx> x, cplx& beta) {
  const double xnorm = norm2(x);
  if (xnorm == 0.0) {
    beta = 0.0;
    return false;
  }
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += std::norm(x[i]);
  if (tail == 0.0) {
    beta = x[0];
    return false;
  }
  const cplx phase = std::abs(x[0]) == 0.0 ? cplx{1.0} : x[0] / std::abs(x[0]);
  beta = -phase * xnorm;
  x[0] -= beta;
  const double vn = norm2(x);
  for (auto& z : x) z /= vn;
  return true;
}

struct Givens {
  double c;
  cplx s;
};

Givens make_givens(cplx f, cplx g) {
  const double af = std::abs(f), ag = std::abs(g);
  if (ag == 0.0) return {1.0, 0.0};
  if (af == 0.0) return {0.0, std::conj(g) / ag};
  const double nrm = std::hypot(af, ag);
  return {af / nrm, (f / af) * std::conj(g) / nrm};
}

void reduce_hessenberg(ComplexMatrix& h, ComplexMatrix* q) {
  const std::size_t n = h.rows();
  std::vector<cplx> v;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    v.resize(n - k - 1);
    for (std::size_t i = k + 1; i < n; ++i) v[i - k - 1] = h(i, k);
    cplx beta;
    if (!householder(v, beta)) continue;
    // H <- P H, rows k+1.., columns k..
    for (std::size_t j = k; j < n; ++j) {
      cplx s{};
      for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i - k - 1]) * h(i, j);
      s *= 2.0;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i - k - 1] * s;
    }
    // H <- H P, all rows, columns k+1..
    for (std::size_t i = 0; i < n; ++i) {
      cplx* hi = h.row(i).data();
      cplx s{};
      for (std::size_t j = k + 1; j < n; ++j) s += hi[j] * v[j - k - 1];
      s *= 2.0;
      for (std::size_t j = k + 1; j < n; ++j) hi[j] -= s * std::conj(v[j - k - 1]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    if (q) {
      for (std::size_t i = 0; i < n; ++i) {
        cplx* qi = q->row(i).data();
        cplx s{};
        for (std::size_t j = k + 1; j < n; ++j) s += qi[j] * v[j - k - 1];
        s *= 2.0;
        for (std::size_t j = k + 1; j < n; ++j) qi[j] -= s * std::conj(v[j - k - 1]);
      }
    }
  }
}

/// Single-shift complex QR on Hessenberg h. With z != nullptr the full Schur
/// form is produced and z accumulates the transformations.
bool hessenberg_qr(ComplexMatrix& h, ComplexMatrix* z, int max_sweeps) {
  const std::size_t n = h.rows();
  const bool full = z != nullptr;
  double hnorm = h.frobenius_norm();
  if (hnorm == 0.0) return true;
  const double tiny = std::numeric_limits<double>::min() / kEps;

  std::vector<Givens> rot;
  long ihi = static_cast<long>(n) - 1;
  int its = 0;
  while (ihi >= 0) {
    long l = ihi;
    for (; l > 0; --l) {
      const double sub = std::abs(h(l, l - 1));
      double ref = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (ref == 0.0) ref = hnorm;
      if (sub <= kEps * ref || sub < tiny) {
        h(l, l - 1) = 0.0;
        break;
      }
    }
    if (l == ihi) {
      --ihi;
      its = 0;
      continue;
    }
    if (++its > max_sweeps) return false;

    cplx mu;
    const cplx a = h(ihi - 1, ihi - 1), b = h(ihi - 1, ihi), c = h(ihi, ihi - 1),
               d = h(ihi, ihi);
    if (its % 10 == 0) {
      // exceptional shift
      mu = d + 0.75 * std::abs(c);
    } else {
      const cplx half = 0.5 * (a - d);
      const cplx disc = std::sqrt(half * half + b * c);
      const cplx e1 = 0.5 * (a + d) + disc;
      const cplx e2 = 0.5 * (a + d) - disc;
      mu = std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
    }

    const std::size_t lo = static_cast<std::size_t>(l), hi = static_cast<std::size_t>(ihi);
    const std::size_t col_end = full ? n - 1 : hi;
    const std::size_t row_begin = full ? 0 : lo;
    for (std::size_t j = lo; j <= hi; ++j) h(j, j) -= mu;
    rot.resize(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) {
      const Givens g = make_givens(h(j, j), h(j + 1, j));
      rot[j - lo] = g;
      for (std::size_t col = j; col <= col_end; ++col) {
        const cplx x = h(j, col), y = h(j + 1, col);
        h(j, col) = g.c * x + g.s * y;
        h(j + 1, col) = -std::conj(g.s) * x + g.c * y;
      }
      h(j + 1, j) = 0.0;
    }
    for (std::size_t j = lo; j < hi; ++j) {
      const Givens g = rot[j - lo];
      const std::size_t row_end = std::min(j + 1, hi);
      for (std::size_t r = row_begin; r <= row_end; ++r) {
        const cplx x = h(r, j), y = h(r, j + 1);
        h(r, j) = x * g.c + y * std::conj(g.s);
        h(r, j + 1) = -x * g.s + y * g.c;
      }
      if (z) {
        for (std::size_t r = 0; r < n; ++r) {
          const cplx x = (*z)(r, j), y = (*z)(r, j + 1);
          (*z)(r, j) = x * g.c + y * std::conj(g.s);
          (*z)(r, j + 1) = -x * g.s + y * g.c;
        }
      }
    }
    for (std::size_t j = lo; j <= hi; ++j) h(j, j) += mu;
  }
  return true;
}

ComplexMatrix schur_eigenvectors(const ComplexMatrix& t, const ComplexMatrix& z) {
  const std::size_t n = t.rows();
  const double small = kEps * std::max(t.frobenius_norm(), 1e-300);
  ComplexMatrix y(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx lam = t(k, k);
    y(k, k) = 1.0;
    for (std::size_t ii = k; ii-- > 0;) {
      cplx s{};
      for (std::size_t j = ii + 1; j <= k; ++j) s += t(ii, j) * y(j, k);
      cplx den = t(ii, ii) - lam;
      if (std::abs(den) < small) den = small;
      y(ii, k) = -s / den;
    }
  }
  ComplexMatrix v = z * y;
  for (std::size_t k = 0; k < n; ++k) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(v(i, k));
    nrm = std::sqrt(nrm);
    if (nrm > 0)
      for (std::size_t i = 0; i < n; ++i) v(i, k) /= nrm;
  }
  return v;
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL, values only).
std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e) {
  const std::size_t n = d.size();
  e.resize(n, 0.0);
  double tnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) tnorm = std::max(tnorm, std::abs(d[i]) + 2 * std::abs(e[i]));
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd || std::abs(e[m]) <= kEps * tnorm) break;
      }
      if (m != l) {
        if (++iter > 60) throw NumericFailure("tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool early = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (early) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  return d;
}

}  // namespace

EigenResult eig_dense_partial(const ComplexMatrix& a, bool want_vectors, const Tolerances& tol) {
  if (!a.is_square()) throw InvalidArgument("eig_dense needs a square matrix");
  check_order(a, "eig_dense");
  if (!a.all_finite()) throw InvalidArgument("eig_dense: non-finite entries");
  const std::size_t n = a.rows();
  ComplexMatrix h = a;
  std::optional<ComplexMatrix> z;
  if (want_vectors) z = ComplexMatrix::identity(n);
  reduce_hessenberg(h, z ? &*z : nullptr);
  EigenResult res;
  res.converged = hessenberg_qr(h, z ? &*z : nullptr, tol.max_qr_sweeps);
  res.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.eigenvalues[i] = h(i, i);
  if (want_vectors && res.converged) {
    ComplexMatrix v = schur_eigenvectors(h, *z);
    res.residuals.resize(n);
    CVector col(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) col[i] = v(i, k);
      CVector av = a * std::span<const cplx>(col);
      for (std::size_t i = 0; i < n; ++i) av[i] -= res.eigenvalues[k] * col[i];
      res.residuals[k] = norm2(av);
    }
    res.vectors = std::move(v);
  }
  return res;
}

EigenResult eig_dense(const ComplexMatrix& a, bool want_vectors, const Tolerances& tol) {
  EigenResult r = eig_dense_partial(a, want_vectors, tol);
  if (!r.converged)
    throw NumericFailure("eig_dense: QR iteration exceeded " +
                         std::to_string(tol.max_qr_sweeps) + " sweeps for one eigenvalue");
  return r;
}

SingularResult svd_values(const ComplexMatrix& input) {
  check_order(input, "svd_values");
  if (!input.all_finite()) throw InvalidArgument("svd_values: non-finite entries");
  ComplexMatrix a = input.rows() >= input.cols() ? input : input.adjoint();
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> d(n, 0.0), e(n > 0 ? n - 1 : 0, 0.0);
  std::vector<cplx> v;
  for (std::size_t k = 0; k < n; ++k) {
    // left reflector on column k, rows k..m-1
    v.resize(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
    cplx beta;
    if (householder(v, beta)) {
      for (std::size_t j = k + 1; j < n; ++j) {
        cplx s{};
        for (std::size_t i = k; i < m; ++i) s += std::conj(v[i - k]) * a(i, j);
        s *= 2.0;
        for (std::size_t i = k; i < m; ++i) a(i, j) -= v[i - k] * s;
      }
    }
    d[k] = std::abs(beta);
    if (k + 1 >= n) break;
    // right reflector on row k, columns k+1..n-1 (conjugated row)
    v.resize(n - k - 1);
    for (std::size_t j = k + 1; j < n; ++j) v[j - k - 1] = std::conj(a(k, j));
    if (householder(v, beta)) {
      for (std::size_t i = k + 1; i < m; ++i) {
        cplx* ai = a.row(i).data();
        cplx s{};
        for (std::size_t j = k + 1; j < n; ++j) s += ai[j] * v[j - k - 1];
        s *= 2.0;
        for (std::size_t j = k + 1; j < n; ++j) ai[j] -= s * std::conj(v[j - k - 1]);
      }
    }
    e[k] = std::abs(beta);
  }
  // Golub-Kahan form: zero diagonal, off-diagonal d1 e1 d2 e2 ... dn
  std::vector<double> gd(2 * n, 0.0), ge(2 * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    ge[2 * k] = d[k];
    if (k + 1 < n) ge[2 * k + 1] = e[k];
  }
  ge[2 * n - 1] = 0.0;
  std::vector<double> ev = tridiagonal_eigenvalues(std::move(gd), std::move(ge));
  std::sort(ev.begin(), ev.end(), std::greater<>());
  SingularResult res;
  res.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.values[i] = std::abs(ev[i]);
  std::sort(res.values.begin(), res.values.end(), std::greater<>());
  return res;
}

double schatten_norm(const ComplexMatrix& a, SchattenP p) {
  if (!a.is_square()) throw InvalidArgument("schatten_norm needs a square matrix");
  if (p == SchattenP::two) return a.frobenius_norm();
  const auto s = svd_values(a).values;
  if (p == SchattenP::infinity) return s.empty() ? 0.0 : s.front();
  double sum = 0.0;
  for (double x : s) sum += x;
  return sum;
}

std::size_t numerical_rank(const ComplexMatrix& a, double threshold_rel) {
  if (!(threshold_rel > 0.0 && threshold_rel < 1.0))
    throw InvalidArgument("numerical_rank threshold must lie in (0,1)");
  const auto s = svd_values(a).values;
  if (s.empty() || s.front() == 0.0) return 0;
  const double cut = threshold_rel * s.front();
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [cut](double x) { return x > cut; }));
}

HermitianEigen hermitian_eig(const ComplexMatrix& input) {
  if (!input.is_square()) throw InvalidArgument("hermitian_eig needs a square matrix");
  const std::size_t n = input.rows();
  ComplexMatrix a = input;
  // symmetrize to remove roundoff asymmetry
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
  ComplexMatrix vec = ComplexMatrix::identity(n);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += std::norm(a(i, i));
      for (std::size_t j = i + 1; j < n; ++j) off += std::norm(a(i, j));
    }
    if (off <= kEps * kEps * std::max(diag, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq_abs = std::abs(a(p, q));
        if (apq_abs == 0.0) continue;
        const cplx phase = a(p, q) / apq_abs;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * apq_abs);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = D R with D = diag(1, conj(phase)) on (p,q)
        const cplx jpp = c, jpq = s, jqp = -s * std::conj(phase), jqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // A <- A J
          const cplx x = a(k, p), y = a(k, q);
          a(k, p) = x * jpp + y * jqp;
          a(k, q) = x * jpq + y * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- J^* A
          const cplx x = a(p, k), y = a(q, k);
          a(p, k) = std::conj(jpp) * x + std::conj(jqp) * y;
          a(q, k) = std::conj(jpq) * x + std::conj(jqq) * y;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const cplx x = vec(k, p), y = vec(k, q);
          vec(k, p) = x * jpp + y * jqp;
          vec(k, q) = x * jpq + y * jqq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = vec(r, order[c]);
  }
  return out;
}

double min_hermitian_part_eigenvalue(const ComplexMatrix& m) {
  if (!m.is_square()) throw InvalidArgument("Hermitian part needs a square matrix");
  if (m.rows() == 1) return m(0, 0).real();
  if (m.rows() == 2) {
    const double a = m(0, 0).real(), c = m(1, 1).real();
    const cplx b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
    return 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + std::norm(b));
  }
  ComplexMatrix h = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return hermitian_eig(h).values.front();
}

LuFactor::LuFactor(ComplexMatrix a) : lu_(std::move(a)) {
  if (!lu_.is_square()) throw InvalidArgument("LU needs a square matrix");
  check_order(lu_, "lu_factor");
  const std::size_t n = lu_.rows();
  piv_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0)
      throw SingularMatrix("LU: exactly singular pivot in column " + std::to_string(k));
    piv_[k] = p;
    if (p != k) std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
    const cplx pivot = lu_(k, k);
    const cplx* rk = lu_.row(k).data();
    for (std::size_t i = k + 1; i < n; ++i) {
      cplx* ri = lu_.row(i).data();
      const cplx l = ri[k] / pivot;
      ri[k] = l;
      if (l == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
    }
  }
}

CVector LuFactor::solve(std::span<const cplx> b) const {
  const std::size_t n = order();
  if (b.size() != n) throw InvalidArgument("LU solve: length mismatch");
  CVector x(b.begin(), b.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* ri = lu_.row(i).data();
    cplx s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= ri[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    const cplx* ri = lu_.row(i).data();
    cplx s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= ri[j] * x[j];
    x[i] = s / ri[i];
  }
  return x;
}

ComplexMatrix LuFactor::solve(const ComplexMatrix& b) const {
  const std::size_t n = order();
  if (b.rows() != n) throw InvalidArgument("LU solve: row mismatch");
  // Operate on all right-hand sides at once, row by row, for cache locality.
  ComplexMatrix x = b;
  const std::size_t m = b.cols();
  for (std::size_t k = 0; k < n; ++k)
    if (piv_[k] != k) std::swap_ranges(x.row(k).begin(), x.row(k).end(), x.row(piv_[k]).begin());
  for (std::size_t i = 0; i < n; ++i) {
    cplx* xi = x.row(i).data();
    for (std::size_t j = 0; j < i; ++j) {
      const cplx l = lu_(i, j);
      if (l == cplx{}) continue;
      const cplx* xj = x.row(j).data();
      for (std::size_t c = 0; c < m; ++c) xi[c] -= l * xj[c];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    cplx* xi = x.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx u = lu_(i, j);
      if (u == cplx{}) continue;
      const cplx* xj = x.row(j).data();
      for (std::size_t c = 0; c < m; ++c) xi[c] -= u * xj[c];
    }
    const cplx inv = 1.0 / lu_(i, i);
    for (std::size_t c = 0; c < m; ++c) xi[c] *= inv;
  }
  return x;
}

BandedLuFactor::BandedLuFactor(const ComplexMatrix& a, std::size_t lower, std::size_t upper)
    : n_(a.rows()), kl_(lower), ku_(upper), width_(2 * lower + upper + 1) {
  if (!a.is_square()) throw InvalidArgument("banded LU needs a square matrix");
  const auto [bl, bu] = detect_bandwidth(a);
  if (bl > lower || bu > upper)
    throw InvalidArgument("banded LU: declared bandwidth does not bound the nonzeros");
  band_.assign(n_ * width_, cplx{});
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    for (std::size_t j = j0; j <= j1; ++j) at(i, j) = a(i, j);
  }
  piv_.resize(n_);
  const std::size_t uext = ku_ + kl_;
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t last_row = std::min(n_ - 1, k + kl_);
    const std::size_t last_col = std::min(n_ - 1, k + uext);
    std::size_t p = k;
    double best = std::abs(at(k, k));
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const double v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0)
      throw SingularMatrix("banded LU: exactly singular pivot in column " + std::to_string(k));
    piv_[k] = p;
    if (p != k)
      for (std::size_t j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
    const cplx pivot = at(k, k);
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const cplx l = at(i, k) / pivot;
      at(i, k) = l;
      if (l == cplx{}) continue;
      for (std::size_t j = k + 1; j <= last_col; ++j) at(i, j) -= l * at(k, j);
    }
  }
}

CVector BandedLuFactor::solve(std::span<const cplx> b) const {
  if (b.size() != n_) throw InvalidArgument("banded LU solve: length mismatch");
  CVector x(b.begin(), b.end());
  // forward: L has unit diagonal, multipliers below pivot rows
  for (std::size_t k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
    const std::size_t last_row = std::min(n_ - 1, k + kl_);
    for (std::size_t i = k + 1; i <= last_row; ++i) x[i] -= at(i, k) * x[k];
  }
  const std::size_t uext = ku_ + kl_;
  for (std::size_t i = n_; i-- > 0;) {
    cplx s = x[i];
    const std::size_t last_col = std::min(n_ - 1, i + uext);
    for (std::size_t j = i + 1; j <= last_col; ++j) s -= at(i, j) * x[j];
    x[i] = s / at(i, i);
  }
  return x;
}

std::pair<std::size_t, std::size_t> detect_bandwidth(const ComplexMatrix& a) {
  std::size_t lo = 0, up = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) == cplx{}) continue;
      if (i > j) lo = std::max(lo, i - j);
      else up = std::max(up, j - i);
    }
  return {lo, up};
}

}  // namespace toepspec
