#include "toepspec/krylov.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>


namespace toepspec {

namespace {

// Rotation [c s; -conj(s) c] mapping (a, b) to (rho, 0).
struct Givens {
  double c = 1.0;
  cplx s = 0.0;

  static Givens make(cplx a, cplx b) {
    const double aa = std::abs(a), bb = std::abs(b);
    if (bb == 0.0) return {1.0, 0.0};
    if (aa == 0.0) return {0.0, std::conj(b) / bb};
    const double r = std::hypot(aa, bb);
    return {aa / r, (a / aa) * std::conj(b) / r};
  }
  void apply(cplx& x, cplx& y) const {
    const cplx t = c * x + s * y;
    y = -std::conj(s) * x + c * y;
    x = t;
  }
};

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

// y = R^{-1} g for the leading m x m upper-triangular block of h (column-major by step).
CVector back_substitute(const std::vector<CVector>& h, const CVector& g, std::size_t m) {
  CVector y(m);
  for (std::size_t i = m; i-- > 0;) {
    cplx acc = g[i];
    for (std::size_t j = i + 1; j < m; ++j) acc -= h[j][i] * y[j];
    if (h[i][i] == 0.0) throw SingularMatrix("GMRES least-squares factor is singular");
    y[i] = acc / h[i][i];
  }
  return y;
}

CVector combine(const std::vector<CVector>& v, const CVector& y, std::size_t order) {
  CVector x(order, 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) axpy(y[j], v[j], x);
  return x;
}

double true_relres(const LinearOperator& a, std::span<const cplx> b, const CVector& x, double bnorm) {
  CVector r = a(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r) / bnorm;
}

}  // namespace

GmresResult gmres(const LinearOperator& a, std::span<const cplx> b, const GmresOptions& opts,
                  const PrecondFactor* precond) {
  const std::size_t order = b.size();
  if (order == 0) throw InvalidArgument("gmres: empty right-hand side");
  const std::size_t max_iter = opts.max_iter == 0 ? order : opts.max_iter;
  if (max_iter > order) throw InvalidArgument("gmres: max_iter exceeds the system order");
  if (!(opts.tol > 0.0)) throw InvalidArgument("gmres: tol must be positive");
  if (precond && precond->order() != order) throw InvalidArgument("gmres: preconditioner order mismatch");

  const auto start = std::chrono::steady_clock::now();
  auto op = [&](std::span<const cplx> v) {
    CVector w = a(v);
    if (w.size() != order) throw InvalidArgument("gmres: operator returned a vector of the wrong length");
    return precond ? precond->apply(w) : w;
  };

  const double bnorm = norm2(b);
  if (bnorm == 0.0) throw InvalidArgument("gmres: right-hand side is zero");
  CVector r0 = precond ? precond->apply(b) : CVector(b.begin(), b.end());
  const double beta = norm2(r0);

  GmresResult out;
  auto& rep = out.report;
  rep.config.tol = opts.tol;
  rep.config.preconditioned = precond != nullptr;
  rep.config.true_residual = opts.true_residual;

  std::vector<CVector> v;  // Krylov basis
  std::vector<CVector> h;  // h[j]: column j of the Hessenberg matrix, rotated in place
  std::vector<Givens> rot;
  CVector g{beta};
  v.reserve(max_iter + 1);
  for (auto& z : r0) z /= beta;
  v.push_back(std::move(r0));

  auto finish = [&](std::size_t m) {
    out.x = combine(v, back_substitute(h, g, m), order);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  for (std::size_t j = 0; j < max_iter; ++j) {
    CVector w = op(v[j]);
    const double wnorm = norm2(w);
    CVector col(j + 2, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= j; ++i) {
        const cplx c = dot(v[i], w);
        col[i] += c;
        axpy(-c, v[i], w);
      }
    }
    const double hn = norm2(w);
    col[j + 1] = hn;
    for (std::size_t i = 0; i < j; ++i) rot[i].apply(col[i], col[i + 1]);
    rot.push_back(Givens::make(col[j], col[j + 1]));
    rot[j].apply(col[j], col[j + 1]);
    col[j + 1] = 0.0;
    g.push_back(0.0);
    rot[j].apply(g[j], g[j + 1]);
    // zero diagonal: step j cannot reduce the residual
    const bool rank_deficient = col[j] == 0.0;
    h.push_back(std::move(col));

    double relres = (rank_deficient ? std::hypot(std::abs(g[j]), std::abs(g[j + 1])) : std::abs(g[j + 1])) / beta;
    if (opts.true_residual && !rank_deficient) {
      CVector x = combine(v, back_substitute(h, g, j + 1), order);
      relres = true_relres(a, b, x, bnorm);
    }
    rep.history.push_back(relres);
    rep.iterations = j + 1;

    const bool lost = hn <= opts.breakdown * wnorm;
    if (relres <= opts.tol && !rank_deficient) {
      rep.converged = true;
      finish(j + 1);
      return out;
    }
    if (lost || rank_deficient) {
      finish(h[j][j] == 0.0 ? j : j + 1);  // partial solution from the nonsingular leading block
      char msg[160];
      std::snprintf(msg, sizeof msg, "GMRES stagnated at step %zu: Arnoldi norm %.3g, residual %.3g",
                    j + 1, hn, relres);
      throw GmresStagnation(msg, rep);
    }
    for (auto& z : w) z /= hn;
    v.push_back(std::move(w));
  }
  finish(rep.iterations);
  return out;
}

CVector random_rhs(std::size_t order, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector b(order);
  for (auto& z : b) z = normal(rng);
  return b;
}

GmresResult solve_system(const MatrixSymbol& f, const std::optional<MatrixSymbol>& g,
                         const MultiIndex& n, std::uint64_t seed, const GmresOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t order = static_cast<std::size_t>(f.block_size()) * n.product();
  const auto t = order <= max_dense_order() ? ToeplitzOperator::dense(f, n)
                                            : ToeplitzOperator::embedded(f, n);
  std::optional<PrecondFactor> m;
  if (g) m = factor_preconditioner(*g, n);
  const CVector b = random_rhs(order, seed);
  auto apply = [&t](std::span<const cplx> v) { return t.apply(v); };

  auto stamp = [&](SolveReport& rep) {
    rep.seed = seed;
    rep.config.n = n;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    GmresResult res = gmres(apply, b, opts, m ? &*m : nullptr);
    stamp(res.report);
    return res;
  } catch (const GmresStagnation& e) {
    SolveReport rep = e.report();
    stamp(rep);
    throw GmresStagnation(e.what(), std::move(rep));
  }
}

SolveReport run_case(int case_id, std::optional<double> r, const MultiIndex& n, bool preconditioned,
                     std::uint64_t seed, const GmresOptions& opts, CatalogWindow window) {
  const CatalogCase c = catalog(case_id, r, window);
  if (n.dims() != c.f.dims())
    throw InvalidArgument("case " + std::to_string(case_id) + " needs a " +
                          std::to_string(c.f.dims()) + "-level size, got " + n.to_string());
  auto fill = [&](SolveReport& rep) {
    rep.config.case_id = case_id;
    rep.config.r = c.r;
    rep.config.window = window;
  };
  try {
    SolveReport rep = solve_system(c.f, preconditioned ? std::optional(c.g) : std::nullopt, n, seed, opts).report;
    fill(rep);
    return rep;
  } catch (const GmresStagnation& e) {
    SolveReport rep = e.report();
    fill(rep);
    throw GmresStagnation(e.what(), std::move(rep));
  }
}

std::string to_json(const SolveReport& rep, int indent) {
  nlohmann::json cfg = {
      {"n", std::vector<int>(rep.config.n.begin(), rep.config.n.end())},
      {"case", rep.config.case_id},
      {"r", rep.config.r ? nlohmann::json(*rep.config.r) : nlohmann::json(nullptr)},
      {"window", to_string(rep.config.window)},
      {"tol", rep.config.tol},
      {"preconditioned", rep.config.preconditioned},
      {"true_residual", rep.config.true_residual},
  };
  nlohmann::json j = {
      {"iterations", rep.iterations}, {"converged", rep.converged}, {"seed", rep.seed},
      {"wall_seconds", rep.wall_seconds}, {"history", rep.history}, {"config", cfg},
  };
  return j.dump(indent);
}

void write_residual_csv(const SolveReport& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << "iter,relres\n";
  char buf[64];
  for (std::size_t i = 0; i < rep.history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, rep.history[i]);
    out << buf;
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace toepspec
