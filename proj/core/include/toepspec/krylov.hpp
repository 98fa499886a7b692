#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toepspec/catalog.hpp"
#include "toepspec/complex_matrix.hpp"
#include "toepspec/config.hpp"
#include "toepspec/errors.hpp"
#include "toepspec/multi_index.hpp"
#include "toepspec/symbol.hpp"
#include "toepspec/toeplitz.hpp"

namespace toepspec {

using LinearOperator = std::function<CVector(std::span<const cplx>)>;

struct GmresOptions {
  double tol = default_tolerances().gmres_tol;
  std::size_t max_iter = 0;  // 0: the system order
  /// Stop on ||b - A x_k|| / ||b|| instead of the preconditioned residual.
  bool true_residual = false;
  double breakdown = default_tolerances().arnoldi_breakdown;
};

/// Echo of the experiment that produced a report.
struct SolveConfig {
  MultiIndex n;
  int case_id = 0;  // 0 when the symbols did not come from the catalog
  std::optional<double> r;
  CatalogWindow window = CatalogWindow::symmetric;
  double tol = default_tolerances().gmres_tol;
  bool preconditioned = false;
  bool true_residual = false;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> history;  // history[k-1]: relative residual after step k
  bool converged = false;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  SolveConfig config;
};

/// Arnoldi lost dimension before the tolerance was met. Carries the partial report.
class GmresStagnation : public Stagnation {
public:
  GmresStagnation(const std::string& what, SolveReport report)
      : Stagnation(what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

private:
  SolveReport report_;
};

struct GmresResult {
  SolveReport report;
  CVector x;
};

/// Full GMRES from x0 = 0: modified Gram-Schmidt with one reorthogonalization
/// pass, Givens least squares, left preconditioning by `precond` when given.
/// The history holds the stopping quantity, so it is non-increasing unless
/// true_residual is set. max_iter reached returns converged = false.
GmresResult gmres(const LinearOperator& a, std::span<const cplx> b, const GmresOptions& opts = {},
                  const PrecondFactor* precond = nullptr);

/// Seeded right-hand side: real standard-normal entries from mt19937_64.
CVector random_rhs(std::size_t order, std::uint64_t seed);

/// Solve T_n(f) x = b for a seeded random b, left-preconditioned by T_n(g)
/// when g is given. Dense matvec up to max_dense_order(), FFT beyond.
GmresResult solve_system(const MatrixSymbol& f, const std::optional<MatrixSymbol>& g,
                         const MultiIndex& n, std::uint64_t seed, const GmresOptions& opts = {});

/// Catalog experiment: f and g from the case, config echo filled in.
SolveReport run_case(int case_id, std::optional<double> r, const MultiIndex& n, bool preconditioned,
                     std::uint64_t seed, const GmresOptions& opts = {},
                     CatalogWindow window = CatalogWindow::symmetric);

std::string to_json(const SolveReport& report, int indent = 2);
/// Header "iter,relres", one line per iteration, 17 significant digits.
void write_residual_csv(const SolveReport& report, const std::filesystem::path& path);

}  // namespace toepspec
