#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <toepspec/catalog.hpp>
#include <toepspec/dsl.hpp>
#include <toepspec/errors.hpp>
#include <toepspec/krylov.hpp>
#include <toepspec/linalg.hpp>
#include <toepspec/spectral.hpp>
#include <toepspec/symbol_io.hpp>
#include <toepspec/toeplitz.hpp>
#include <toepspec/version.hpp>

namespace toepspec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> directory_outputs = {"sector", "region", "area",    "outliers",
                                                    "moments", "solve", "case", "gap"};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string num(double v) { return fmt("%.17g", v); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid integer '" + s + "' in " + what);
  }
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + s + "' in " + what);
  }
}

/// ';' separates multi-indices; a comma list whose length is a multiple of k
/// is read as consecutive k-tuples.
std::vector<MultiIndex> expand_sizes(const std::string& text, int k) {
  if (trim(text).empty()) throw UsageError("--n is required");
  std::vector<MultiIndex> sizes;
  for (const auto& group : split(text, ';')) {
    std::vector<int> v;
    for (const auto& item : split(group, ',')) v.push_back(to_int(item, "--n"));
    if (v.empty() || v.size() % static_cast<std::size_t>(k) != 0)
      throw UsageError("--n '" + group + "' does not split into " + std::to_string(k) + "-level sizes");
    for (std::size_t i = 0; i < v.size(); i += static_cast<std::size_t>(k)) {
      MultiIndex n(std::span<const int>(v.data() + i, static_cast<std::size_t>(k)));
      for (int c : n)
        if (c < 1) throw UsageError("--n components must be positive");
      sizes.push_back(n);
    }
  }
  return sizes;
}

MultiIndex single_size(const std::string& text, int k) {
  auto sizes = expand_sizes(text, k);
  if (sizes.size() != 1) throw UsageError("this subcommand takes exactly one size in --n");
  return sizes.front();
}

std::string size_label(const MultiIndex& n) {
  std::string s;
  for (int c : n) s += (s.empty() ? "" : "x") + std::to_string(c);
  return s;
}

json size_json(const MultiIndex& n) { return std::vector<int>(n.begin(), n.end()); }

struct Symbols {
  MatrixSymbol f;
  std::optional<MatrixSymbol> g;
};

MatrixSymbol symbol_from(const std::string& path, const std::string& expr, const ExperimentConfig& cfg,
                         const std::string& name) {
  if (!path.empty()) return load_symbol_file(path);
  return dsl::compile_text(expr, cfg.k, cfg.s, cfg.params, name);
}

Symbols resolve_symbols(const ExperimentConfig& cfg) {
  const bool from_case = cfg.case_id.has_value();
  const bool f_file = !cfg.f_path.empty(), f_text = !cfg.f_expr.empty();
  if (int(from_case) + int(f_file) + int(f_text) != 1)
    throw UsageError("give exactly one of --id, --f, --f-expr");
  if (from_case) {
    if (!cfg.g_path.empty() || !cfg.g_expr.empty()) throw UsageError("--g/--g-expr cannot be combined with --id");
    auto c = catalog(*cfg.case_id, cfg.r, parse_catalog_window(cfg.window));
    return {c.f, c.g};
  }
  if (!cfg.g_path.empty() && !cfg.g_expr.empty()) throw UsageError("give at most one of --g, --g-expr");
  Symbols sym{symbol_from(cfg.f_path, cfg.f_expr, cfg, "f"), std::nullopt};
  if (!cfg.g_path.empty() || !cfg.g_expr.empty()) {
    sym.g = symbol_from(cfg.g_path, cfg.g_expr, cfg, "g");
    if (sym.g->dims() != sym.f.dims() || sym.g->block_size() != sym.f.block_size())
      throw UsageError("f and g must agree in k and s");
  }
  return sym;
}

const MatrixSymbol& require_g(const Symbols& sym) {
  if (!sym.g) throw UsageError("this subcommand needs a preconditioner symbol (--id, --g or --g-expr)");
  return *sym.g;
}

QuadratureGrid range_grid(const ExperimentConfig& cfg, int k) {
  if (cfg.range_grid == 0) return default_range_grid(k);
  return QuadratureGrid{std::vector<int>(static_cast<std::size_t>(k), cfg.range_grid), false};
}

std::optional<QuadratureGrid> coefficient_grid(const ExperimentConfig& cfg, const MatrixSymbol& f) {
  if (cfg.coef_grid == 0) return std::nullopt;
  return QuadratureGrid{std::vector<int>(static_cast<std::size_t>(f.dims()), cfg.coef_grid), !f.is_trig()};
}

QuadratureGrid moment_grid(const ExperimentConfig& cfg, int k) {
  const auto& tol = default_tolerances();
  const int fallback = k == 1 ? tol.coeff_grid_1d : k == 2 ? tol.coeff_grid_2d : tol.coeff_grid_3d;
  return QuadratureGrid{std::vector<int>(static_cast<std::size_t>(k), cfg.coef_grid ? cfg.coef_grid : fallback),
                        false};
}

ComplexMatrix system_matrix(const ExperimentConfig& cfg, const MatrixSymbol& f, const MultiIndex& n) {
  return ToeplitzOperator::dense(f, n, coefficient_grid(cfg, f)).matrix();
}

ComplexMatrix precond_matrix(const ExperimentConfig& cfg, const Symbols& sym, const MultiIndex& n) {
  if (cfg.coef_grid == 0) return preconditioned_matrix(sym.f, require_g(sym), n);
  const auto tf = system_matrix(cfg, sym.f, n);
  const auto pf = factor_preconditioner(require_g(sym), n);
  ComplexMatrix a(tf.rows(), tf.cols());
  CVector col(tf.rows());
  for (std::size_t j = 0; j < tf.cols(); ++j) {
    for (std::size_t i = 0; i < tf.rows(); ++i) col[i] = tf(i, j);
    const auto x = pf.apply(col);
    for (std::size_t i = 0; i < tf.rows(); ++i) a(i, j) = x[i];
  }
  return a;
}

bool wants_unprec(const std::string& p) { return p == "off" || p == "both"; }
bool wants_prec(const std::string& p) { return p == "on" || p == "both"; }

Rect parse_rect(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) throw UsageError("--rect needs re_min,re_max,im_min,im_max");
  Rect r{to_double(parts[0], "--rect"), to_double(parts[1], "--rect"), to_double(parts[2], "--rect"),
         to_double(parts[3], "--rect")};
  if (!(r.re_min < r.re_max && r.im_min < r.im_max)) throw UsageError("--rect must have min < max");
  return r;
}

json rect_json(const Rect& r) { return {r.re_min, r.re_max, r.im_min, r.im_max}; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void write_complex_csv(const fs::path& path, std::span<const cplx> values) {
  std::string text = "re,im\n";
  for (auto z : values) text += num(z.real()) + "," + num(z.imag()) + "\n";
  write_text(path, text);
}

struct Context {
  ExperimentConfig& cfg;
  std::ostream& out;
  json& results;
  std::vector<std::string>& artifacts;

  fs::path out_file() const {
    if (cfg.out.empty()) throw UsageError("--out is required for " + cfg.subcommand);
    const fs::path p(cfg.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }
  /// Directory artifacts land in; nullopt when --out is absent.
  std::optional<fs::path> out_dir() const {
    if (cfg.out.empty()) return std::nullopt;
    fs::create_directories(cfg.out);
    return fs::path(cfg.out);
  }
  void produced(const fs::path& p) { artifacts.push_back(p.string()); }
};

// ---- subcommands ---------------------------------------------------------------------

void cmd_build(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto n = single_size(ctx.cfg.n, sym.f.dims());
  const auto t = ToeplitzOperator::dense(sym.f, n, coefficient_grid(ctx.cfg, sym.f));
  const auto path = ctx.out_file();
  const bool binary = ctx.cfg.format == "bin" || (ctx.cfg.format == "auto" && path.extension() == ".bin");
  if (binary)
    write_matrix_binary(t.matrix(), sym.f.block_size(), n, path);
  else
    write_matrix_csv(t.matrix(), path);
  ctx.produced(path);
  ctx.results = {{"n", size_json(n)},
                 {"order", t.order()},
                 {"s", sym.f.block_size()},
                 {"format", binary ? "bin" : "csv"},
                 {"aliasing_estimate", t.aliasing_estimate()}};
  ctx.out << "order " << t.order() << " written to " << path.string() << "\n";
}

void cmd_eig(Context& ctx) {
  if (ctx.cfg.prec == "both") throw UsageError("eig takes --prec off or on");
  const auto sym = resolve_symbols(ctx.cfg);
  const auto n = single_size(ctx.cfg.n, sym.f.dims());
  const auto a = ctx.cfg.prec == "on" ? precond_matrix(ctx.cfg, sym, n) : system_matrix(ctx.cfg, sym.f, n);
  const auto path = ctx.out_file();
  const auto eig = eig_dense(a).eigenvalues;
  write_complex_csv(path, eig);
  ctx.produced(path);
  double rmax = 0, rmin = INFINITY;
  for (auto z : eig) rmax = std::max(rmax, std::abs(z)), rmin = std::min(rmin, std::abs(z));
  ctx.results = {{"n", size_json(n)}, {"order", eig.size()}, {"preconditioned", ctx.cfg.prec == "on"},
                 {"max_modulus", rmax}, {"min_modulus", rmin}};
  ctx.out << eig.size() << " eigenvalues written to " << path.string() << "\n";
}

void cmd_svd(Context& ctx) {
  if (ctx.cfg.prec == "both") throw UsageError("svd takes --prec off or on");
  const auto sym = resolve_symbols(ctx.cfg);
  const auto n = single_size(ctx.cfg.n, sym.f.dims());
  const auto a = ctx.cfg.prec == "on" ? precond_matrix(ctx.cfg, sym, n) : system_matrix(ctx.cfg, sym.f, n);
  const auto path = ctx.out_file();
  const auto sv = svd_values(a).values;
  std::string text = "sigma\n";
  for (double v : sv) text += num(v) + "\n";
  write_text(path, text);
  ctx.produced(path);
  ctx.results = {{"n", size_json(n)}, {"order", sv.size()}, {"preconditioned", ctx.cfg.prec == "on"},
                 {"sigma_max", sv.front()}, {"sigma_min", sv.back()}};
  ctx.out << "sigma_max " << num(sv.front()) << " sigma_min " << num(sv.back()) << "\n";
}

void cmd_sector(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  std::string which = ctx.cfg.target;
  if (which == "auto") which = sym.g ? "g" : "f";
  const MatrixSymbol& target = which == "g" ? require_g(sym) : sym.f;
  const auto grid = range_grid(ctx.cfg, target.dims());
  const auto rep = sectoriality(target, grid, ctx.cfg.angles);
  ctx.results = {{"symbol", which},
                 {"classification", to_string(rep.classification)},
                 {"d", rep.d},
                 {"max_support", rep.max_support},
                 {"best_angle", rep.best_angle},
                 {"witness_variance", rep.witness_variance},
                 {"zero_in_hull", rep.zero_in_hull},
                 {"skipped", rep.skipped}};
  if (auto dir = ctx.out_dir()) {
    write_text(*dir / "sector.json", ctx.results.dump(2) + "\n");
    ctx.produced(*dir / "sector.json");
    write_cloud_csv(essential_range(target, grid), *dir / "er.csv");
    ctx.produced(*dir / "er.csv");
    write_cloud_csv(essential_numerical_range(target, grid, ctx.cfg.angles).cloud, *dir / "enr.csv");
    ctx.produced(*dir / "enr.csv");
  }
  ctx.out << which << ": " << to_string(rep.classification) << ", d = " << num(rep.d)
          << ", theta* = " << num(rep.best_angle) << (rep.zero_in_hull ? ", 0 in hull" : "") << "\n";
}

void cmd_region(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto& g = require_g(sym);
  const auto grid = range_grid(ctx.cfg, sym.f.dims());
  const auto h = symbol_mul(symbol_inverse(g), sym.f);
  const auto er = essential_range(h, grid);
  const Rect rect = ctx.cfg.rect.empty() ? bounding_rect(er.points, default_tolerances().region_padding)
                                         : parse_rect(ctx.cfg.rect);
  const auto mask = localization_region(sym.f, g, rect, static_cast<std::size_t>(ctx.cfg.resolution), grid,
                                        std::min(ctx.cfg.angles, 360));
  ctx.results = {{"rect", rect_json(rect)}, {"width", mask.width}, {"height", mask.height},
                 {"true_pixels", mask.count()}, {"true_area", mask.area()}};
  std::optional<CVector> eig;
  if (!ctx.cfg.n.empty()) {
    const auto n = single_size(ctx.cfg.n, sym.f.dims());
    eig = eig_dense(precond_matrix(ctx.cfg, sym, n)).eigenvalues;
    // An eigenvalue violates localization when its pixel and all 8 neighbours are true.
    std::size_t violations = 0;
    for (auto z : *eig) {
      const auto px = mask.pixel_of(z);
      if (!px) continue;
      bool all_true = true;
      for (int dr = -1; dr <= 1 && all_true; ++dr)
        for (int dc = -1; dc <= 1 && all_true; ++dc) {
          const long r = static_cast<long>(px->first) + dr, c = static_cast<long>(px->second) + dc;
          if (r < 0 || c < 0 || r >= static_cast<long>(mask.height) || c >= static_cast<long>(mask.width)) continue;
          all_true = mask.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        }
      violations += all_true ? 1 : 0;
    }
    ctx.results["n"] = size_json(n);
    ctx.results["eigenvalues"] = eig->size();
    ctx.results["violations"] = violations;
  }
  if (auto dir = ctx.out_dir()) {
    write_mask_pgm(mask, *dir / "region.pgm");
    ctx.produced(*dir / "region.pgm");
    if (eig) {
      write_complex_csv(*dir / "eigenvalues.csv", *eig);
      ctx.produced(*dir / "eigenvalues.csv");
    }
    write_text(*dir / "region.json", ctx.results.dump(2) + "\n");
    ctx.produced(*dir / "region.json");
  }
  ctx.out << "R(f,g) true pixels " << mask.count() << " of " << mask.width * mask.height;
  if (eig) ctx.out << ", eigenvalues in R(f,g): " << ctx.results["violations"].get<std::size_t>();
  ctx.out << "\n";
}

void cmd_area(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto grid = range_grid(ctx.cfg, sym.f.dims());
  const bool prec = ctx.cfg.prec == "on";
  if (ctx.cfg.prec == "both") throw UsageError("area takes --prec off or on");
  const auto target = prec ? symbol_mul(symbol_inverse(require_g(sym)), sym.f) : sym.f;
  const auto er = essential_range(target, grid);
  const auto mask = ctx.cfg.rect.empty()
                        ? area_of_compact(er.points, static_cast<std::size_t>(ctx.cfg.resolution), ctx.cfg.eps)
                        : area_of_compact(er.points, static_cast<std::size_t>(ctx.cfg.resolution), ctx.cfg.eps,
                                          parse_rect(ctx.cfg.rect));
  ctx.results = {{"symbol", prec ? "g^-1 f" : "f"}, {"eps", ctx.cfg.eps}, {"rect", rect_json(mask.rect)},
                 {"pixels", mask.count()}, {"area", mask.area()}};
  if (auto dir = ctx.out_dir()) {
    write_mask_pgm(mask, *dir / "area.pgm");
    ctx.produced(*dir / "area.pgm");
    write_cloud_csv(er, *dir / "er.csv");
    ctx.produced(*dir / "er.csv");
  }
  ctx.out << "Area(K) = " << num(mask.area()) << "\n";
}

void cmd_outliers(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto sizes = expand_sizes(ctx.cfg.n, sym.f.dims());
  const auto grid = range_grid(ctx.cfg, sym.f.dims());
  const bool un = wants_unprec(ctx.cfg.prec), pr = wants_prec(ctx.cfg.prec);
  std::optional<RangeCloud> er_f, er_h;
  if (un) er_f = essential_range(sym.f, grid);
  if (pr) er_h = essential_range(symbol_mul(symbol_inverse(require_g(sym)), sym.f), grid);

  std::string table = "n,outliers_unprec,ratio_unprec,outliers_prec,ratio_prec\n";
  ctx.results = {{"eps", ctx.cfg.eps}, {"rows", json::array()}};
  for (const auto& n : sizes) {
    const double root = std::sqrt(static_cast<double>(n.product()));
    json row = {{"n", size_json(n)}};
    std::string line = size_label(n) + ",";
    if (un) {
      const auto eig = eig_dense(system_matrix(ctx.cfg, sym.f, n)).eigenvalues;
      const auto q = outlier_count(eig, er_f->points, ctx.cfg.eps);
      row["unprec"] = {{"count", q}, {"ratio", q / root}};
      line += std::to_string(q) + "," + fmt("%.2f", q / root);
      ctx.out << "n=" << n.to_string() << " unpreconditioned: " << q << " " << fmt("%.2f", q / root) << "\n";
    } else {
      line += ",";
    }
    line += ",";
    if (pr) {
      const auto eig = eig_dense(precond_matrix(ctx.cfg, sym, n)).eigenvalues;
      const auto q = outlier_count(eig, er_h->points, ctx.cfg.eps);
      row["prec"] = {{"count", q}, {"ratio", q / root}};
      line += std::to_string(q) + "," + fmt("%.2f", q / root);
      ctx.out << "n=" << n.to_string() << " preconditioned: " << q << " " << fmt("%.2f", q / root) << "\n";
    } else {
      line += ",";
    }
    table += line + "\n";
    ctx.results["rows"].push_back(row);
  }
  if (auto dir = ctx.out_dir()) {
    write_text(*dir / "outliers.csv", table);
    ctx.produced(*dir / "outliers.csv");
  }
}

void cmd_moments(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto g = sym.g ? *sym.g : MatrixSymbol::identity(sym.f.dims(), sym.f.block_size());
  const auto sizes = expand_sizes(ctx.cfg.n, sym.f.dims());
  const auto quad = moment_grid(ctx.cfg, sym.f.dims());
  std::string table = "n,N,trace_re,trace_im,integral_re,integral_im,gap\n";
  ctx.results = {{"rows", json::array()}};
  for (const auto& n : sizes) {
    const auto rep = moment_test(sym.f, g, n, ctx.cfg.max_moment, quad);
    json row = {{"n", size_json(n)}, {"gap", rep.gap}};
    for (int p = 0; p <= rep.n_max; ++p) {
      const auto i = static_cast<std::size_t>(p);
      table += size_label(n) + "," + std::to_string(p) + "," + num(rep.trace_mean[i].real()) + "," +
               num(rep.trace_mean[i].imag()) + "," + num(rep.integral[i].real()) + "," +
               num(rep.integral[i].imag()) + "," + num(rep.gap[i]) + "\n";
    }
    ctx.results["rows"].push_back(row);
    ctx.out << "n=" << n.to_string() << " gaps";
    for (double v : rep.gap) ctx.out << " " << fmt("%.3e", v);
    ctx.out << "\n";
  }
  if (auto dir = ctx.out_dir()) {
    write_text(*dir / "moments.csv", table);
    ctx.produced(*dir / "moments.csv");
  }
}

GmresOptions gmres_options(const ExperimentConfig& cfg) {
  GmresOptions o;
  o.tol = cfg.tol;
  o.true_residual = cfg.true_residual;
  return o;
}

void stamp(SolveReport& rep, const ExperimentConfig& cfg) {
  rep.config.case_id = cfg.case_id.value_or(0);
  if (cfg.case_id) {
    rep.config.r = cfg.r;
    rep.config.window = parse_catalog_window(cfg.window);
  }
}

SolveReport one_solve(const ExperimentConfig& cfg, const Symbols& sym, const MultiIndex& n, bool prec) {
  const std::optional<MatrixSymbol> g = prec ? std::optional(require_g(sym)) : std::nullopt;
  try {
    auto rep = solve_system(sym.f, g, n, cfg.seed, gmres_options(cfg)).report;
    stamp(rep, cfg);
    return rep;
  } catch (const GmresStagnation& e) {
    auto rep = e.report();
    stamp(rep, cfg);
    throw GmresStagnation(e.what(), std::move(rep));
  }
}

void record_run(Context& ctx, const SolveReport& rep, const std::string& stem) {
  if (auto dir = ctx.out_dir()) {
    write_text(*dir / (stem + ".json"), to_json(rep) + "\n");
    ctx.produced(*dir / (stem + ".json"));
    write_residual_csv(rep, *dir / (stem + ".csv"));
    ctx.produced(*dir / (stem + ".csv"));
  }
}

void cmd_solve(Context& ctx) {
  if (ctx.cfg.prec == "both") throw UsageError("solve takes --prec off or on; use case for both");
  const auto sym = resolve_symbols(ctx.cfg);
  const auto n = single_size(ctx.cfg.n, sym.f.dims());
  try {
    const auto rep = one_solve(ctx.cfg, sym, n, ctx.cfg.prec == "on");
    ctx.results = json::parse(to_json(rep));
    record_run(ctx, rep, "solve");
    ctx.out << "iterations " << rep.iterations << (rep.converged ? " converged" : " not converged")
            << " relres " << num(rep.history.empty() ? 1.0 : rep.history.back()) << "\n";
  } catch (const GmresStagnation& e) {
    ctx.results = {{"partial", json::parse(to_json(e.report()))}};
    record_run(ctx, e.report(), "solve");
    throw;
  }
}

void cmd_case(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto sizes = expand_sizes(ctx.cfg.n, sym.f.dims());
  std::vector<bool> modes;
  if (wants_unprec(ctx.cfg.prec)) modes.push_back(false);
  if (wants_prec(ctx.cfg.prec)) {
    require_g(sym);
    modes.push_back(true);
  }
  struct Task {
    MultiIndex n;
    bool prec;
    std::optional<SolveReport> report;
    std::exception_ptr error;
  };
  std::vector<Task> tasks;
  for (const auto& n : sizes)
    for (bool p : modes) tasks.push_back({n, p, std::nullopt, nullptr});

  // Independent solves fan out; each task owns its slot, outputs are written afterwards.
  unsigned workers = ctx.cfg.threads ? ctx.cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        tasks[i].report = one_solve(ctx.cfg, sym, tasks[i].n, tasks[i].prec);
      } catch (...) {
        tasks[i].error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::string table = "n,unprec_iters,prec_iters\n";
  ctx.results = {{"rows", json::array()}};
  std::exception_ptr first_error;
  for (const auto& n : sizes) {
    std::string cells[2];
    json row = {{"n", size_json(n)}};
    for (auto& t : tasks) {
      if (!(t.n == n)) continue;
      const std::string mode = t.prec ? "prec" : "unprec";
      if (t.report) {
        cells[t.prec] = std::to_string(t.report->iterations);
        row[mode] = {{"iterations", t.report->iterations}, {"converged", t.report->converged}};
        record_run(ctx, *t.report, "run_" + size_label(n) + "_" + mode);
      } else {
        try {
          std::rethrow_exception(t.error);
        } catch (const GmresStagnation& e) {
          row[mode] = {{"error", e.what()}, {"partial", json::parse(to_json(e.report()))}};
          record_run(ctx, e.report(), "run_" + size_label(n) + "_" + mode);
        } catch (const std::exception& e) {
          row[mode] = {{"error", e.what()}};
        }
        if (!first_error) first_error = t.error;
      }
    }
    table += size_label(n) + "," + cells[0] + "," + cells[1] + "\n";
    ctx.results["rows"].push_back(row);
  }
  ctx.out << table;
  if (auto dir = ctx.out_dir()) {
    write_text(*dir / "table.csv", table);
    ctx.produced(*dir / "table.csv");
  }
  if (first_error) std::rethrow_exception(first_error);
}

void cmd_gap(Context& ctx) {
  const auto sym = resolve_symbols(ctx.cfg);
  const auto& g = require_g(sym);
  const auto sizes = expand_sizes(ctx.cfg.n, sym.f.dims());
  std::string table = "n,nhat,rank,rank_bound,within_bound,trace_norm,trace_norm_per_nhat\n";
  ctx.results = {{"rows", json::array()}};
  for (const auto& n : sizes) {
    const auto gap = commutator_gap(sym.f, g, n);
    const double nhat = static_cast<double>(n.product());
    table += size_label(n) + "," + std::to_string(n.product()) + "," + std::to_string(gap.rank) + "," +
             std::to_string(gap.rank_bound) + "," + (gap.within_bound ? "1" : "0") + "," + num(gap.trace_norm) +
             "," + num(gap.trace_norm / nhat) + "\n";
    ctx.results["rows"].push_back({{"n", size_json(n)},
                                   {"rank", gap.rank},
                                   {"rank_bound", gap.rank_bound},
                                   {"within_bound", gap.within_bound},
                                   {"trace_norm", gap.trace_norm}});
    ctx.out << "n=" << n.to_string() << " rank " << gap.rank << " <= " << gap.rank_bound << " trace/nhat "
            << fmt("%.6g", gap.trace_norm / nhat) << "\n";
  }
  if (auto dir = ctx.out_dir()) {
    write_text(*dir / "gap.csv", table);
    ctx.produced(*dir / "gap.csv");
  }
}

void cmd_parse_check(Context& ctx) {
  if (ctx.cfg.f_expr.empty()) throw UsageError("parse-check needs --expr");
  const auto tree = dsl::parse(ctx.cfg.f_expr, ctx.cfg.k);
  const auto sym = dsl::compile(tree, ctx.cfg.k, ctx.cfg.s, ctx.cfg.params, "f");
  json singular = json::array();
  for (const auto& h : sym.singular_set()) singular.push_back({{"variable", h.variable}, {"value", h.value}});
  ctx.results = {{"canonical", dsl::print(*tree)}, {"kind", to_string(sym.kind())}, {"singular", singular}};
  if (sym.is_trig()) ctx.results["degree"] = size_json(sym.degree());
  ctx.out << dsl::print(*tree) << "\n" << to_string(sym.kind());
  if (sym.is_trig()) ctx.out << " of degree " << sym.degree().to_string();
  ctx.out << "\n";
}

fs::path manifest_path(const ExperimentConfig& cfg) {
  if (!cfg.manifest.empty()) return cfg.manifest;
  if (cfg.out.empty()) return "toepspec-manifest.json";
  const bool dir = std::find(directory_outputs.begin(), directory_outputs.end(), cfg.subcommand) !=
                   directory_outputs.end();
  return dir ? fs::path(cfg.out) / "manifest.json" : fs::path(cfg.out + ".manifest.json");
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  return {
      {"subcommand", c.subcommand},
      {"case", c.case_id ? json(*c.case_id) : json(nullptr)},
      {"r", c.r ? json(*c.r) : json(nullptr)},
      {"window", c.window},
      {"f", c.f_path},
      {"g", c.g_path},
      {"f_expr", c.f_expr},
      {"g_expr", c.g_expr},
      {"k", c.k},
      {"s", c.s},
      {"params", c.params},
      {"n", c.n},
      {"tol", c.tol},
      {"seed", c.seed},
      {"prec", c.prec},
      {"true_residual", c.true_residual},
      {"coef_grid", c.coef_grid},
      {"range_grid", c.range_grid},
      {"angles", c.angles},
      {"resolution", c.resolution},
      {"eps", c.eps},
      {"max_moment", c.max_moment},
      {"rect", c.rect},
      {"target", c.target},
      {"format", c.format},
      {"out", c.out},
      {"manifest", c.manifest},
      {"threads", c.threads},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.subcommand = j.at("subcommand").get<std::string>();
  if (!j.at("case").is_null()) c.case_id = j.at("case").get<int>();
  if (!j.at("r").is_null()) c.r = j.at("r").get<double>();
  j.at("window").get_to(c.window);
  j.at("f").get_to(c.f_path);
  j.at("g").get_to(c.g_path);
  j.at("f_expr").get_to(c.f_expr);
  j.at("g_expr").get_to(c.g_expr);
  j.at("k").get_to(c.k);
  j.at("s").get_to(c.s);
  j.at("params").get_to(c.params);
  j.at("n").get_to(c.n);
  j.at("tol").get_to(c.tol);
  j.at("seed").get_to(c.seed);
  j.at("prec").get_to(c.prec);
  j.at("true_residual").get_to(c.true_residual);
  j.at("coef_grid").get_to(c.coef_grid);
  j.at("range_grid").get_to(c.range_grid);
  j.at("angles").get_to(c.angles);
  j.at("resolution").get_to(c.resolution);
  j.at("eps").get_to(c.eps);
  j.at("max_moment").get_to(c.max_moment);
  j.at("rect").get_to(c.rect);
  j.at("target").get_to(c.target);
  j.at("format").get_to(c.format);
  j.at("out").get_to(c.out);
  j.at("manifest").get_to(c.manifest);
  j.at("threads").get_to(c.threads);
  return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  int case_id = 0;
  double r = std::nan("");
  std::vector<std::string> params;
  std::map<std::string, std::string> prec_default = {
      {"eig", "off"}, {"svd", "off"}, {"area", "off"}, {"solve", "on"}, {"case", "both"}, {"outliers", "both"}};

  CLI::App app{"toepspec " + std::string(version_string) +
               ": multilevel block Toeplitz spectra and preconditioned GMRES"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(version_string));

  struct Spec {
    const char* name;
    const char* help;
    bool sizes;
    bool symbols;
  };
  const Spec specs[] = {
      {"build", "assemble T_n(f) and write it as CSV or binary", true, true},
      {"eig", "eigenvalues of T_n(f) or T_n(g)^-1 T_n(f)", true, true},
      {"svd", "singular values of T_n(f) or T_n(g)^-1 T_n(f)", true, true},
      {"sector", "sectoriality class and separation distance d", false, true},
      {"region", "localization region R(f,g) as a pixel mask", true, true},
      {"area", "Area(K) of the dilated essential range", false, true},
      {"outliers", "outlier counts against the essential range", true, true},
      {"moments", "trace moments versus symbol integrals", true, true},
      {"solve", "one GMRES solve with a seeded random right-hand side", true, true},
      {"case", "GMRES iteration table over a sweep of sizes", true, true},
      {"gap", "rank and trace norm of T_n(g)T_n(f) - T_n(gf)", true, true},
      {"parse-check", "parse and compile a symbol expression", false, false},
  };
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    const std::string name = spec.name;
    sub->add_option("--out", cfg.out, "output file or directory");
    sub->add_option("--manifest", cfg.manifest, "manifest path (default: derived from --out)");
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    if (spec.symbols) {
      sub->add_option("--id", case_id, "catalog case 1-6");
      sub->add_option("--r", r, "disk radius parameter for cases 1 and 2");
      sub->add_option("--window", cfg.window, "argument window for non-periodic catalog factors")
          ->check(CLI::IsMember({"symmetric", "from_zero"}))
          ->capture_default_str();
      sub->add_option("--f", cfg.f_path, "symbol JSON file for f")->check(CLI::ExistingFile);
      sub->add_option("--g", cfg.g_path, "symbol JSON file for the preconditioner g")->check(CLI::ExistingFile);
      sub->add_option("--f-expr", cfg.f_expr, "symbol expression for f");
      sub->add_option("--g-expr", cfg.g_expr, "symbol expression for g");
      sub->add_option("--coef-grid", cfg.coef_grid, "Fourier quadrature nodes per dimension (0: default)")
          ->capture_default_str();
      sub->add_option("--range-grid", cfg.range_grid, "essential-range nodes per dimension (0: default)")
          ->capture_default_str();
    } else {
      sub->add_option("--expr", cfg.f_expr, "symbol expression")->required();
    }
    if (spec.symbols || name == "parse-check") {
      sub->add_option("--k", cfg.k, "number of variables for expressions")->capture_default_str();
      sub->add_option("--s", cfg.s, "block size for expressions")->capture_default_str();
      sub->add_option("--param", params, "expression parameter name=value (repeatable)");
    }
    if (spec.sizes) sub->add_option("--n", cfg.n, "sizes: 50,100 (k=1 sweep), 5,5 or 5,5;10,10 (k=2)");
    if (prec_default.count(name))
      sub->add_option("--prec", prec_default[name], "preconditioning: off, on, both")
          ->check(CLI::IsMember({"off", "on", "both"}))
          ->capture_default_str();
    if (name == "solve" || name == "case") {
      sub->add_option("--tol", cfg.tol, "GMRES relative tolerance")->capture_default_str();
      sub->add_flag("--true-residual", cfg.true_residual, "stop on the unpreconditioned residual");
    }
    if (name == "case") sub->add_option("--threads", cfg.threads, "worker threads (0: all cores)")->capture_default_str();
    if (name == "sector" || name == "region")
      sub->add_option("--angles", cfg.angles, "support-function angles")->capture_default_str();
    if (name == "sector")
      sub->add_option("--target", cfg.target, "symbol to classify: f, g, auto")
          ->check(CLI::IsMember({"f", "g", "auto"}))
          ->capture_default_str();
    if (name == "region" || name == "area") {
      sub->add_option("--resolution", cfg.resolution, "pixels per side")->capture_default_str();
      sub->add_option("--rect", cfg.rect, "re_min,re_max,im_min,im_max (default: automatic)");
    }
    if (name == "area" || name == "outliers") sub->add_option("--eps", cfg.eps, "distance threshold")->capture_default_str();
    if (name == "moments") sub->add_option("--max-moment", cfg.max_moment, "largest moment order N")->capture_default_str();
    if (name == "build")
      sub->add_option("--format", cfg.format, "csv, bin, or auto (by extension)")
          ->check(CLI::IsMember({"csv", "bin", "auto"}))
          ->capture_default_str();
  }

  json results = json::object();
  std::vector<std::string> artifacts;
  int code = exit_ok;
  std::string error_text;
  bool reported = false;  // CLI11 already printed the message

  const auto start = std::chrono::steady_clock::now();
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      reported = true;
      throw UsageError(e.what());
    }
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (case_id != 0) cfg.case_id = case_id;
    if (!std::isnan(r)) cfg.r = r;
    if (prec_default.count(cfg.subcommand)) cfg.prec = prec_default[cfg.subcommand];
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + p + "'");
      cfg.params[p.substr(0, eq)] = to_double(p.substr(eq + 1), "--param");
    }
    if (cfg.resolution < 32) throw UsageError("--resolution must be at least 32");
    if (!(cfg.eps > 0)) throw UsageError("--eps must be positive");

    Context ctx{cfg, out, results, artifacts};
    const std::map<std::string, void (*)(Context&)> table = {
        {"build", cmd_build},     {"eig", cmd_eig},       {"svd", cmd_svd},         {"sector", cmd_sector},
        {"region", cmd_region},   {"area", cmd_area},     {"outliers", cmd_outliers}, {"moments", cmd_moments},
        {"solve", cmd_solve},     {"case", cmd_case},     {"gap", cmd_gap},         {"parse-check", cmd_parse_check},
    };
    table.at(cfg.subcommand)(ctx);
  } catch (const UsageError& e) {
    code = exit_usage;
    error_text = e.what();
  } catch (const InvalidArgument& e) {
    code = exit_usage;
    error_text = e.what();
  } catch (const ParseError& e) {
    code = exit_usage;
    error_text = e.what();
  } catch (const std::exception& e) {
    code = exit_numeric;
    error_text = e.what();
  }
  if (!error_text.empty() && !reported) err << "error: " << error_text << "\n";

  const json manifest = {
      {"tool", "toepspec"},
      {"version", version_string},
      {"argv", std::vector<std::string>(argv, argv + argc)},
      {"config", to_json(cfg)},
      {"seed", cfg.seed},
      {"status", code == exit_ok ? "ok" : code == exit_usage ? "usage_error" : "numeric_failure"},
      {"exit_code", code},
      {"error", error_text.empty() ? json(nullptr) : json(error_text)},
      {"artifacts", artifacts},
      {"results", results},
      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
  };
  try {
    const auto path = manifest_path(cfg);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text(path, manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "warning: manifest not written: " << e.what() << "\n";
  }
  return code;
}

}  // namespace toepspec::cli
