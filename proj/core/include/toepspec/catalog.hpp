#pragma once

#include <optional>
#include <string>

#include "toepspec/symbol.hpp"

namespace toepspec {

/// One experiment of the six-case catalog: f = Q A Q^T is the system symbol,
/// g = Q B Q^T the preconditioner symbol, with Q(x) the plane rotation by x
/// (k = 1) or by x1 + x2 (k = 2).
struct CatalogCase {
  int id = 0;
  std::optional<double> r;
  MatrixSymbol f;
  MatrixSymbol g;
  MatrixSymbol a;
  MatrixSymbol b;
  MatrixSymbol q;
  std::string description;
};

/// Where the non-periodic factors of cases 2-4 (1/(x^2-1), x^2, x) read their
/// argument: symmetric takes x in (-pi, pi]; from_zero maps x to [0, 2 pi),
/// i.e. samples their 2 pi-periodic extension from the other window.
enum class CatalogWindow { symmetric, from_zero };

/// Cases 1-6. `r` is required for cases 1 and 2 and ignored otherwise.
/// Throws InvalidArgument for an unknown id or a missing r.
CatalogCase catalog(int case_id, std::optional<double> r = std::nullopt,
                    CatalogWindow window = CatalogWindow::symmetric);
std::string to_string(CatalogWindow window);
CatalogWindow parse_catalog_window(const std::string& text);

/// Rotation symbol [[cos u, sin u], [-sin u, cos u]] with u = x1 (+ x2 when k = 2).
MatrixSymbol rotation_symbol(int k);

}  // namespace toepspec
