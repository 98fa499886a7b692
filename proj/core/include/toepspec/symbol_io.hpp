#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "toepspec/dsl.hpp"
#include "toepspec/symbol.hpp"

namespace toepspec {

/// On-disk form of a symbol. Exactly one of `expression` and `coefficients`
/// is set. Coefficient keys are "j1,j2,..."; values are 2 s^2 reals,
/// row-major (re, im) pairs.
struct SymbolDocument {
  int k = 1;
  int s = 1;
  std::optional<SymbolKind> kind;  // checked against the built symbol when present
  std::string name;
  std::optional<std::string> expression;
  std::optional<CoefficientTable> coefficients;
  dsl::Parameters params;
};

/// Throws ParseError (line/column from the JSON parser) or InvalidArgument.
SymbolDocument parse_symbol_document(std::string_view json_text);
std::string to_json(const SymbolDocument& doc, int indent = 2);

/// Compiles or tabulates the document. Throws InvalidArgument when a declared
/// kind disagrees with the result.
MatrixSymbol build_symbol(const SymbolDocument& doc);

/// Table form of a trig-polynomial symbol; general symbols have no table and
/// are rejected.
SymbolDocument document_from_symbol(const MatrixSymbol& sym);

SymbolDocument read_symbol_file(const std::filesystem::path& path);
MatrixSymbol load_symbol_file(const std::filesystem::path& path);

std::string to_string(SymbolKind kind);

}  // namespace toepspec
