#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toepspec/complex_matrix.hpp"
#include "toepspec/symbol.hpp"

namespace toepspec::dsl {

// Grammar (whitespace-insensitive, newlines allowed):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | 'i' | 'pi' | variable | identifier
//            | function '(' expr (',' expr)* ')' | '(' expr ')'
//            | '[' '[' expr (',' expr)* ']' (',' '[' ... ']')* ']'
//
// Variables are x1..x3 (x is x1 when k = 1). Functions: cos, sin, exp (scalar
// argument), conj, transpose, sandwich(Q, A) = Q A Q^T. Any other identifier
// is a named parameter, bound at compile or interpretation time.

enum class NodeKind {
  number,     // value
  variable,   // index
  parameter,  // name
  negate,
  add,
  subtract,
  multiply,
  divide,
  power,      // exponent
  cos,
  sin,
  exp,
  conj,
  transpose,
  sandwich,
  matrix,     // children row-major, rows x cols
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::number;
  cplx value{};
  int index = 0;
  int exponent = 0;
  std::string name;
  std::vector<NodePtr> children;
  // Result shape; scalars are 1 x 1 and parameters are scalars.
  std::size_t rows = 1;
  std::size_t cols = 1;
  int line = 1;
  int column = 1;

  bool is_scalar() const noexcept { return rows == 1 && cols == 1 && kind != NodeKind::matrix; }
};

/// Structural equality; source positions are ignored.
bool same_tree(const Node& a, const Node& b);

/// Throws ParseError with position and offending token on lexical, syntax,
/// arity or shape errors.
NodePtr parse(std::string_view text, int k);

/// Canonical text; parse(print(t), k) is structurally equal to t.
std::string print(const Node& root);

using Parameters = std::map<std::string, double>;

/// Direct tree-walking evaluation at x. Division by zero follows IEEE rules.
ComplexMatrix interpret(const Node& root, std::span<const double> x, const Parameters& params = {});

/// Builds a symbol of block size s. Expands to an exact coefficient table
/// when every construct is a trigonometric polynomial; otherwise yields a
/// general symbol whose singular hyperplanes are the real zeros of
/// one-variable polynomial or trigonometric denominators. Throws ParseError
/// for unbound parameters, a shape other than s x s, or division by an
/// identically zero expression.
MatrixSymbol compile(const NodePtr& root, int k, int s, const Parameters& params = {},
                     std::string name = {});

/// parse + compile.
MatrixSymbol compile_text(std::string_view text, int k, int s, const Parameters& params = {},
                          std::string name = {});

}  // namespace toepspec::dsl
