#include "toepspec/dsl.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>

#include "toepspec/errors.hpp"
#include "toepspec/linalg.hpp"

namespace toepspec::dsl {
namespace {

using namespace std::complex_literals;

// ---- lexer ------------------------------------------------------------------

enum class Tok { number, ident, op, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t p = 0;
  auto advance = [&](std::size_t count) {
    for (std::size_t q = 0; q < count; ++q) {
      if (src[p] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++p;
    }
  };
  while (p < src.size()) {
    const char c = src[p];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t q = p;
      while (q < src.size() && std::isdigit(static_cast<unsigned char>(src[q]))) ++q;
      if (q < src.size() && src[q] == '.') {
        ++q;
        while (q < src.size() && std::isdigit(static_cast<unsigned char>(src[q]))) ++q;
      }
      if (q < src.size() && (src[q] == 'e' || src[q] == 'E')) {
        std::size_t e = q + 1;
        if (e < src.size() && (src[e] == '+' || src[e] == '-')) ++e;
        if (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) {
          while (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) ++e;
          q = e;
        }
      }
      t.kind = Tok::number;
      t.text = std::string(src.substr(p, q - p));
      if (t.text == ".") throw ParseError("malformed number", line, col, t.text);
      t.number = std::strtod(t.text.c_str(), nullptr);
      advance(q - p);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t q = p;
      while (q < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[q])) || src[q] == '_'))
        ++q;
      t.kind = Tok::ident;
      t.text = std::string(src.substr(p, q - p));
      advance(q - p);
    } else if (std::string_view("+-*/^()[],").find(c) != std::string_view::npos) {
      t.kind = Tok::op;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError("unexpected character", line, col, std::string(1, c));
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// ---- node construction with shape checks -----------------------------------

bool scalar_shape(const Node& n) { return n.rows == 1 && n.cols == 1; }

std::string shape_text(const Node& n) {
  return std::to_string(n.rows) + "x" + std::to_string(n.cols);
}

std::shared_ptr<Node> leaf(NodeKind kind, const Token& at) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->line = at.line;
  n->column = at.column;
  return n;
}

NodePtr make_binary(NodeKind kind, NodePtr a, NodePtr b, const Token& at) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->line = at.line;
  n->column = at.column;
  switch (kind) {
    case NodeKind::add:
    case NodeKind::subtract:
      if (a->rows != b->rows || a->cols != b->cols)
        throw ParseError("operand shapes differ: " + shape_text(*a) + " vs " + shape_text(*b),
                         at.line, at.column, at.text);
      n->rows = a->rows;
      n->cols = a->cols;
      break;
    case NodeKind::multiply:
      if (scalar_shape(*a)) {
        n->rows = b->rows;
        n->cols = b->cols;
      } else if (scalar_shape(*b)) {
        n->rows = a->rows;
        n->cols = a->cols;
      } else if (a->cols == b->rows) {
        n->rows = a->rows;
        n->cols = b->cols;
      } else {
        throw ParseError("matrix product shapes differ: " + shape_text(*a) + " * " +
                             shape_text(*b),
                         at.line, at.column, at.text);
      }
      break;
    case NodeKind::divide:
      if (!scalar_shape(*b))
        throw ParseError("divisor must be scalar", at.line, at.column, at.text);
      n->rows = a->rows;
      n->cols = a->cols;
      break;
    default:
      throw ParseError("internal: not a binary operator", at.line, at.column, at.text);
  }
  n->children = {std::move(a), std::move(b)};
  return n;
}

NodePtr make_unary(NodeKind kind, NodePtr a, const Token& at) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->line = at.line;
  n->column = at.column;
  n->rows = a->rows;
  n->cols = a->cols;
  if (kind == NodeKind::transpose) std::swap(n->rows, n->cols);
  if ((kind == NodeKind::cos || kind == NodeKind::sin || kind == NodeKind::exp) &&
      !scalar_shape(*a))
    throw ParseError("function expects a scalar argument", at.line, at.column, at.text);
  n->children = {std::move(a)};
  return n;
}

NodePtr make_power(NodePtr base, int exponent, const Token& at) {
  if (base->rows != base->cols)
    throw ParseError("power of a non-square matrix", at.line, at.column, at.text);
  if (exponent < 0 && !scalar_shape(*base))
    throw ParseError("negative power of a matrix", at.line, at.column, at.text);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::power;
  n->exponent = exponent;
  n->line = at.line;
  n->column = at.column;
  n->rows = base->rows;
  n->cols = base->cols;
  n->children = {std::move(base)};
  return n;
}

NodePtr make_sandwich(NodePtr q, NodePtr a, const Token& at) {
  if (a->rows != a->cols || q->cols != a->rows)
    throw ParseError("sandwich(Q, A) needs square A with Q columns = A rows", at.line,
                     at.column, at.text);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::sandwich;
  n->line = at.line;
  n->column = at.column;
  n->rows = q->rows;
  n->cols = q->rows;
  n->children = {std::move(q), std::move(a)};
  return n;
}

// ---- parser -------------------------------------------------------------------

class Parser {
public:
  Parser(std::string_view text, int k) : toks_(lex(text)), k_(k) {}

  NodePtr parse_all() {
    if (peek().kind == Tok::end) throw ParseError("empty expression", 1, 1, "");
    auto e = expr();
    if (peek().kind != Tok::end) fail("unexpected token");
    return e;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  bool at_op(char c) const { return peek().kind == Tok::op && peek().text[0] == c; }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw ParseError(msg, t.line, t.column, t.kind == Tok::end ? "<end>" : t.text);
  }

  const Token& expect(char c) {
    if (!at_op(c)) fail(std::string("expected '") + c + "'");
    return take();
  }

  NodePtr expr() {
    auto lhs = term();
    while (at_op('+') || at_op('-')) {
      const Token& op = take();
      auto rhs = term();
      lhs = make_binary(op.text[0] == '+' ? NodeKind::add : NodeKind::subtract, lhs, rhs, op);
    }
    return lhs;
  }

  NodePtr term() {
    auto lhs = unary();
    while (at_op('*') || at_op('/')) {
      const Token& op = take();
      auto rhs = unary();
      lhs = make_binary(op.text[0] == '*' ? NodeKind::multiply : NodeKind::divide, lhs, rhs, op);
    }
    return lhs;
  }

  NodePtr unary() {
    if (at_op('-')) {
      const Token& op = take();
      return make_unary(NodeKind::negate, unary(), op);
    }
    if (at_op('+')) {
      take();
      return unary();
    }
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (!at_op('^')) return base;
    const Token& op = take();
    bool negative = false;
    if (at_op('-')) {
      take();
      negative = true;
    }
    const Token& e = peek();
    if (e.kind != Tok::number || e.text.find_first_not_of("0123456789") != std::string::npos)
      fail("exponent must be an integer literal");
    take();
    if (e.text.size() > 6) throw ParseError("exponent too large", e.line, e.column, e.text);
    const int value = std::stoi(e.text);
    auto node = make_power(base, negative ? -value : value, op);
    if (at_op('^')) fail("chained powers need parentheses");
    return node;
  }

  std::vector<NodePtr> call_args() {
    expect('(');
    std::vector<NodePtr> args{expr()};
    while (at_op(',')) {
      take();
      args.push_back(expr());
    }
    expect(')');
    return args;
  }

  NodePtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::number) {
      take();
      auto n = leaf(NodeKind::number, t);
      n->value = t.number;
      return n;
    }
    if (t.kind == Tok::op && t.text == "(") {
      take();
      auto e = expr();
      expect(')');
      return e;
    }
    if (t.kind == Tok::op && t.text == "[") return matrix();
    if (t.kind != Tok::ident) fail("expected an operand");
    take();
    const std::string& id = t.text;
    if (id == "i") {
      auto n = leaf(NodeKind::number, t);
      n->value = 1i;
      return n;
    }
    if (id == "pi") {
      auto n = leaf(NodeKind::number, t);
      n->value = std::numbers::pi;
      return n;
    }
    if (id == "x" || (id.size() >= 2 && id[0] == 'x' &&
                      id.find_first_not_of("0123456789", 1) == std::string::npos)) {
      int var = 0;
      if (id == "x") {
        if (k_ != 1) throw ParseError("'x' is only allowed when k = 1", t.line, t.column, id);
      } else {
        var = std::stoi(id.substr(1)) - 1;
        if (var < 0 || var >= k_)
          throw ParseError("variable outside x1..x" + std::to_string(k_), t.line, t.column, id);
      }
      auto n = leaf(NodeKind::variable, t);
      n->index = var;
      return n;
    }
    static const std::map<std::string, std::pair<NodeKind, std::size_t>> functions{
        {"cos", {NodeKind::cos, 1}},   {"sin", {NodeKind::sin, 1}},
        {"exp", {NodeKind::exp, 1}},   {"conj", {NodeKind::conj, 1}},
        {"transpose", {NodeKind::transpose, 1}}, {"sandwich", {NodeKind::sandwich, 2}}};
    if (auto it = functions.find(id); it != functions.end()) {
      if (!at_op('(')) fail("expected '(' after " + id);
      auto args = call_args();
      if (args.size() != it->second.second)
        throw ParseError(id + " takes " + std::to_string(it->second.second) + " argument(s)",
                         t.line, t.column, id);
      if (it->second.first == NodeKind::sandwich) return make_sandwich(args[0], args[1], t);
      return make_unary(it->second.first, args[0], t);
    }
    if (at_op('(')) throw ParseError("unknown function", t.line, t.column, id);
    auto n = leaf(NodeKind::parameter, t);
    n->name = id;
    return n;
  }

  NodePtr matrix() {
    const Token& open = expect('[');
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::matrix;
    n->line = open.line;
    n->column = open.column;
    std::size_t rows = 0, cols = 0;
    do {
      if (rows > 0) take();  // ','
      const Token& row_open = peek();
      if (!at_op('[')) fail("matrix rows must be bracketed");
      take();
      std::size_t count = 0;
      do {
        if (count > 0) take();
        const Token& at = peek();
        auto e = expr();
        if (!scalar_shape(*e))
          throw ParseError("matrix entries must be scalar", at.line, at.column, at.text);
        n->children.push_back(std::move(e));
        ++count;
      } while (at_op(','));
      expect(']');
      if (rows == 0) cols = count;
      else if (count != cols)
        throw ParseError("dimension mismatch: row has " + std::to_string(count) +
                             " entries, expected " + std::to_string(cols),
                         row_open.line, row_open.column, row_open.text);
      ++rows;
    } while (at_op(','));
    expect(']');
    n->rows = rows;
    n->cols = cols;
    return n;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int k_;
};

// ---- printing -------------------------------------------------------------------

std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Keep the lexeme numeric: "inf"/"nan" would lex as identifiers.
  if (!std::isfinite(v)) throw InvalidArgument("cannot print non-finite literal");
  return s;
}

void print_into(const Node& n, std::string& out) {
  auto child = [&](std::size_t i) { print_into(*n.children[i], out); };
  auto binary = [&](const char* op) {
    out += '(';
    child(0);
    out += op;
    child(1);
    out += ')';
  };
  auto call = [&](const char* fn) {
    out += fn;
    out += '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) out += ", ";
      child(i);
    }
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::number:
      if (n.value == 1i) {
        out += 'i';
      } else if (n.value.imag() == 0.0 && n.value.real() >= 0.0) {
        out += number_text(n.value.real());
      } else {
        throw InvalidArgument("literal is not printable: parser literals are non-negative reals or i");
      }
      break;
    case NodeKind::variable: out += "x" + std::to_string(n.index + 1); break;
    case NodeKind::parameter: out += n.name; break;
    case NodeKind::negate:
      out += "(-";
      child(0);
      out += ')';
      break;
    case NodeKind::add: binary(" + "); break;
    case NodeKind::subtract: binary(" - "); break;
    case NodeKind::multiply: binary(" * "); break;
    case NodeKind::divide: binary(" / "); break;
    case NodeKind::power:
      out += '(';
      child(0);
      out += ")^" + std::to_string(n.exponent);
      break;
    case NodeKind::cos: call("cos"); break;
    case NodeKind::sin: call("sin"); break;
    case NodeKind::exp: call("exp"); break;
    case NodeKind::conj: call("conj"); break;
    case NodeKind::transpose: call("transpose"); break;
    case NodeKind::sandwich: call("sandwich"); break;
    case NodeKind::matrix:
      out += '[';
      for (std::size_t r = 0; r < n.rows; ++r) {
        if (r) out += ", ";
        out += '[';
        for (std::size_t c = 0; c < n.cols; ++c) {
          if (c) out += ", ";
          child(r * n.cols + c);
        }
        out += ']';
      }
      out += ']';
      break;
  }
}

// ---- interpretation -------------------------------------------------------------

cplx scalar(const ComplexMatrix& m) { return m(0, 0); }
ComplexMatrix one_by_one(cplx v) { return ComplexMatrix(1, 1, {v}); }

ComplexMatrix matrix_power(const ComplexMatrix& base, int e) {
  if (base.rows() == 1 && base.cols() == 1) return one_by_one(std::pow(scalar(base), e));
  ComplexMatrix result = ComplexMatrix::identity(base.rows());
  for (int q = 0; q < e; ++q) result = result * base;
  return result;
}

ComplexMatrix eval(const Node& n, std::span<const double> x, const Parameters& params) {
  auto sub = [&](std::size_t i) { return eval(*n.children[i], x, params); };
  switch (n.kind) {
    case NodeKind::number: return one_by_one(n.value);
    case NodeKind::variable: return one_by_one(x[static_cast<std::size_t>(n.index)]);
    case NodeKind::parameter: {
      auto it = params.find(n.name);
      if (it == params.end())
        throw ParseError("unbound parameter", n.line, n.column, n.name);
      return one_by_one(it->second);
    }
    case NodeKind::negate: return cplx(-1.0) * sub(0);
    case NodeKind::add: return sub(0) + sub(1);
    case NodeKind::subtract: return sub(0) - sub(1);
    case NodeKind::multiply: {
      auto a = sub(0), b = sub(1);
      if (n.children[0]->rows == 1 && n.children[0]->cols == 1) return scalar(a) * b;
      if (n.children[1]->rows == 1 && n.children[1]->cols == 1) return scalar(b) * a;
      return a * b;
    }
    case NodeKind::divide: return (1.0 / scalar(sub(1))) * sub(0);
    case NodeKind::power: return matrix_power(sub(0), n.exponent);
    case NodeKind::cos: return one_by_one(std::cos(scalar(sub(0))));
    case NodeKind::sin: return one_by_one(std::sin(scalar(sub(0))));
    case NodeKind::exp: return one_by_one(std::exp(scalar(sub(0))));
    case NodeKind::conj: return sub(0).conjugate();
    case NodeKind::transpose: return sub(0).transpose();
    case NodeKind::sandwich: {
      auto q = sub(0);
      return q * sub(1) * q.transpose();
    }
    case NodeKind::matrix: {
      ComplexMatrix m(n.rows, n.cols);
      for (std::size_t r = 0; r < n.rows; ++r)
        for (std::size_t c = 0; c < n.cols; ++c) m(r, c) = scalar(sub(r * n.cols + c));
      return m;
    }
  }
  throw InvalidArgument("unknown node kind");
}

// ---- trig expansion -------------------------------------------------------------

struct Trig {
  std::size_t rows = 1, cols = 1;
  CoefficientTable table;
};

Trig trig_constant(int k, const ComplexMatrix& value) {
  Trig t{value.rows(), value.cols(), {}};
  t.table.emplace(MultiIndex(k, 0), value);
  return t;
}

void accumulate(CoefficientTable& table, const MultiIndex& j, const ComplexMatrix& c) {
  auto [it, fresh] = table.try_emplace(j, c);
  if (!fresh) it->second += c;
}

Trig trig_product(const Trig& a, const Trig& b) {
  const bool a_scalar = a.rows == 1 && a.cols == 1;
  const bool b_scalar = b.rows == 1 && b.cols == 1;
  Trig out;
  out.rows = a_scalar ? b.rows : a.rows;
  out.cols = b_scalar && !a_scalar ? a.cols : b.cols;
  for (const auto& [ja, ca] : a.table)
    for (const auto& [jb, cb] : b.table) {
      ComplexMatrix term = a_scalar ? ca(0, 0) * cb : b_scalar ? cb(0, 0) * ca : ca * cb;
      accumulate(out.table, ja + jb, term);
    }
  return out;
}

Trig trig_combine(const Trig& a, const Trig& b, double sign) {
  Trig out = a;
  for (const auto& [j, c] : b.table) accumulate(out.table, j, cplx(sign) * c);
  return out;
}

Trig trig_scale(Trig t, cplx alpha) {
  for (auto& [j, c] : t.table) c *= alpha;
  return t;
}

std::optional<cplx> constant_value(const Trig& t, int k) {
  if (t.rows != 1 || t.cols != 1) return std::nullopt;
  cplx v{};
  for (const auto& [j, c] : t.table) {
    if (c(0, 0) == cplx{}) continue;
    if (!(j == MultiIndex(k, 0))) return std::nullopt;
    v = c(0, 0);
  }
  return v;
}

/// c0 + sum_d a_d x_d.
struct Affine {
  cplx c0{};
  std::array<cplx, 3> a{};
  bool constant() const { return a[0] == cplx{} && a[1] == cplx{} && a[2] == cplx{}; }
};

class Expander {
public:
  Expander(int k, const Parameters& params) : k_(k), params_(params) {}

  std::optional<Trig> trig(const Node& n) const {
    auto sub = [&](std::size_t i) { return trig(*n.children[i]); };
    switch (n.kind) {
      case NodeKind::number: return trig_constant(k_, one_by_one(n.value));
      case NodeKind::parameter: return trig_constant(k_, one_by_one(param(n)));
      case NodeKind::variable: return std::nullopt;
      case NodeKind::negate: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        return trig_scale(*a, -1.0);
      }
      case NodeKind::add:
      case NodeKind::subtract: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        return trig_combine(*a, *b, n.kind == NodeKind::add ? 1.0 : -1.0);
      }
      case NodeKind::multiply: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        return trig_product(*a, *b);
      }
      case NodeKind::divide: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        auto c = constant_value(*b, k_);
        if (!c || *c == cplx{}) return std::nullopt;
        return trig_scale(*a, 1.0 / *c);
      }
      case NodeKind::power: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        if (n.exponent < 0) {
          auto c = constant_value(*a, k_);
          if (!c || *c == cplx{}) return std::nullopt;
          return trig_constant(k_, one_by_one(std::pow(*c, n.exponent)));
        }
        Trig result = trig_constant(k_, ComplexMatrix::identity(a->rows));
        for (int q = 0; q < n.exponent; ++q) result = trig_product(result, *a);
        return result;
      }
      case NodeKind::cos:
      case NodeKind::sin:
      case NodeKind::exp: return elementary(n);
      case NodeKind::conj: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        Trig out{a->rows, a->cols, {}};
        for (const auto& [j, c] : a->table) out.table.emplace(-j, c.conjugate());
        return out;
      }
      case NodeKind::transpose: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        Trig out{a->cols, a->rows, {}};
        for (const auto& [j, c] : a->table) out.table.emplace(j, c.transpose());
        return out;
      }
      case NodeKind::sandwich: {
        auto q = sub(0), a = sub(1);
        if (!q || !a) return std::nullopt;
        Trig qt{q->cols, q->rows, {}};
        for (const auto& [j, c] : q->table) qt.table.emplace(j, c.transpose());
        return trig_product(trig_product(*q, *a), qt);
      }
      case NodeKind::matrix: {
        Trig out{n.rows, n.cols, {}};
        for (std::size_t e = 0; e < n.children.size(); ++e) {
          auto t = sub(e);
          if (!t) return std::nullopt;
          for (const auto& [j, c] : t->table) {
            auto [it, fresh] = out.table.try_emplace(j, ComplexMatrix(n.rows, n.cols));
            it->second(e / n.cols, e % n.cols) += c(0, 0);
          }
        }
        return out;
      }
    }
    return std::nullopt;
  }

  std::optional<Affine> affine(const Node& n) const {
    auto sub = [&](std::size_t i) { return affine(*n.children[i]); };
    switch (n.kind) {
      case NodeKind::number: return Affine{n.value, {}};
      case NodeKind::parameter: return Affine{param(n), {}};
      case NodeKind::variable: {
        Affine a;
        a.a[static_cast<std::size_t>(n.index)] = 1.0;
        return a;
      }
      case NodeKind::negate: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        return scaled(*a, -1.0);
      }
      case NodeKind::add:
      case NodeKind::subtract: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        const double sign = n.kind == NodeKind::add ? 1.0 : -1.0;
        Affine out{a->c0 + sign * b->c0, {}};
        for (std::size_t d = 0; d < 3; ++d) out.a[d] = a->a[d] + sign * b->a[d];
        return out;
      }
      case NodeKind::multiply: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        if (a->constant()) return scaled(*b, a->c0);
        if (b->constant()) return scaled(*a, b->c0);
        return std::nullopt;
      }
      case NodeKind::divide: {
        auto a = sub(0), b = sub(1);
        if (!a || !b || !b->constant() || b->c0 == cplx{}) return std::nullopt;
        return scaled(*a, 1.0 / b->c0);
      }
      case NodeKind::power: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        if (n.exponent == 1) return a;
        if (a->constant()) return Affine{std::pow(a->c0, n.exponent), {}};
        return std::nullopt;
      }
      case NodeKind::cos:
      case NodeKind::sin:
      case NodeKind::exp: {
        auto a = sub(0);
        if (!a || !a->constant()) return std::nullopt;
        const cplx v = n.kind == NodeKind::cos   ? std::cos(a->c0)
                       : n.kind == NodeKind::sin ? std::sin(a->c0)
                                                 : std::exp(a->c0);
        return Affine{v, {}};
      }
      case NodeKind::conj: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        Affine out{std::conj(a->c0), {}};
        for (std::size_t d = 0; d < 3; ++d) out.a[d] = std::conj(a->a[d]);
        return out;
      }
      case NodeKind::transpose: return sub(0);
      case NodeKind::matrix:
        if (n.children.size() == 1) return sub(0);
        return std::nullopt;
      case NodeKind::sandwich: return std::nullopt;
    }
    return std::nullopt;
  }

private:
  static Affine scaled(Affine a, cplx s) {
    a.c0 *= s;
    for (auto& v : a.a) v *= s;
    return a;
  }

  double param(const Node& n) const {
    auto it = params_.find(n.name);
    if (it == params_.end()) throw ParseError("unbound parameter", n.line, n.column, n.name);
    return it->second;
  }

  // Integer frequency vector m with coefficients == factor * m, if any.
  std::optional<MultiIndex> frequencies(const Affine& a, cplx factor) const {
    MultiIndex m(k_, 0);
    for (int d = 0; d < 3; ++d) {
      const cplx q = a.a[static_cast<std::size_t>(d)] / factor;
      if (d >= k_) {
        if (q != cplx{}) return std::nullopt;
        continue;
      }
      const double rounded = std::round(q.real());
      if (std::abs(q.imag()) > 1e-12 || std::abs(q.real() - rounded) > 1e-12) return std::nullopt;
      if (std::abs(rounded) > 1e6) return std::nullopt;
      m[d] = static_cast<int>(rounded);
    }
    return m;
  }

  std::optional<Trig> elementary(const Node& n) const {
    auto a = affine(*n.children[0]);
    if (!a) return std::nullopt;
    Trig out;
    if (n.kind == NodeKind::exp) {
      // exp(c0 + i <m, x>) = e^{c0} e^{i<m,x>}
      auto m = frequencies(*a, 1i);
      if (!m) return std::nullopt;
      out.table.emplace(*m, one_by_one(std::exp(a->c0)));
      return out;
    }
    auto m = frequencies(*a, 1.0);
    if (!m) return std::nullopt;
    const cplx up = std::exp(1i * a->c0), down = std::exp(-1i * a->c0);
    if (n.kind == NodeKind::cos) {
      accumulate(out.table, *m, one_by_one(0.5 * up));
      accumulate(out.table, -*m, one_by_one(0.5 * down));
    } else {
      accumulate(out.table, *m, one_by_one(up / 2i));
      accumulate(out.table, -*m, one_by_one(-down / 2i));
    }
    return out;
  }

  int k_;
  const Parameters& params_;
};

// ---- singular-set detection -------------------------------------------------------

void variables_in(const Node& n, std::set<int>& out) {
  if (n.kind == NodeKind::variable) out.insert(n.index);
  for (const auto& c : n.children) variables_in(*c, out);
}

/// Ascending polynomial coefficients in variable `var`, if n is a polynomial.
std::optional<std::vector<cplx>> polynomial(const Node& n, int var, const Parameters& params) {
  using Poly = std::vector<cplx>;
  auto sub = [&](std::size_t i) { return polynomial(*n.children[i], var, params); };
  auto add = [](Poly a, const Poly& b, double sign) {
    if (a.size() < b.size()) a.resize(b.size());
    for (std::size_t q = 0; q < b.size(); ++q) a[q] += sign * b[q];
    return a;
  };
  auto mul = [](const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1);
    for (std::size_t p = 0; p < a.size(); ++p)
      for (std::size_t q = 0; q < b.size(); ++q) out[p + q] += a[p] * b[q];
    return out;
  };
  std::set<int> vars;
  variables_in(n, vars);
  if (vars.empty()) {
    if (!(n.rows == 1 && n.cols == 1)) return std::nullopt;
    const std::vector<double> x(3, 0.0);
    return Poly{scalar(eval(n, x, params))};
  }
  switch (n.kind) {
    case NodeKind::variable: return Poly{0.0, 1.0};
    case NodeKind::negate: {
      auto a = sub(0);
      if (!a) return std::nullopt;
      return add(Poly{}, *a, -1.0);
    }
    case NodeKind::add:
    case NodeKind::subtract: {
      auto a = sub(0), b = sub(1);
      if (!a || !b) return std::nullopt;
      return add(*a, *b, n.kind == NodeKind::add ? 1.0 : -1.0);
    }
    case NodeKind::multiply: {
      auto a = sub(0), b = sub(1);
      if (!a || !b) return std::nullopt;
      return mul(*a, *b);
    }
    case NodeKind::divide: {
      auto a = sub(0), b = sub(1);
      if (!a || !b || b->size() != 1 || (*b)[0] == cplx{}) return std::nullopt;
      for (auto& c : *a) c /= (*b)[0];
      return a;
    }
    case NodeKind::power: {
      auto a = sub(0);
      if (!a || n.exponent < 0) return std::nullopt;
      Poly out{1.0};
      for (int q = 0; q < n.exponent; ++q) out = mul(out, *a);
      return out;
    }
    case NodeKind::matrix:
      if (n.children.size() == 1) return sub(0);
      return std::nullopt;
    default: return std::nullopt;
  }
}

CVector polynomial_roots(std::vector<cplx> c) {
  double scale = 0;
  for (auto v : c) scale = std::max(scale, std::abs(v));
  while (!c.empty() && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
  if (c.size() <= 1) return {};
  const std::size_t deg = c.size() - 1;
  ComplexMatrix companion(deg, deg);
  for (std::size_t q = 0; q < deg; ++q) {
    companion(0, q) = -c[deg - 1 - q] / c[deg];
    if (q + 1 < deg) companion(q + 1, q) = 1.0;
  }
  auto roots = eig_dense(companion).eigenvalues;
  // Newton polish against the original coefficients.
  for (auto& z : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx p = 0, dp = 0;
      for (std::size_t q = c.size(); q-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[q];
      }
      if (dp == cplx{}) break;
      z -= p / dp;
    }
  }
  return roots;
}

std::vector<double> real_zeros(const Node& den, int var, int k, const Parameters& params) {
  constexpr double pi = std::numbers::pi;
  std::vector<double> zeros;
  if (auto poly = polynomial(den, var, params)) {
    for (auto z : polynomial_roots(*poly))
      if (std::abs(z.imag()) <= 1e-8 * (1 + std::abs(z)) && z.real() >= -pi && z.real() <= pi)
        zeros.push_back(z.real());
    return zeros;
  }
  // Trigonometric polynomial p(e^{ix}): zeros on the unit circle.
  Expander ex(k, params);
  auto t = ex.trig(den);
  if (!t) return zeros;
  int r = 0;
  for (const auto& [j, c] : t->table) r = std::max(r, std::abs(j[var]));
  std::vector<cplx> coeffs(static_cast<std::size_t>(2 * r + 1));
  for (const auto& [j, c] : t->table) coeffs[static_cast<std::size_t>(j[var] + r)] += c(0, 0);
  for (auto z : polynomial_roots(coeffs))
    if (std::abs(std::abs(z) - 1.0) <= 1e-8) zeros.push_back(std::arg(z));
  return zeros;
}

void collect_singular(const Node& n, int k, const Parameters& params,
                      std::vector<SingularHyperplane>& out) {
  for (const auto& c : n.children) collect_singular(*c, k, params, out);
  const Node* den = nullptr;
  if (n.kind == NodeKind::divide) den = n.children[1].get();
  if (n.kind == NodeKind::power && n.exponent < 0) den = n.children[0].get();
  if (!den) return;

  // Probe points: reject denominators that vanish identically.
  static constexpr std::array<std::array<double, 3>, 6> probes{{{0.3711, -1.234, 2.101},
                                                               {-2.77, 0.513, -0.061},
                                                               {1.618, 2.941, -2.203},
                                                               {-0.905, -2.488, 1.337},
                                                               {2.5, 0.07, 0.881},
                                                               {-1.9, 1.72, -2.95}}};
  bool all_zero = true;
  for (const auto& p : probes)
    if (std::abs(scalar(eval(*den, p, params))) > 1e-13) all_zero = false;
  if (all_zero)
    throw ParseError("division by an identically zero expression", den->line, den->column, "/");

  std::set<int> vars;
  variables_in(*den, vars);
  if (vars.size() != 1) return;
  const int var = *vars.begin();
  for (double z : real_zeros(*den, var, k, params)) {
    SingularHyperplane h{var, z};
    bool dup = false;
    for (const auto& e : out)
      if (e.variable == var && std::abs(e.value - z) < 1e-12) dup = true;
    if (!dup) out.push_back(h);
  }
}

void check_parameters(const Node& n, const Parameters& params) {
  if (n.kind == NodeKind::parameter && !params.count(n.name))
    throw ParseError("unbound parameter", n.line, n.column, n.name);
  for (const auto& c : n.children) check_parameters(*c, params);
}

}  // namespace

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.rows != b.rows || a.cols != b.cols) return false;
  if (a.value != b.value || a.index != b.index || a.exponent != b.exponent || a.name != b.name)
    return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_tree(*a.children[i], *b.children[i])) return false;
  return true;
}

NodePtr parse(std::string_view text, int k) {
  if (k < 1 || k > 3) throw InvalidArgument("k must be 1, 2 or 3");
  return Parser(text, k).parse_all();
}

std::string print(const Node& root) {
  std::string out;
  print_into(root, out);
  return out;
}

ComplexMatrix interpret(const Node& root, std::span<const double> x, const Parameters& params) {
  return eval(root, x, params);
}

MatrixSymbol compile(const NodePtr& root, int k, int s, const Parameters& params,
                     std::string name) {
  if (!root) throw InvalidArgument("null expression");
  check_parameters(*root, params);
  if (root->rows != static_cast<std::size_t>(s) || root->cols != static_cast<std::size_t>(s))
    throw ParseError("expression is " + std::to_string(root->rows) + "x" +
                         std::to_string(root->cols) + ", expected " + std::to_string(s) + "x" +
                         std::to_string(s),
                     root->line, root->column, "");
  std::vector<SingularHyperplane> singular;
  collect_singular(*root, k, params, singular);

  if (auto t = Expander(k, params).trig(*root))
    return MatrixSymbol::trig(k, s, std::move(t->table), std::move(name));

  auto evaluator = [root, params](std::span<const double> x) { return eval(*root, x, params); };
  return MatrixSymbol::general(k, s, std::move(evaluator), std::move(name), std::move(singular));
}

MatrixSymbol compile_text(std::string_view text, int k, int s, const Parameters& params,
                          std::string name) {
  return compile(parse(text, k), k, s, params, std::move(name));
}

}  // namespace toepspec::dsl
