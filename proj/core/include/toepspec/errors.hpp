#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace toepspec {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Evaluation of a symbol at a declared singular point.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Iterative kernel failed to converge. Partial results may be attached by
/// the throwing routine's documented channel.
class NumericFailure : public Error {
public:
  using Error::Error;
};

class SingularMatrix : public NumericFailure {
public:
  using NumericFailure::NumericFailure;
};

/// Pointwise inversion of a symbol hit a singular value; carries the sample.
class SingularSymbol : public NumericFailure {
public:
  SingularSymbol(const std::string& what, std::vector<double> x)
      : NumericFailure(what), x_(std::move(x)) {}
  const std::vector<double>& point() const noexcept { return x_; }

private:
  std::vector<double> x_;
};

class ResourceLimit : public Error {
public:
  using Error::Error;
};

class PreconditionViolated : public Error {
public:
  using Error::Error;
};

/// Krylov process lost dimension without reaching the tolerance.
class Stagnation : public NumericFailure {
public:
  using NumericFailure::NumericFailure;
};

/// Lexical, syntactic or typing error in symbol expression text.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line, int column, std::string token)
      : Error(format(msg, line, column, token)),
        line_(line),
        column_(column),
        token_(std::move(token)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& token() const noexcept { return token_; }

private:
  static std::string format(const std::string& msg, int line, int column,
                            const std::string& token) {
    return msg + " at " + std::to_string(line) + ":" + std::to_string(column) +
           (token.empty() ? std::string() : " near '" + token + "'");
  }

  int line_;
  int column_;
  std::string token_;
};

}  // namespace toepspec
