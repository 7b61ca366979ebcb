#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hp3/algebra/rfunc.hpp"

namespace hp3 {

/// Syntax error carrying the 0-based byte offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses the expression grammar:
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' INTEGER)?
///   primary := INTEGER | IDENT | '(' expr ')'
///
/// Identifiers are [A-Za-z_][A-Za-z0-9_]*; whitespace is ignored. A rational
/// literal p/q is the quotient of two integers. Throws ParseError on bad
/// syntax and ZeroDenominator on division by the zero polynomial.
RFunc parse(std::string_view text);

/// Shorthand used throughout the model tables.
inline RFunc operator""_rf(const char* text, std::size_t n) { return parse({text, n}); }

/// Deterministic printing in the same grammar, terms in decreasing grlex
/// order. parse(to_string(e)) == e structurally.
std::string to_string(const MPoly& p);
std::string to_string(const RFunc& e);

}  // namespace hp3
