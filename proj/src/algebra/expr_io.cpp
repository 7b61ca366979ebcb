#include "hp3/algebra/expr_io.hpp"

#include <cctype>
#include <limits>
#include <sstream>

namespace hp3 {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  RFunc run() {
    RFunc e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RFunc expr() {
    RFunc acc = term();
    for (;;) {
      if (accept('+'))
        acc += term();
      else if (accept('-'))
        acc -= term();
      else
        return acc;
    }
  }

  RFunc term() {
    RFunc acc = unary();
    for (;;) {
      if (accept('*')) {
        acc *= unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        RFunc d = unary();
        if (d.is_zero()) throw ZeroDenominator("zero denominator at position " + std::to_string(at));
        acc /= d;
      } else {
        return acc;
      }
    }
  }

  RFunc unary() {
    if (accept('-')) return -unary();
    return power();
  }

  RFunc power() {
    RFunc base = primary();
    if (accept('^')) {
      skip_ws();
      const std::size_t at = pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        throw ParseError("expected non-negative integer exponent", at);
      const BigInt e = integer();
      if (e > std::numeric_limits<int>::max()) throw ParseError("exponent too large", at);
      return base.pow(static_cast<int>(e.get_si()));
    }
    return base;
  }

  BigInt integer() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return BigInt(std::string(text_.substr(start, pos_ - start)));
  }

  RFunc primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return RFunc(Rat(integer()));
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      return RFunc(Symbol(text_.substr(start, pos_ - start)));
    }
    if (c == '(') {
      ++pos_;
      RFunc e = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_monomial(std::ostream& os, const Monomial& m) {
  bool first = true;
  for (const auto& [id, e] : m.factors()) {
    if (!first) os << '*';
    first = false;
    os << Symbol::from_id(id).name();
    if (e > 1) os << '^' << e;
  }
}

}  // namespace

RFunc parse(std::string_view text) { return Parser(text).run(); }

std::string to_string(const MPoly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [mono, coeff] : p.terms()) {
    Rat c = coeff;
    if (first) {
      if (sgn(c) < 0) os << '-';
    } else {
      os << (sgn(c) < 0 ? " - " : " + ");
    }
    first = false;
    c = abs(c);
    if (mono.is_one()) {
      os << c.get_str();
    } else {
      if (c != 1) os << c.get_str() << '*';
      print_monomial(os, mono);
    }
  }
  return os.str();
}

std::string to_string(const RFunc& e) {
  if (e.den() == MPoly(1)) return to_string(e.num());
  std::string n = to_string(e.num());
  std::string d = to_string(e.den());
  const bool simple_num = e.num().size() == 1 && e.num().leading().coeff == 1;
  const bool simple_den =
      e.den().size() == 1 && e.den().leading().coeff == 1 && e.den().leading().mono.factors().size() == 1;
  return (simple_num ? n : "(" + n + ")") + "/" + (simple_den ? d : "(" + d + ")");
}

}  // namespace hp3
