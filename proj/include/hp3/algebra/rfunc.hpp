#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "hp3/algebra/mpoly.hpp"

namespace hp3 {

/// Thrown when an operation would put the zero polynomial in a denominator.
class ZeroDenominator : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Element of the fraction field Q(symbols), stored as num/den.
///
/// Canonicalization removes common monomial factors, scales so that `den` has
/// coprime integer coefficients and a positive grlex-leading coefficient, and
/// drops `den` altogether when it divides `num` exactly. No multivariate GCD is
/// attempted, so two equal functions may have different representations;
/// `operator==` and `is_zero` compare by cross-multiplication and are exact.
class RFunc {
 public:
  RFunc() : den_(1) {}
  RFunc(const MPoly& p) : num_(p), den_(1) {}  // NOLINT(google-explicit-constructor)
  RFunc(const Rat& c) : num_(c), den_(1) {}    // NOLINT(google-explicit-constructor)
  RFunc(long c) : num_(c), den_(1) {}          // NOLINT(google-explicit-constructor)
  explicit RFunc(Symbol s) : num_(s), den_(1) {}
  /// Throws ZeroDenominator if den is the zero polynomial.
  RFunc(MPoly num, MPoly den);

  const MPoly& num() const { return num_; }
  const MPoly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  /// Value of a constant function; throws std::domain_error otherwise.
  Rat constant_value() const;
  std::set<Symbol> free_symbols() const;
  /// Total number of stored terms in num and den.
  std::size_t size() const { return num_.size() + den_.size(); }

  RFunc operator-() const { return RFunc(-num_, den_, Canonical{}); }
  RFunc& operator+=(const RFunc& o);
  RFunc& operator-=(const RFunc& o) { return *this += -o; }
  RFunc& operator*=(const RFunc& o);
  /// Throws ZeroDenominator when o is the zero function.
  RFunc& operator/=(const RFunc& o);
  friend RFunc operator+(RFunc a, const RFunc& b) { return a += b; }
  friend RFunc operator-(RFunc a, const RFunc& b) { return a -= b; }
  friend RFunc operator*(RFunc a, const RFunc& b) { return a *= b; }
  friend RFunc operator/(RFunc a, const RFunc& b) { return a /= b; }
  friend bool operator==(const RFunc& a, const RFunc& b);

  RFunc pow(int k) const;
  RFunc diff(Symbol s) const;

  /// Exact value; throws ZeroDenominator if the denominator vanishes there.
  Rat evaluate(const std::map<Symbol, Rat>& point) const;
  /// Substitutes constants for some symbols.
  RFunc partial_evaluate(const std::map<Symbol, Rat>& point) const;

 private:
  struct Canonical {};
  RFunc(MPoly num, MPoly den, Canonical) : num_(std::move(num)), den_(std::move(den)) {}
  void canonicalize();

  MPoly num_;
  MPoly den_;
};

using Bindings = std::map<Symbol, RFunc>;

/// Simultaneous substitution of symbols by rational functions. Throws
/// ZeroDenominator if the result's denominator is identically zero.
RFunc substitute(const RFunc& e, const Bindings& bindings);
RFunc substitute(const MPoly& e, const Bindings& bindings);

/// True when the denominator is c * t^k, i.e. the function is a polynomial
/// in every symbol other than t with coefficients in Q[t, 1/t].
bool den_is_t_monomial(const RFunc& e, Symbol t = sym("t"));

/// Exponent k of the largest power of t in the denominator (0 if none).
unsigned t_pole_order(const RFunc& e, Symbol t = sym("t"));

/// Order of e along the divisor s = 0: v such that e = s^v * (A/B) with A, B
/// not divisible by s. Undefined (returns 0) for the zero function.
int order_along(const RFunc& e, Symbol s);

}  // namespace hp3
