#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hp3/algebra/rat.hpp"
#include "hp3/algebra/symbol.hpp"

namespace hp3 {

/// Power product of symbols, stored sparsely as (symbol id, exponent > 0)
/// pairs sorted by symbol id.
class Monomial {
 public:
  using Factor = std::pair<std::uint32_t, std::uint32_t>;

  Monomial() = default;
  explicit Monomial(Symbol s, std::uint32_t exponent = 1);

  const std::vector<Factor>& factors() const { return factors_; }
  std::uint32_t degree() const { return degree_; }
  std::uint32_t exponent(Symbol s) const;
  bool is_one() const { return factors_.empty(); }

  /// Exponent overflow past 2^31 throws std::overflow_error.
  Monomial operator*(const Monomial& o) const;
  /// Requires divides(o, *this).
  Monomial operator/(const Monomial& o) const;
  bool divisible_by(const Monomial& o) const;
  Monomial without(Symbol s) const;

  static Monomial gcd(const Monomial& a, const Monomial& b);

  /// Graded lexicographic order; earlier symbols are more significant.
  friend std::strong_ordering grlex(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Factor> factors_;
  std::uint32_t degree_ = 0;
};

/// Multivariate polynomial with exact rational coefficients. Terms are kept
/// sorted by decreasing grlex order and never carry a zero coefficient, so
/// structural equality is polynomial equality.
class MPoly {
 public:
  struct Term {
    Monomial mono;
    Rat coeff;
    friend bool operator==(const Term&, const Term&) = default;
  };

  MPoly() = default;
  MPoly(const Rat& c);  // NOLINT(google-explicit-constructor)
  MPoly(long c) : MPoly(Rat(c)) {}  // NOLINT(google-explicit-constructor)
  explicit MPoly(Symbol s);
  MPoly(Monomial m, Rat c);

  /// Builds a canonical polynomial from arbitrary (possibly repeated or zero) terms.
  static MPoly from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_one()); }
  /// Coefficient of the constant monomial (zero when absent).
  Rat constant_term() const;
  const Term& leading() const { return terms_.front(); }
  std::uint32_t total_degree() const;
  std::uint32_t degree_in(Symbol s) const;
  /// Smallest exponent of s over all terms (0 for the zero polynomial).
  std::uint32_t min_degree_in(Symbol s) const;
  std::set<Symbol> free_symbols() const;

  MPoly operator-() const;
  MPoly& operator+=(const MPoly& o);
  MPoly& operator-=(const MPoly& o);
  MPoly& operator*=(const MPoly& o) { return *this = *this * o; }
  friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
  friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
  friend MPoly operator*(const MPoly& a, const MPoly& b);
  friend bool operator==(const MPoly&, const MPoly&) = default;

  MPoly scaled(const Rat& c) const;
  MPoly times(const Monomial& m) const;
  MPoly pow(unsigned k) const;
  MPoly diff(Symbol s) const;

  /// Exact quotient if `d` divides `*this`, otherwise nullopt.
  std::optional<MPoly> divide_exact(const MPoly& d) const;
  /// Quotient by a monomial that divides every term.
  MPoly divide_monomial(const Monomial& m) const;
  /// Largest monomial dividing every term (1 for zero).
  Monomial monomial_content() const;
  /// Positive rational c such that (*this / c) has coprime integer
  /// coefficients; 1 for zero.
  Rat content() const;

  /// Collects coefficients of powers of s: result[k] multiplies s^k.
  std::vector<MPoly> coefficients_in(Symbol s) const;

  /// Value at an exact point; every free symbol must be bound.
  Rat evaluate(const std::map<Symbol, Rat>& point) const;
  /// Replaces the listed symbols by constants, leaving the rest symbolic.
  MPoly partial_evaluate(const std::map<Symbol, Rat>& point) const;

 private:
  explicit MPoly(std::vector<Term> sorted_terms, int /*tag*/) : terms_(std::move(sorted_terms)) {}
  std::vector<Term> terms_;
};

}  // namespace hp3
