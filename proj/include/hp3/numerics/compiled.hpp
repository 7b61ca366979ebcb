#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "hp3/algebra/rfunc.hpp"

namespace hp3 {

/// Polynomial evaluated in double precision over a fixed variable layout.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  /// Every free symbol of p must appear in `layout`; throws
  /// std::invalid_argument otherwise.
  CompiledPoly(const MPoly& p, const std::vector<Symbol>& layout);

  double operator()(std::span<const double> values) const;

 private:
  struct Term {
    double coeff;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> powers;  // (slot, exponent)
  };
  std::vector<Term> terms_;
};

/// Thrown when a compiled rational function is evaluated where its
/// denominator is (numerically) zero.
class NearPole : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rational function evaluated in double precision. The denominator is
/// checked against `pole_tol` before dividing.
class CompiledRFunc {
 public:
  CompiledRFunc() = default;
  CompiledRFunc(const RFunc& f, const std::vector<Symbol>& layout, double pole_tol = 1e-12);

  /// Throws NearPole when |den| < pole_tol.
  double operator()(std::span<const double> values) const;
  /// Same, reporting the pole through `ok` instead of throwing.
  double eval(std::span<const double> values, bool& ok) const;

 private:
  CompiledPoly num_, den_;
  bool den_is_one_ = true;
  double pole_tol_ = 1e-12;
};

/// Rat -> double, exact to rounding.
double to_double_exact(const Rat& r);

}  // namespace hp3
