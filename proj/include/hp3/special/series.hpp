#pragma once

#include <array>
#include <string>
#include <vector>

#include "hp3/algebra/rat.hpp"
#include "hp3/numerics/integrate.hpp"
#include "hp3/verify/checks.hpp"

namespace hp3 {

/// Truncated power series sum_{k<=order} c_k t^k with exact coefficients.
/// Results of arithmetic are exact up to their own order (the smaller of
/// the operands' orders, minus one per derivative).
class PowerSeries {
 public:
  PowerSeries() = default;
  /// Zero-pads or truncates `coeffs` to order + 1 entries.
  PowerSeries(std::vector<Rat> coeffs, int order);
  static PowerSeries constant(const Rat& c, int order);
  /// The series t.
  static PowerSeries variable(int order);

  int order() const { return order_; }
  const Rat& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  const std::vector<Rat>& coefficients() const { return c_; }

  PowerSeries operator+(const PowerSeries& o) const;
  PowerSeries operator-(const PowerSeries& o) const;
  PowerSeries operator-() const;
  PowerSeries operator*(const PowerSeries& o) const;
  PowerSeries operator*(const Rat& s) const;
  /// Throws std::domain_error when o has a zero constant term.
  PowerSeries operator/(const PowerSeries& o) const;
  PowerSeries derivative() const;
  /// Multiplication by t (order grows by one).
  PowerSeries times_t() const;
  /// Division by t; throws std::domain_error when the constant term is
  /// nonzero (the quotient would have a 1/t pole).
  PowerSeries divided_by_t() const;
  /// Same series at a lower order.
  PowerSeries truncated(int order) const;

  double evaluate(double t) const;
  Rat evaluate(const Rat& t) const;

 private:
  std::vector<Rat> c_;
  int order_ = 0;
};

/// Rising factorial a (a+1) ... (a+k-1); (a)_0 = 1.
Rat pochhammer(const Rat& a, int k);

/// F(a; t) = sum_k t^k / ((a)_k k!) to order N. Throws std::invalid_argument
/// for a in {0, -1, -2, ...} or N < 1.
PowerSeries F_series(const Rat& a, int N);

/// t Z'' + 2 Z' - Z = 0 for Z = F(a; t), coefficient by coefficient up to
/// order N - 2. The seed uses a = 2.
CheckReport verify_Z_ode(int N = 40, const Rat& a = Rat(2));

/// z = 2 Z'/Z satisfies z' = -z^2/2 - 2z/t + 2/t up to order N - 3, with
/// Z = F(2; t).
CheckReport verify_riccati_symbolic(int N = 40);
/// Same for a given Z; fails with a 1/t pole when z(0) != 1.
CheckReport verify_riccati_symbolic(const PowerSeries& Z);

/// Terms of F(a; t) needed so that the tail at |t| is below 1e-14 relative,
/// starting from N = 40 and doubling.
int terms_for(const Rat& a, double t);

/// Z(t) = F(a; t) and Z'(t) in double precision with adaptive truncation.
std::array<double, 2> evaluate_F(const Rat& a, double t);

/// The special solution (0, 0, 2 Z'(t)/Z(t)) at (a0, a1) = (0, 3/2).
/// Throws std::domain_error where Z(t) vanishes.
std::array<double, 3> seed_solution(double t);
/// Exact truncation at a rational point with N terms.
std::array<Rat, 3> seed_solution(const Rat& t, int N = 40);

/// Parameters of the special solution.
inline constexpr double seed_alpha0 = 0.0;
inline constexpr double seed_alpha1 = 1.5;

struct HierarchyStep {
  int level = 0;
  double alpha0 = 0, alpha1 = 1.5;
  /// Transformations applied to the seed, in order ("" for the seed).
  std::string maps;
  std::string description;
  /// The image was computed and its residual checked.
  bool certified = false;
  double residual = 0;
};

/// The seed at (0, 3/2) and its images at a0 = -2, -4, ... (a1 = 3/2),
/// certified by the finite-difference residual (<= 1e-6) of the mapped
/// trajectory on [t_start, t_end]. Levels no sequence of valid
/// transformations reaches are reported uncertified with the reason.
std::vector<HierarchyStep> hierarchy(int depth, double t_start = 1, double t_end = 4,
                                     const ModelSet& m = default_models());

}  // namespace hp3
