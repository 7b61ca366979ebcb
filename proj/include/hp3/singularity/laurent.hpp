#pragma once

#include <map>
#include <set>
#include <vector>

#include "hp3/algebra/eigen_support.hpp"
#include "hp3/models/system.hpp"
#include "hp3/singularity/analysis.hpp"

namespace hp3 {

/// Thrown when a resonance step is singular and inconsistent: the balance
/// admits no formal Laurent solution.
class InconsistentResonance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Truncated formal Laurent solution x_i(t) = sum_k c[i][k] (t - t0)^(k - m_i).
template <class Scalar>
struct LaurentSolution {
  Scalar t0;
  std::vector<Symbol> vars;
  std::vector<int> pole_order;                 // m_i
  std::vector<std::vector<Scalar>> coeffs;     // coeffs[i][k], k = 0..depth
  std::set<int> free_parameter_positions;      // orders k where parameters enter
  std::vector<Symbol> free_parameters;         // f1, f2, ... in order of appearance
  int depth = 0;

  /// Coefficient of (t - t0)^-1 of variable `v` (zero if v is regular).
  Scalar residue(Symbol v) const;
};

/// Exact solver: coefficients are rational functions of the free
/// parameters f1, f2, ... and the system parameters.
LaurentSolution<RFunc> laurent_solve(const ODESystem& s, const LeadingOrders& lead, const Rat& t0, int depth);

/// Floating-point solver: parameters and free-parameter values are numbers;
/// unspecified free parameters are set to 0. Singular steps are detected with
/// |pivot| <= 1e-10 * scale.
LaurentSolution<double> laurent_solve(const ODESystem& s, const LeadingOrders& lead, double t0, int depth,
                                      const std::map<Symbol, double>& params,
                                      const std::vector<double>& free_values = {});

/// tau-order of each residual component when the exact truncation is
/// substituted into the system (a large value stands for "zero through the
/// computed orders").
std::vector<int> laurent_residual_orders(const ODESystem& s, const LaurentSolution<RFunc>& sol);

/// Evaluates the truncation at t0 + tau with numeric system parameters and
/// free-parameter values.
std::vector<double> laurent_evaluate(const LaurentSolution<RFunc>& sol, double tau,
                                     const std::map<Symbol, double>& values);
std::vector<double> laurent_evaluate(const LaurentSolution<double>& sol, double tau);
/// Same for the t-derivative.
std::vector<double> laurent_evaluate_derivative(const LaurentSolution<double>& sol, double tau);

}  // namespace hp3
