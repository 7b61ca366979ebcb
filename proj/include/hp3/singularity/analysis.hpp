#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hp3/algebra/eigen_support.hpp"
#include "hp3/models/painleve.hpp"

namespace hp3 {

/// Rational roots, with multiplicity and in increasing order, of the
/// polynomial sum coeffs[k] * x^k.
std::vector<Rat> rational_roots(const std::vector<Rat>& coeffs);

/// Coefficients c0..cn of det(lambda*I - m) (Faddeev-LeVerrier).
std::vector<RFunc> characteristic_polynomial(const Mat<RFunc>& m);

/// A locus on the boundary divisor {divisor = 0} of some chart.
struct BoundaryLocus {
  std::string name;
  std::string chart_id;
  Symbol divisor;
  /// Coordinates fixed on the locus (must include divisor -> 0).
  Bindings equations;
  /// Coordinates left free along the locus.
  std::vector<Symbol> free;
};

/// The field has a pole of order >= 2 along the divisor, so it is not of the
/// form dx1/dt = g1, dxi/dt = gi/x1.
class NotLogarithmic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// True iff, writing the field as dx1/dt = g1, dxi/dt = gi/x1 with x1 the
/// divisor coordinate, every gi (i != 1) vanishes identically on the locus.
/// Throws NotLogarithmic when the field is not of that form near the locus.
bool check_accessible(const ODESystem& s, const BoundaryLocus& locus);

/// Coarse numeric scan of the divisor of a chart for points where all gi
/// vanish; heuristic only (grid of `n` points per free coordinate on
/// [-range, range], fixed t).
struct ScanHit {
  std::vector<double> coords;  // free coordinates in state order (divisor omitted)
  double max_abs_g;
};
std::vector<ScanHit> scan_accessible(const ODESystem& s, Symbol divisor, double t, const Bindings& params,
                                     int n = 11, double range = 1.0, double tol = 1e-9);

/// Ordered eigenvalues of the linearization at an accessible point.
struct LocalIndex {
  std::vector<RFunc> eigenvalues;
  /// Jacobian of divisor * rhs at the point.
  Mat<RFunc> matrix;
  /// Characteristic polynomial coefficients c0..cn of det(lambda - M).
  std::vector<RFunc> charpoly;
  /// False when the eigenvalues could not be extracted; `eigenvalues` is then
  /// empty and `charpoly` is the answer.
  bool factored = true;
};

/// Multiplies every component by the divisor coordinate, takes the Jacobian
/// at `point` (coordinates not listed are 0) and extracts its eigenvalues:
/// the diagonal for triangular matrices (coordinate order), rational roots
/// for constant matrices, otherwise unfactored.
LocalIndex local_index(const ODESystem& s, Symbol divisor, const Bindings& point = {});

struct IndexRatios {
  std::vector<RFunc> ratios;  // (1, a2/a1, ..., an/a1)
  bool integral = false;
};
/// Throws std::domain_error if a1 is identically zero or the index is
/// unfactored.
IndexRatios index_ratios(const LocalIndex& ix);

/// alpha-test: t = t0 + alpha*T, x_i = point_i + alpha*X_i, alpha -> 0 term by
/// term. Returns the reduced system in `scaled` (one per state variable)
/// with independent variable T. Throws std::domain_error when some
/// component has negative order in alpha (no limit).
ODESystem alpha_test(const ODESystem& s, const Bindings& point, Symbol t0, const std::vector<Symbol>& scaled,
                     Symbol T = sym("T"));

/// Residuals d(sol_i)/dT - rhs_i(sol) of a candidate solution (maps each
/// state variable to an RFunc in T and constants).
std::map<Symbol, RFunc> solution_residual(const ODESystem& s, const Bindings& solution);

/// Dominant balance x_i ~ A_i * tau^(-m_i) at a generic point t1.
struct LeadingOrders {
  std::vector<int> exponents;     // pole orders m_i, per state variable
  std::vector<RFunc> coeffs;      // exact leading coefficients (valid when exact)
  std::vector<double> numeric;    // numeric leading coefficients
  std::vector<bool> free;         // coefficient left undetermined by the balance
  bool exact = true;
};

/// Searches pole orders in [0..bound]^n (at least one positive). Terms of
/// the right-hand side are evaluated at t = t1 (a fresh symbol when nullopt).
/// Balances are solved exactly when the equations can be solved one unknown
/// at a time with rational roots, numerically (Newton) otherwise.
std::vector<LeadingOrders> painleve_leading_orders(const ODESystem& s, int bound, std::optional<Rat> t1 = {});

/// Centered chart data used by the singularity report: the system written in
/// local coordinates, its divisor and the point.
struct SingularPoint {
  std::string name;
  ODESystem system;
  Symbol divisor;
  Bindings point;
  BoundaryLocus locus;
};

/// Jet system in (P, Q, R) centered on r = ((2a1-1)p + a0)/t^2, divisor Q,
/// evaluated at P = 0.
SingularPoint jet_point(const ModelSet& m = default_models());
/// C1 in the chart U1 (X1 = Z1 = 0, Y1 free), at Y1 = 0.
SingularPoint c1_point(const ModelSet& m = default_models());
/// Origin of U3.
SingularPoint p2_point(const ModelSet& m = default_models());
/// The point (-1/2, -1/4, 0) of the weighted chart (x/z, y/z^2, 1/z) in
/// coordinates (X, Y, Z) = (p - 2/3 q, q, r) with p = X+1/2, q = Y+1/4, r = Z.
SingularPoint p_point(const ModelSet& m = default_models());

}  // namespace hp3
