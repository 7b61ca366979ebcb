#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hp3/algebra/rfunc.hpp"

namespace hp3 {

/// Non-autonomous first-order system d(state)/d(indep) = rhs.
struct ODESystem {
  std::vector<Symbol> state;
  Symbol indep = sym("t");
  std::map<Symbol, RFunc> rhs;
  std::set<Symbol> params;

  const RFunc& operator[](Symbol s) const { return rhs.at(s); }

  /// Checks that rhs keys equal the state and that every free symbol lies in
  /// state, indep or params. Throws std::invalid_argument otherwise.
  void validate() const;

  /// Total derivative of f along the flow: df/dt + sum df/ds * rhs(s).
  RFunc total_derivative(const RFunc& f) const;

  /// Applies a substitution to every right-hand side (parameters, constraints).
  ODESystem substituted(const Bindings& b) const;
};

/// Birational change of coordinates target = forward(source, t, params),
/// with an optional inverse source = inverse(target, t, params).
struct ChartMap {
  std::string id;
  std::vector<Symbol> source_vars;
  std::vector<Symbol> target_vars;
  Bindings forward;
  std::optional<Bindings> inverse;

  /// forward[w] for target w.
  const RFunc& operator[](Symbol w) const { return forward.at(w); }

  /// True when forward(inverse(.)) is the identity on the target variables.
  bool inverse_round_trips() const;
  /// Same check by exact evaluation at `trials` pseudo-random rational
  /// points (deterministic seed); cheap where symbolic composition swells.
  bool inverse_round_trips_sampled(int trials = 8) const;

  ChartMap substituted(const Bindings& b) const;
};

/// Identity chart on the given variables.
ChartMap identity_chart(const std::vector<Symbol>& vars, std::string id = "identity");

/// Applies `second` after `first`; the composite maps first.source to
/// second.target. Inverses compose when both are present.
ChartMap compose(const ChartMap& first, const ChartMap& second);

/// Computes an inverse by back-substitution: repeatedly picks a forward
/// equation w = f that involves a single unsolved source variable s and is
/// linear in s after clearing denominators. Returns nullopt if stuck.
std::optional<Bindings> invert_triangular(const ChartMap& c);

/// Parameter transformation (a0, a1) -> images.
struct ParamMap {
  Bindings images;

  /// Image of the point (a0, a1) given as constants.
  std::map<Symbol, Rat> apply(const std::map<Symbol, Rat>& point) const;
  /// Applies *this first, then `next`.
  ParamMap then(const ParamMap& next) const;
  /// All images affine in the parameters.
  bool is_affine() const;
};

struct Backlund {
  std::string name;
  ChartMap chart;
  ParamMap pmap;
  /// Parameter constraint under which the transformation is a symmetry.
  std::optional<Bindings> validity;
};

/// Symbols for u and its first three t-derivatives.
struct Jet3 {
  Symbol u = sym("u");
  Symbol u1 = sym("u1");
  Symbol u2 = sym("u2");
  Symbol u3 = sym("u3");
};

/// Transports s through c: for each target w, d(forward_w)/dt along s, with
/// the explicit t-dependence of the chart included, re-expressed through the
/// inverse. Throws std::invalid_argument when c has no inverse.
ODESystem pushforward(const ODESystem& s, const ChartMap& c);

/// d(forward_w)/dt along s minus target[w] composed with forward, per target
/// variable. All zero iff c maps solutions of s to solutions of target.
/// Needs no inverse.
std::map<Symbol, RFunc> transport_residual(const ODESystem& s, const ChartMap& c, const ODESystem& target);

/// Determinant of d(forward)/d(source) with t held fixed (3x3 only).
RFunc jacobian_det(const ChartMap& c);

}  // namespace hp3
