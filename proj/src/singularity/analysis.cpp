#include "hp3/singularity/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hp3/algebra/expr_io.hpp"
#include "hp3/numerics/compiled.hpp"

namespace hp3 {
namespace {

Bindings full_point(const ODESystem& s, const Bindings& point) {
  Bindings out;
  for (auto v : s.state) {
    auto it = point.find(v);
    out[v] = it == point.end() ? RFunc(0) : it->second;
  }
  for (const auto& [k, v] : point) out.emplace(k, v);
  return out;
}

std::vector<BigInt> divisors(BigInt n) {
  if (n < 0) n = -n;
  std::vector<BigInt> out;
  for (BigInt d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  return out;
}

}  // namespace

std::vector<Rat> rational_roots(const std::vector<Rat>& coeffs_in) {
  std::vector<Rat> c = coeffs_in;
  while (!c.empty() && c.back() == 0) c.pop_back();
  std::vector<Rat> roots;
  if (c.size() <= 1) return roots;
  // Zero roots.
  std::size_t lead_zero = 0;
  while (lead_zero < c.size() && c[lead_zero] == 0) ++lead_zero;
  for (std::size_t i = 0; i < lead_zero; ++i) roots.push_back(Rat(0));
  c.erase(c.begin(), c.begin() + static_cast<long>(lead_zero));
  // Integer coefficients.
  BigInt l = 1;
  for (const auto& x : c) l = lcm(l, BigInt(x.get_den()));
  std::vector<BigInt> z;
  for (const auto& x : c) z.push_back(BigInt(x * l));
  auto eval = [&](const Rat& r) {
    Rat acc = 0;
    for (auto it = z.rbegin(); it != z.rend(); ++it) acc = acc * r + Rat(*it);
    return acc;
  };
  auto deflate = [&](const Rat& r) {
    // Synthetic division by (x - r), keeping rational coefficients.
    std::vector<Rat> q(z.size() - 1);
    Rat carry = 0;
    for (std::size_t k = z.size() - 1; k >= 1; --k) {
      carry = Rat(z[k]) + carry * r;
      q[k - 1] = carry;
    }
    BigInt m = 1;
    for (const auto& x : q) m = lcm(m, BigInt(x.get_den()));
    z.clear();
    for (const auto& x : q) z.push_back(BigInt(x * m));
  };
  constexpr long kMaxDivisorBound = 1000000000L;
  while (z.size() > 1) {
    if (abs(z.front()) > kMaxDivisorBound || abs(z.back()) > kMaxDivisorBound) break;
    bool found = false;
    for (const auto& p : divisors(z.front())) {
      for (const auto& q : divisors(z.back())) {
        for (int sign : {1, -1}) {
          Rat r(BigInt(sign * p), q);
          r.canonicalize();
          if (eval(r) == 0) {
            roots.push_back(r);
            deflate(r);
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (found) break;
    }
    if (!found) break;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<RFunc> characteristic_polynomial(const Mat<RFunc>& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<RFunc> c(n + 1, RFunc(0));
  c[n] = RFunc(1);
  Mat<RFunc> m = Mat<RFunc>::Constant(n, n, RFunc(0));
  const Mat<RFunc> id = Mat<RFunc>::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    m = a * m + c[n - k + 1] * id;
    const Mat<RFunc> am = a * m;
    RFunc tr(0);
    for (int i = 0; i < n; ++i) tr += am(i, i);
    c[n - k] = -tr / RFunc(k);
  }
  return c;
}

bool check_accessible(const ODESystem& s, const BoundaryLocus& locus) {
  const RFunc d(locus.divisor);
  for (auto v : s.state) {
    const RFunc& f = s[v];
    if (f.is_zero()) continue;
    const int ord = order_along(f, locus.divisor);
    if (v == locus.divisor) {
      if (ord < 0)
        throw NotLogarithmic("d" + v.name() + "/dt has a pole along " + locus.divisor.name() + " = 0");
      continue;
    }
    if (ord < -1)
      throw NotLogarithmic("d" + v.name() + "/dt has a pole of order " + std::to_string(-ord) + " along " +
                           locus.divisor.name() + " = 0");
    RFunc g;
    try {
      g = substitute(f * d, locus.equations);
    } catch (const ZeroDenominator&) {
      throw NotLogarithmic("g for " + v.name() + " is not holomorphic on " + locus.name);
    }
    if (!g.is_zero()) return false;
  }
  return true;
}

std::vector<ScanHit> scan_accessible(const ODESystem& s, Symbol divisor, double t, const Bindings& params, int n,
                                     double range, double tol) {
  std::vector<Symbol> free;
  for (auto v : s.state)
    if (v != divisor) free.push_back(v);
  std::vector<Symbol> layout = s.state;
  layout.push_back(s.indep);
  std::vector<CompiledRFunc> g;
  for (auto v : free) {
    RFunc gi = substitute(s[v] * RFunc(divisor), params);
    gi = substitute(gi, {{divisor, RFunc(0)}});
    g.emplace_back(gi, layout);
  }
  std::vector<ScanHit> hits;
  std::vector<double> vals(layout.size(), 0.0);
  vals.back() = t;
  std::vector<int> idx(free.size(), 0);
  const auto coord = [&](int i) { return n == 1 ? 0.0 : -range + 2 * range * i / (n - 1); };
  while (true) {
    for (std::size_t k = 0; k < free.size(); ++k) {
      const auto pos = std::find(s.state.begin(), s.state.end(), free[k]) - s.state.begin();
      vals[pos] = coord(idx[k]);
    }
    double worst = 0;
    bool ok = true;
    for (const auto& gi : g) {
      bool fine = true;
      const double r = gi.eval(vals, fine);
      if (!fine) {
        ok = false;
        break;
      }
      worst = std::max(worst, std::abs(r));
    }
    if (ok && worst <= tol) {
      ScanHit h{{}, worst};
      for (std::size_t k = 0; k < free.size(); ++k) h.coords.push_back(coord(idx[k]));
      hits.push_back(std::move(h));
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == n) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return hits;
}

LocalIndex local_index(const ODESystem& s, Symbol divisor, const Bindings& point) {
  const int n = static_cast<int>(s.state.size());
  const Bindings at = full_point(s, point);
  LocalIndex out;
  out.matrix = Mat<RFunc>(n, n);
  for (int i = 0; i < n; ++i) {
    const RFunc g = s[s.state[i]] * RFunc(divisor);
    for (int j = 0; j < n; ++j) out.matrix(i, j) = substitute(g.diff(s.state[j]), at);
  }
  out.charpoly = characteristic_polynomial(out.matrix);
  bool lower = true, upper = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i < j && !out.matrix(i, j).is_zero()) lower = false;
      if (i > j && !out.matrix(i, j).is_zero()) upper = false;
    }
  if (lower || upper) {
    for (int i = 0; i < n; ++i) out.eigenvalues.push_back(out.matrix(i, i));
    return out;
  }
  bool constant = std::all_of(out.charpoly.begin(), out.charpoly.end(), [](const RFunc& c) { return c.is_constant(); });
  if (constant) {
    std::vector<Rat> c;
    for (const auto& x : out.charpoly) c.push_back(x.constant_value());
    const auto roots = rational_roots(c);
    if (static_cast<int>(roots.size()) == n) {
      for (const auto& r : roots) out.eigenvalues.emplace_back(r);
      return out;
    }
  }
  out.factored = false;
  return out;
}

IndexRatios index_ratios(const LocalIndex& ix) {
  if (!ix.factored || ix.eigenvalues.empty()) throw std::domain_error("local index is not available in factored form");
  const RFunc& a1 = ix.eigenvalues.front();
  if (a1.is_zero()) throw std::domain_error("leading eigenvalue a1 is identically zero");
  IndexRatios out;
  out.integral = true;
  for (const auto& a : ix.eigenvalues) {
    RFunc r = a / a1;
    if (!r.is_constant() || r.constant_value().get_den() != 1) out.integral = false;
    out.ratios.push_back(std::move(r));
  }
  return out;
}

ODESystem alpha_test(const ODESystem& s, const Bindings& point, Symbol t0, const std::vector<Symbol>& scaled,
                     Symbol T) {
  if (scaled.size() != s.state.size()) throw std::invalid_argument("alpha_test: one scaled symbol per state variable");
  const Symbol alpha = sym("alpha");
  const RFunc al(alpha);
  Bindings b{{s.indep, RFunc(t0) + al * RFunc(T)}};
  for (std::size_t i = 0; i < s.state.size(); ++i) {
    auto it = point.find(s.state[i]);
    const RFunc base = it == point.end() ? RFunc(0) : it->second;
    b[s.state[i]] = base + al * RFunc(scaled[i]);
  }
  ODESystem out;
  out.state = scaled;
  out.indep = T;
  out.params = s.params;
  out.params.insert(t0);
  for (std::size_t i = 0; i < s.state.size(); ++i) {
    const RFunc e = substitute(s[s.state[i]], b);
    RFunc lim(0);
    if (!e.is_zero()) {
      const int v = order_along(e, alpha);
      if (v < 0)
        throw std::domain_error("alpha_test: d" + s.state[i].name() + "/dt has order " + std::to_string(v) +
                                " in alpha; the limit does not exist");
      if (v == 0) lim = e.partial_evaluate({{alpha, Rat(0)}});
    }
    out.rhs[scaled[i]] = lim;
  }
  return out;
}

std::map<Symbol, RFunc> solution_residual(const ODESystem& s, const Bindings& solution) {
  std::map<Symbol, RFunc> out;
  for (auto v : s.state) out[v] = solution.at(v).diff(s.indep) - substitute(s[v], solution);
  return out;
}

// ---------------------------------------------------------------------------
// Dominant balances

namespace {

struct SplitTerm {
  std::vector<std::uint32_t> exps;  // per state variable
  RFunc coeff;                      // in indep and params
};

std::vector<SplitTerm> split_rhs(const ODESystem& s, Symbol v) {
  const RFunc& f = s[v];
  for (auto w : s.state)
    if (f.den().degree_in(w) > 0)
      throw std::invalid_argument("painleve_leading_orders: d" + v.name() + "/dt is not polynomial in the state");
  std::map<std::vector<std::uint32_t>, MPoly> groups;
  for (const auto& term : f.num().terms()) {
    std::vector<std::uint32_t> e;
    Monomial rest = term.mono;
    for (auto w : s.state) {
      e.push_back(term.mono.exponent(w));
      rest = rest.without(w);
    }
    groups[e] += MPoly(rest, term.coeff);
  }
  std::vector<SplitTerm> out;
  for (auto& [e, c] : groups) out.push_back({e, RFunc(c, f.den())});
  return out;
}

struct BalanceSolver {
  std::vector<Symbol> unknowns;
  std::vector<std::vector<Bindings>> unused;

  static MPoly strip(const MPoly& p, const std::vector<Symbol>& unknowns) {
    Monomial c = p.monomial_content();
    Monomial keep;
    for (auto u : unknowns) {
      const auto e = c.exponent(u);
      if (e) keep = keep * Monomial(u, e);
    }
    MPoly q = p.divide_monomial(keep);
    const Rat k = q.content();
    return k == 0 ? q : q.scaled(1 / k);
  }

  bool mentions_unknown(const MPoly& p) const {
    for (auto u : unknowns)
      if (p.degree_in(u) > 0) return true;
    return false;
  }

  /// Exact solutions; sets `stuck` when an equation cannot be handled.
  void solve(std::vector<MPoly> eqs, Bindings assigned, std::vector<Bindings>& out, bool& stuck) const {
    std::vector<MPoly> live;
    for (auto& e : eqs) {
      MPoly p = assigned.empty() ? e : substitute(e, assigned).num();
      if (p.is_zero()) continue;
      p = strip(p, unknowns);
      if (!mentions_unknown(p)) return;  // nonzero constant: no solution on this branch
      live.push_back(std::move(p));
    }
    if (live.empty()) {
      out.push_back(assigned);
      return;
    }
    for (const auto& p : live) {
      std::vector<Symbol> present;
      for (auto u : unknowns)
        if (p.degree_in(u) > 0) present.push_back(u);
      if (present.size() != 1) continue;
      const Symbol u = present.front();
      const auto c = p.coefficients_in(u);
      if (c.size() == 2) {
        const RFunc val = RFunc(-c[0]) / RFunc(c[1]);
        if (val.is_zero()) return;
        Bindings next = assigned;
        next[u] = val;
        solve(live, next, out, stuck);
        return;
      }
      if (std::all_of(c.begin(), c.end(), [](const MPoly& x) { return x.is_constant(); })) {
        std::vector<Rat> rc;
        for (const auto& x : c) rc.push_back(x.constant_term());
        const auto all = rational_roots(rc);
        std::size_t low = 0;
        while (low < rc.size() && rc[low] == 0) ++low;
        // Irrational or complex roots left over: exact path incomplete.
        if (all.size() < rc.size() - 1) stuck = true;
        std::vector<Rat> roots = all;
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        for (const auto& r : roots) {
          if (r == 0) continue;
          Bindings next = assigned;
          next[u] = RFunc(r);
          solve(live, next, out, stuck);
        }
        return;
      }
    }
    stuck = true;
  }
};

std::vector<std::vector<double>> newton_solutions(const std::vector<MPoly>& eqs, const std::vector<Symbol>& unknowns,
                                                  const std::map<Symbol, Rat>& spot) {
  std::vector<MPoly> bound;
  for (const auto& e : eqs) bound.push_back(e.partial_evaluate(spot));
  const int n = static_cast<int>(unknowns.size());
  std::vector<CompiledPoly> f, jac;
  for (const auto& e : bound) {
    f.emplace_back(e, unknowns);
    for (auto u : unknowns) jac.emplace_back(e.diff(u), unknowns);
  }
  const int m = static_cast<int>(bound.size());
  std::vector<std::vector<double>> sols;
  const double starts[] = {1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 0.25, -0.25};
  const int combos = std::min(256, static_cast<int>(std::pow(8.0, n)));
  for (int s = 0; s < combos; ++s) {
    Eigen::VectorXd x(n);
    for (int k = 0, r = s; k < n; ++k, r /= 8) x(k) = starts[r % 8] * (1.0 + 0.01 * k);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd fx(m);
      Eigen::MatrixXd jx(m, n);
      for (int i = 0; i < m; ++i) {
        fx(i) = f[i](std::span<const double>(x.data(), n));
        for (int j = 0; j < n; ++j) jx(i, j) = jac[i * n + j](std::span<const double>(x.data(), n));
      }
      if (fx.norm() < 1e-13) {
        converged = true;
        break;
      }
      const Eigen::VectorXd dx = jx.completeOrthogonalDecomposition().solve(-fx);
      x += dx;
      if (!x.allFinite()) break;
    }
    if (!converged || (x.array().abs() < 1e-8).any()) continue;
    std::vector<double> v(x.data(), x.data() + n);
    const bool dup = std::any_of(sols.begin(), sols.end(), [&](const std::vector<double>& o) {
      for (int k = 0; k < n; ++k)
        if (std::abs(o[k] - v[k]) > 1e-7 * (1 + std::abs(v[k]))) return false;
      return true;
    });
    if (!dup) sols.push_back(std::move(v));
  }
  return sols;
}

}  // namespace

std::vector<LeadingOrders> painleve_leading_orders(const ODESystem& s, int bound, std::optional<Rat> t1) {
  const std::size_t n = s.state.size();
  const RFunc t1v = t1 ? RFunc(*t1) : RFunc(sym("t1"));
  std::vector<Symbol> unknowns;
  for (auto v : s.state) unknowns.push_back(sym("A_" + v.name()));
  std::vector<std::vector<SplitTerm>> terms;
  for (auto v : s.state) {
    auto split = split_rhs(s, v);
    for (auto& st : split) st.coeff = substitute(st.coeff, {{s.indep, t1v}});
    terms.push_back(std::move(split));
  }

  std::vector<LeadingOrders> found;
  std::vector<int> m(n, 0);
  while (true) {
    // Advance the odometer first so the all-zero triple is skipped.
    std::size_t k = 0;
    while (k < n && ++m[k] > bound) m[k++] = 0;
    if (k == n) break;

    std::vector<MPoly> eqs;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      std::map<int, RFunc> by_order;
      if (m[i] > 0) by_order[-m[i] - 1] += RFunc(-m[i]) * RFunc(unknowns[i]);
      for (const auto& st : terms[i]) {
        int order = 0;
        RFunc c = st.coeff;
        for (std::size_t j = 0; j < n; ++j) {
          order -= static_cast<int>(st.exps[j]) * m[j];
          if (st.exps[j]) c *= RFunc(unknowns[j]).pow(static_cast<int>(st.exps[j]));
        }
        by_order[order] -= c;
      }
      std::optional<std::pair<int, RFunc>> dom;
      for (const auto& [o, c] : by_order)
        if (!c.is_zero()) {
          dom = {o, c};
          break;
        }
      if (!dom) continue;
      if (m[i] == 0 && dom->first >= 0) continue;  // regular component, analytic right-hand side
      MPoly eq = BalanceSolver::strip(dom->second.num(), unknowns);
      bool depends = false;
      for (auto u : unknowns) depends = depends || eq.degree_in(u) > 0;
      if (!depends) ok = false;
      else eqs.push_back(std::move(eq));
    }
    if (!ok || eqs.empty()) continue;

    BalanceSolver solver{unknowns, {}};
    std::vector<Bindings> sols;
    bool stuck = false;
    solver.solve(eqs, {}, sols, stuck);
    if (!stuck) {
      for (const auto& sol : sols) {
        LeadingOrders lo;
        lo.exponents = m;
        for (std::size_t i = 0; i < n; ++i) {
          auto it = sol.find(unknowns[i]);
          lo.free.push_back(it == sol.end());
          lo.coeffs.push_back(it == sol.end() ? RFunc(unknowns[i]) : it->second);
          double num = std::nan("");
          if (it != sol.end() && it->second.is_constant()) num = to_double_exact(it->second.constant_value());
          lo.numeric.push_back(num);
        }
        found.push_back(std::move(lo));
      }
      continue;
    }
    // Numeric fallback with generic spot values of the parameters.
    std::map<Symbol, Rat> spot{{sym("t1"), Rat(1)}};
    for (auto p : s.params) spot[p] = make_rat(static_cast<long>(3 + 2 * p.id() % 7), 11);
    std::vector<Symbol> present;
    for (auto u : unknowns) {
      for (const auto& e : eqs)
        if (e.degree_in(u) > 0) {
          present.push_back(u);
          break;
        }
    }
    for (const auto& v : newton_solutions(eqs, present, spot)) {
      LeadingOrders lo;
      lo.exponents = m;
      lo.exact = false;
      for (std::size_t i = 0; i < n; ++i) {
        auto pos = std::find(present.begin(), present.end(), unknowns[i]);
        lo.free.push_back(pos == present.end());
        lo.coeffs.push_back(RFunc(unknowns[i]));
        lo.numeric.push_back(pos == present.end() ? std::nan("") : v[pos - present.begin()]);
      }
      found.push_back(std::move(lo));
    }
  }
  std::sort(found.begin(), found.end(),
            [](const LeadingOrders& a, const LeadingOrders& b) { return a.exponents < b.exponents; });
  return found;
}

// ---------------------------------------------------------------------------
// Points of the report

SingularPoint jet_point(const ModelSet& m) {
  const Jet3 j;
  const Symbol P = sym("P"), Q = sym("Q"), R = sym("R");
  ChartMap c{"jet_center", {j.u, j.u1, j.u2}, {P, Q, R}, {}, std::nullopt};
  c.forward[P] = RFunc(j.u);
  c.forward[Q] = RFunc(j.u1);
  c.forward[R] = RFunc(j.u2) - parse("((2*a1-1)*u + a0)/t^2");
  c.inverse = invert_triangular(c);
  SingularPoint sp;
  sp.name = "jet";
  sp.system = pushforward(m.jet_system(), c);
  sp.divisor = Q;
  sp.point = {{P, RFunc(0)}, {Q, RFunc(0)}, {R, RFunc(0)}};
  sp.locus = {"Q=R=0", "jet_center", Q, {{Q, RFunc(0)}, {R, RFunc(0)}}, {P}};
  return sp;
}

SingularPoint c1_point(const ModelSet& m) {
  const ChartMap& c = m.chart(ChartId::p3_u1);
  SingularPoint sp;
  sp.name = "C1";
  sp.system = pushforward(m.system6(), c);
  sp.divisor = sym("X1");
  sp.point = {{sym("X1"), RFunc(0)}, {sym("Y1"), RFunc(0)}, {sym("Z1"), RFunc(0)}};
  sp.locus = {"C1", to_string(ChartId::p3_u1), sym("X1"), {{sym("X1"), RFunc(0)}, {sym("Z1"), RFunc(0)}},
              {sym("Y1")}};
  return sp;
}

SingularPoint p2_point(const ModelSet& m) {
  const ChartMap& c = m.chart(ChartId::p3_u3);
  SingularPoint sp;
  sp.name = "P2";
  sp.system = pushforward(m.system6(), c);
  sp.divisor = sym("Z3");
  sp.point = {{sym("X3"), RFunc(0)}, {sym("Y3"), RFunc(0)}, {sym("Z3"), RFunc(0)}};
  sp.locus = {"P2", to_string(ChartId::p3_u3), sym("Z3"),
              {{sym("X3"), RFunc(0)}, {sym("Y3"), RFunc(0)}, {sym("Z3"), RFunc(0)}},
              {}};
  return sp;
}

SingularPoint p_point(const ModelSet& m) {
  const Symbol X = sym("X"), Y = sym("Y"), Z = sym("Z");
  ChartMap c{"P_center", {sym("x"), sym("y"), sym("z")}, {X, Y, Z}, {}, std::nullopt};
  c.forward[X] = parse("(x/z + 1/2) - 2/3*(y/z^2 + 1/4)");
  c.forward[Y] = parse("y/z^2 + 1/4");
  c.forward[Z] = parse("1/z");
  c.inverse = invert_triangular(c);
  SingularPoint sp;
  sp.name = "P";
  sp.system = pushforward(m.system6(), c);
  sp.divisor = Z;
  sp.point = {{X, RFunc(0)}, {Y, RFunc(0)}, {Z, RFunc(0)}};
  sp.locus = {"P", "P_center", Z, {{X, RFunc(0)}, {Y, RFunc(0)}, {Z, RFunc(0)}}, {}};
  return sp;
}

}  // namespace hp3
