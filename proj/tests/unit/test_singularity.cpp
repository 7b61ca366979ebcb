#include <random>

#include "doctest.h"
#include "hp3/algebra/expr_io.hpp"
#include "hp3/singularity/laurent.hpp"

using namespace hp3;

namespace {

std::vector<std::string> strings(const std::vector<RFunc>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(to_string(e));
  return out;
}

const LeadingOrders& pole_balance() {
  static const LeadingOrders lo = [] {
    for (const auto& l : painleve_leading_orders(system6(), 2))
      if (l.exponents == std::vector<int>{1, 2, 1}) return l;
    throw std::logic_error("no (1,2,1) balance");
  }();
  return lo;
}

}  // namespace

TEST_SUITE("singularity") {
  TEST_CASE("rational roots") {
    // (x - 1/2)(x + 2)(x - 3)^2 * x = x^5 - 9/2x^4 + ... ; built from factors.
    const RFunc p = parse("(x - 1/2)*(x + 2)*(x - 3)^2*x");
    std::vector<Rat> c;
    for (const auto& m : p.num().coefficients_in(sym("x"))) c.push_back(m.constant_term());
    const auto r = rational_roots(c);
    CHECK(r == std::vector<Rat>{Rat(-2), Rat(0), make_rat(1, 2), Rat(3), Rat(3)});
    CHECK(rational_roots({Rat(-2), Rat(0), Rat(1)}).empty());  // x^2 - 2
  }

  TEST_CASE("accessible loci") {
    CHECK(check_accessible(c1_point().system, c1_point().locus));
    CHECK(check_accessible(p2_point().system, p2_point().locus));
    BoundaryLocus generic = c1_point().locus;
    generic.name = "X1=0, Z1=1";
    generic.equations = {{sym("X1"), RFunc(0)}, {sym("Z1"), RFunc(1)}};
    CHECK_FALSE(check_accessible(c1_point().system, generic));

    // A double pole on the divisor is an error, not "false".
    ODESystem bad;
    bad.state = {sym("x"), sym("y")};
    bad.rhs[sym("x")] = parse("x");
    bad.rhs[sym("y")] = parse("1/x^2");
    BoundaryLocus l{"x=0", "test", sym("x"), {{sym("x"), RFunc(0)}}, {sym("y")}};
    CHECK_THROWS_AS(check_accessible(bad, l), NotLogarithmic);
  }

  TEST_CASE("grid scan finds C1 and P2 on their divisors") {
    const Bindings params{{alpha0(), parse("1/3")}, {alpha1(), parse("2/7")}};
    const auto c1 = c1_point();
    const auto hits = scan_accessible(c1.system, c1.divisor, 1.0, params);
    REQUIRE_FALSE(hits.empty());
    for (const auto& h : hits) CHECK(h.coords[1] == doctest::Approx(0.0));  // Z1 = 0, Y1 anywhere
    CHECK(hits.size() == 11);
    const auto p2 = p2_point();
    const auto h2 = scan_accessible(p2.system, p2.divisor, 1.0, params);
    REQUIRE(h2.size() == 1);
    CHECK(h2[0].coords == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("local indices") {
    const auto jet = jet_point();
    CHECK(check_accessible(jet.system, jet.locus));
    CHECK(strings(local_index(jet.system, jet.divisor, jet.point).eigenvalues) ==
          std::vector<std::string>{"0", "a0/t^2", "a0/t^2"});
    // Along the whole curve Q = R = 0 the index is ((2a1-1)P + a0)/t^2.
    Bindings along = jet.point;
    along[sym("P")] = RFunc(sym("P"));
    const auto general = local_index(jet.system, jet.divisor, along);
    CHECK(general.eigenvalues[1] == parse("((2*a1-1)*P + a0)/t^2"));

    const auto p2 = p2_point();
    CHECK(strings(local_index(p2.system, p2.divisor, p2.point).eigenvalues) ==
          std::vector<std::string>{"1/2", "3/2", "1/2"});
    const auto p = p_point();
    const auto ix = local_index(p.system, p.divisor, p.point);
    CHECK(strings(ix.eigenvalues) == std::vector<std::string>{"-1/2", "-2", "-1/2"});
    // Characteristic polynomial (l + 1/2)^2 (l + 2).
    CHECK(ix.charpoly[0] == parse("1/2"));
    CHECK(ix.charpoly[3] == RFunc(1));
  }

  TEST_CASE("non-triangular constant matrix uses rational roots") {
    ODESystem s;
    s.state = {sym("x"), sym("y")};
    // x * (dx/dt, dy/dt) has Jacobian [[1, 2], [2, 1]] at the origin: eigenvalues -1, 3.
    s.rhs[sym("x")] = parse("1 + 2*y/x");
    s.rhs[sym("y")] = parse("2 + y/x");
    const auto ix = local_index(s, sym("x"));
    REQUIRE(ix.factored);
    CHECK(strings(ix.eigenvalues) == std::vector<std::string>{"-1", "3"});
    s.rhs[sym("y")] = parse("1 + y/x");  // eigenvalues 1 +- sqrt(2)
    CHECK_FALSE(local_index(s, sym("x")).factored);
  }

  TEST_CASE("index ratios") {
    const auto p = p_point();
    const auto r = index_ratios(local_index(p.system, p.divisor, p.point));
    CHECK(strings(r.ratios) == std::vector<std::string>{"1", "4", "1"});
    CHECK(r.integral);
    const auto p2 = p2_point();
    const auto r2 = index_ratios(local_index(p2.system, p2.divisor, p2.point));
    CHECK(strings(r2.ratios) == std::vector<std::string>{"1", "3", "1"});
    CHECK(r2.integral);
    const auto jet = jet_point();
    CHECK_THROWS_AS(index_ratios(local_index(jet.system, jet.divisor, jet.point)), std::domain_error);
  }

  TEST_CASE("alpha-test at P") {
    const auto p = p_point();
    const std::vector<Symbol> scaled{sym("X1"), sym("Y1"), sym("Z1")};
    const ODESystem red = alpha_test(p.system, p.point, sym("t0"), scaled);
    CHECK(red[sym("X1")] == parse("-1/2*X1/Z1"));
    CHECK(red[sym("Y1")] == parse("-2*Y1/Z1"));
    CHECK(red[sym("Z1")] == parse("-1/2"));
    const Bindings sol{{sym("X1"), parse("c2*(T - 2*c1)")},
                       {sym("Y1"), parse("c3*(T - 2*c1)^4")},
                       {sym("Z1"), parse("-1/2*(T - 2*c1)")}};
    for (const auto& [v, r] : solution_residual(red, sol)) CHECK(r.is_zero());
    // Same eigenvalues as the local index.
    const auto ix = local_index(red, sym("Z1"));
    CHECK(strings(ix.eigenvalues) == std::vector<std::string>{"-1/2", "-2", "-1/2"});

    // A linear diagonal field is its own reduced system.
    ODESystem lin;
    lin.state = {sym("x"), sym("y")};
    lin.rhs[sym("x")] = parse("3*x/y");
    lin.rhs[sym("y")] = parse("-1");
    const ODESystem same = alpha_test(lin, {}, sym("t0"), {sym("X1"), sym("Y1")});
    CHECK(same[sym("X1")] == parse("3*X1/Y1"));
    CHECK(same[sym("Y1")] == parse("-1"));

    ODESystem nolimit;
    nolimit.state = {sym("x")};
    nolimit.rhs[sym("x")] = parse("1/x^2");
    CHECK_THROWS_AS(alpha_test(nolimit, {}, sym("t0"), {sym("X1")}), std::domain_error);
  }

  TEST_CASE("leading orders") {
    const auto all = painleve_leading_orders(system6(), 3);
    REQUIRE(all.size() == 1);
    const auto& lo = all.front();
    CHECK(lo.exponents == std::vector<int>{1, 2, 1});
    CHECK(lo.exact);
    CHECK(strings(lo.coeffs) == std::vector<std::string>{"1", "-1", "-2"});
    // b = -a from dx/dt = y.
    CHECK(lo.coeffs[1] == -lo.coeffs[0]);

    ODESystem lin;
    lin.state = {sym("x")};
    lin.rhs[sym("x")] = parse("x");
    CHECK(painleve_leading_orders(lin, 4).empty());

    // Independent of the generic point.
    for (const auto& t1 : {Rat(1), Rat(2)}) {
      const auto at = painleve_leading_orders(system6(), 3, t1);
      REQUIRE(at.size() == 1);
      CHECK(at[0].exponents == lo.exponents);
      CHECK(strings(at[0].coeffs) == strings(lo.coeffs));
    }
  }

  TEST_CASE("irrational balance falls back to Newton") {
    ODESystem s;
    s.state = {sym("x")};
    s.rhs[sym("x")] = parse("x^3/2 + x^2");  // x ~ a/tau^(1/2) not integral; no integer balance
    CHECK(painleve_leading_orders(s, 3).empty());
    ODESystem r;
    r.state = {sym("x")};
    r.rhs[sym("x")] = parse("3*x^2");  // a = -1/3
    const auto lo = painleve_leading_orders(r, 3);
    REQUIRE(lo.size() == 1);
    CHECK(lo[0].coeffs[0] == parse("-1/3"));
    ODESystem q;
    q.state = {sym("x"), sym("y")};
    // x ~ a/tau, y ~ b/tau: -a = a*b gives b = -1, then -b = a^2 - 3/2*b^2
    // gives a^2 = 5/2, which has no rational root.
    q.rhs[sym("x")] = parse("x*y");
    q.rhs[sym("y")] = parse("x^2 - 3/2*y^2");
    const auto nq = painleve_leading_orders(q, 1);
    REQUIRE(nq.size() == 2);
    for (const auto& l : nq) {
      CHECK_FALSE(l.exact);
      CHECK(std::abs(l.numeric[0]) == doctest::Approx(std::sqrt(2.5)));
      CHECK(l.numeric[1] == doctest::Approx(-1.0));
    }
  }

  TEST_CASE("Laurent solution at t0 = 2") {
    const auto sol = laurent_solve(system6(), pole_balance(), Rat(2), 10);
    CHECK(sol.free_parameter_positions == std::set<int>{1, 4});
    CHECK(sol.free_parameters.size() == 2);
    CHECK(sol.free_parameters.size() + 1 == 3);  // plus t0: order of the third-order equation
    CHECK(sol.residue(sym("z")) == RFunc(-2));
    CHECK(sol.residue(sym("x")) == RFunc(1));
    const auto orders = laurent_residual_orders(system6(), sol);
    for (int o : orders) CHECK(o >= 10 - 2);
  }

  TEST_CASE("exact and floating solvers agree") {
    const auto exact = laurent_solve(system6(), pole_balance(), Rat(2), 10);
    const std::map<Symbol, double> par{{alpha0(), 0.25}, {alpha1(), 1.5}};
    const auto fl = laurent_solve(system6(), pole_balance(), 2.0, 10, par, {0.3, -0.7});
    CHECK(fl.free_parameter_positions == std::set<int>{1, 4});
    auto vals = par;
    vals[sym("f1")] = 0.3;
    vals[sym("f2")] = -0.7;
    const auto a = laurent_evaluate(exact, 0.05, vals);
    const auto b = laurent_evaluate(fl, 0.05);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }

  TEST_CASE("inconsistent resonance aborts") {
    // x'' = 6x^2 + t (first Painleve) passes; with t^2 the resonance at k = 6
    // carries the nonzero condition d^2/dt^2 (t^2) = 2.
    LeadingOrders lo;
    lo.exponents = {2, 3};
    lo.coeffs = {RFunc(1), RFunc(-2)};
    lo.free = {false, false};
    lo.numeric = {1.0, -2.0};
    ODESystem p1;
    p1.state = {sym("x"), sym("y")};
    p1.rhs[sym("x")] = parse("y");
    p1.rhs[sym("y")] = parse("6*x^2 + t");
    const auto ok = laurent_solve(p1, lo, Rat(1), 8);
    CHECK(ok.free_parameter_positions == std::set<int>{6});
    ODESystem bad = p1;
    bad.rhs[sym("y")] = parse("6*x^2 + t^2");
    CHECK_THROWS_AS(laurent_solve(bad, lo, Rat(1), 8), InconsistentResonance);
    CHECK_NOTHROW(laurent_solve(bad, lo, Rat(1), 5));
  }
}
