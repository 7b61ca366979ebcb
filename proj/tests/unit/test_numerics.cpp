#include <cmath>
#include <limits>

#include "doctest.h"
#include "hp3/numerics/integrate.hpp"
#include "hp3/singularity/laurent.hpp"
#include "hp3/special/series.hpp"

using namespace hp3;

namespace {

NumState state(double x, double y, double z, double t, double a0, double a1) {
  NumState s;
  s.coords = {x, y, z};
  s.t = t;
  s.alpha0 = a0;
  s.alpha1 = a1;
  return s;
}

NumState seed_state(double t) {
  const auto s = seed_solution(t);
  return state(s[0], s[1], s[2], t, seed_alpha0, seed_alpha1);
}

std::size_t count(const Trajectory& tr, EventKind k) {
  std::size_t n = 0;
  for (const auto& e : tr.events) n += e.kind == k;
  return n;
}

bool strictly_increasing(const Trajectory& tr) {
  for (std::size_t i = 1; i < tr.samples.size(); ++i)
    if (!(tr.samples[i].t > tr.samples[i - 1].t)) return false;
  return true;
}

std::size_t first_pole(const Trajectory& tr) {
  for (std::size_t i = 0; i < tr.events.size(); ++i)
    if (tr.events[i].kind == EventKind::pole_crossing) return i;
  throw std::logic_error("no pole crossing");
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("finite-difference weights") {
    const auto w = fd_weights(0, {-2, -1, 0, 1, 2});
    const double want[] = {1.0 / 12, -2.0 / 3, 0, 2.0 / 3, -1.0 / 12};
    for (int i = 0; i < 5; ++i) CHECK(w[static_cast<std::size_t>(i)] == doctest::Approx(want[i]).epsilon(1e-14));
    // exact for polynomials of degree <= n-1 on an irregular grid
    const std::vector<double> x{0.1, 0.25, 0.3, 0.55, 0.9, 1.0};
    const auto v = fd_weights(0.3, x);
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += v[i] * std::pow(x[i], 5);
    CHECK(d == doctest::Approx(5 * std::pow(0.3, 4)).epsilon(1e-10));
  }

  TEST_CASE("dopri5 on y' = y and a zero field") {
    const RhsFn exp_f = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      dy = y;
      return true;
    };
    StepOptions o;
    const auto r = dopri5(exp_f, 0, Eigen::VectorXd::Ones(1), 1, o);
    REQUIRE_FALSE(r.failed);
    CHECK(r.t.back() == 1.0);
    CHECK(std::abs(r.y.back()[0] - std::exp(1.0)) < 1e-9);

    const RhsFn zero = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      dy = Eigen::VectorXd::Zero(y.size());
      return true;
    };
    const auto c = dopri5(zero, 1, Eigen::Vector3d(1, 2, 3), 5, o);
    for (const auto& y : c.y) CHECK(y == Eigen::Vector3d(1, 2, 3));
    CHECK(residual(c, zero) == 0.0);

    // integrating backwards works too
    const auto b = dopri5(exp_f, 1, Eigen::VectorXd::Constant(1, std::exp(1.0)), 0, o);
    CHECK(std::abs(b.y.back()[0] - 1) < 1e-9);
  }

  TEST_CASE("step size underflow is reported") {
    const RhsFn blowup = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      dy = y.cwiseProduct(y);
      return true;
    };
    const auto r = dopri5(blowup, 0, Eigen::VectorXd::Ones(1), 2, StepOptions{});
    CHECK(r.failed);
    CHECK(r.t.back() < 1.0);
    CHECK(r.t.back() > 0.999);
  }

  TEST_CASE("Riccati equation against the series") {
    const RhsFn riccati = [](double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
      dz.resize(1);
      dz[0] = -z[0] * z[0] / 2 - 2 * z[0] / t + 2 / t;
      return true;
    };
    StepOptions o;
    const auto r = dopri5(riccati, 1, Eigen::VectorXd::Constant(1, seed_solution(1.0)[2]), 2, o);
    const double want = seed_solution(2.0)[2];
    CHECK(std::abs(r.y.back()[0] - want) / want <= 1e-8);
  }

  TEST_CASE("the special solution stays on x = y = 0 and matches the series") {
    const Trajectory tr = integrate(seed_state(1), 4);
    REQUIRE(count(tr, EventKind::step_failure) == 0);
    double off = 0;
    for (const auto& s : tr.samples) off = std::max({off, std::abs(s.coords[0]), std::abs(s.coords[1])});
    CHECK(off <= 1e-10);
    const double want = seed_solution(4.0)[2];
    CHECK(std::abs(tr.samples.back().coords[2] - want) / want <= 1e-8);
    CHECK(residual(tr) <= 1e-6);
  }

  TEST_CASE("endpoint error shrinks in proportion to rtol") {
    // Per-step error control makes the global error roughly proportional
    // to rtol: about 2x per halving.
    const double want = seed_solution(4.0)[2];
    auto err = [&](double rtol) {
      const auto tr = integrate(seed_state(1), 4, rtol, 1e-14);
      return std::abs(tr.samples.back().coords[2] - want) / want;
    };
    for (double rtol : {1e-6, 1e-8}) {
      const double e1 = err(rtol), e2 = err(rtol / 2), e4 = err(rtol / 4);
      CAPTURE(rtol);
      CHECK(e1 / e2 >= 1.5);
      CHECK(e1 / e4 >= 3.0);
    }
  }

  TEST_CASE("generic trajectory crosses a movable pole") {
    const Trajectory tr = integrate_atlas(state(0.1, 0.1, 0.1, 1, 0, 1.5), 6);
    CHECK(count(tr, EventKind::step_failure) == 0);
    CHECK(tr.samples.back().t == 6.0);
    CHECK(count(tr, EventKind::pole_crossing) >= 1);
    CHECK(strictly_increasing(tr));
    CHECK(chart_switch_consistency(tr) <= 1e-9);
    CHECK(residual(tr) <= 1e-6);
    const std::size_t k = first_pole(tr);
    // This pole has a simple pole of z alone, z ~ 2/(t - t0): glue2 does not
    // resolve it and the atlas falls back to glue1.
    CHECK(tr.events[k].from == AtlasChart::glue1);
    const PoleFit fit = fit_pole(tr, k);
    CHECK(fit.t0 == doctest::Approx(tr.events[k].t).epsilon(5e-3));
    CHECK(fit.residue == doctest::Approx(2).epsilon(0.02));
    CHECK(laurent_restart_check(tr, k) <= 1e-5);
  }

  TEST_CASE("pole with x, y and z singular goes through glue2") {
    const Trajectory tr = integrate_atlas(state(-1, -2, 0.1, 1, 0, 1.5), 6);
    CHECK(count(tr, EventKind::step_failure) == 0);
    CHECK(count(tr, EventKind::pole_crossing) == 2);
    CHECK(strictly_increasing(tr));
    CHECK(chart_switch_consistency(tr) <= 1e-9);
    CHECK(residual(tr) <= 1e-6);
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
      if (tr.events[i].kind != EventKind::pole_crossing) continue;
      CHECK(tr.events[i].from == AtlasChart::glue2);
      // Laurent leading term z ~ -2/(t - t0); the two-parameter fit over
      // |z| in [2.5, 10] is biased by the regular part.
      const PoleFit fit = fit_pole(tr, i);
      CHECK(fit.residue == doctest::Approx(-2).epsilon(0.1));
      CHECK(laurent_restart_check(tr, i) <= 1e-5);
    }
  }

  TEST_CASE("infinite switch threshold degenerates to plain integration") {
    const NumState s = seed_state(1);
    const Trajectory a = integrate_atlas(s, 3, 1e-10, 1e-12, std::numeric_limits<double>::infinity());
    const Trajectory b = integrate(s, 3);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].t == b.samples[i].t);
      CHECK(a.samples[i].coords == b.samples[i].coords);
    }
    CHECK(a.events.empty());
  }

  TEST_CASE("corrupted sample raises the residual") {
    Trajectory tr = integrate(seed_state(1), 3);
    REQUIRE(residual(tr) <= 1e-6);
    tr.samples[tr.samples.size() / 2].coords[2] += 1e-3;
    CHECK(residual(tr) > 1e-3);
  }

  TEST_CASE("pole fit") {
    std::vector<double> t, z;
    for (int i = -20; i <= 20; ++i) {
      if (i == 0) continue;
      const double ti = 2 + 0.01 * i;
      t.push_back(ti);
      z.push_back(-0.5 / (ti - 2) + 1);
    }
    const PoleFit f = fit_pole(t, z);
    CHECK(std::abs(f.t0 - 2) <= 1e-10);
    CHECK(std::abs(f.residue + 0.5) <= 1e-10);
    CHECK(std::abs(f.offset - 1) <= 1e-8);

    // a chart switch is not a pole; a trajectory without poles has none
    const Trajectory tr = integrate_atlas(state(-1, -2, 0.1, 1, 0, 1.5), 6);
    CHECK_THROWS_AS(fit_pole(tr, 0), std::domain_error);
    CHECK_THROWS_AS(fit_pole({1, 2}, {1, 2}), std::domain_error);
  }

  TEST_CASE("Laurent series agrees with integration started from it") {
    const auto& sys = system6();
    LeadingOrders lead;
    for (const auto& l : painleve_leading_orders(sys, 2))
      if (l.exponents == std::vector<int>{1, 2, 1}) lead = l;
    REQUIRE(lead.exponents.size() == 3);
    const std::map<Symbol, double> params{{alpha0(), 0.0}, {alpha1(), 1.5}};
    const auto sol = laurent_solve(sys, lead, 2.0, 24, params, {3.0 / 7, -5.0 / 3});
    const auto start = laurent_evaluate(sol, 0.05), end = laurent_evaluate(sol, 0.15);
    const Trajectory tr = integrate(state(start[0], start[1], start[2], 2.05, 0, 1.5), 2.15, 1e-12, 1e-14);
    double err = 0, scale = 0;
    for (int i = 0; i < 3; ++i) {
      err = std::max(err, std::abs(tr.samples.back().coords[static_cast<std::size_t>(i)] - end[static_cast<std::size_t>(i)]));
      scale = std::max(scale, std::abs(end[static_cast<std::size_t>(i)]));
    }
    CHECK(err / scale <= 1e-6);
  }

  TEST_CASE("Backlund transformations commute with the flow") {
    const NumState s = state(0.3, 0.2, 0.1, 1, 0.5, 1.5);
    CHECK(backlund_commute_check("s0", s, 3) <= 1e-6);
    CHECK(backlund_commute_check("identity", s, 3) == 0.0);
    CHECK(backlund_commute_check("s1", s, 2) <= 1e-6);
    CHECK(backlund_commute_check("pi", s, 2) <= 1e-6);
    // s1 and pi need a1 = 3/2
    CHECK_THROWS_AS(backlund_commute_check("s1", state(0.3, 0.2, 0.1, 1, 0.5, 1.2), 2), std::invalid_argument);
    // on the locus t^2 (4y + z^2) + 4t (2x + z - 1) - (2a1 - 1)(2a1 - 5) = 0
    CHECK_THROWS_AS(backlund_commute_check("s1", state(0, 0, 0, 1, 0, 1.5), 2), std::domain_error);
  }

  TEST_CASE("Hamiltonian flow and the polynomial system agree before the first pole") {
    const double a0 = 0.3, a1 = 0.7;
    const std::map<Symbol, double> params{{alpha0(), a0}, {alpha1(), a1}};
    const ODESystem ham = hamiltonian_system();
    const RFunc u = hamiltonian(), u1 = ham.total_derivative(u), u2 = ham.total_derivative(u1);
    std::vector<Symbol> layout = ham.state;
    layout.push_back(ham.indep);
    layout.push_back(alpha0());
    layout.push_back(alpha1());
    const CompiledRFunc cu(u, layout), cu1(u1, layout), cu2(u2, layout);
    auto jet = [&](double t, const Eigen::VectorXd& qp) {
      const std::vector<double> v{qp[0], qp[1], t, a0, a1};
      return Eigen::Vector3d(cu(v), cu1(v), cu2(v));
    };
    const NumericMap red(reduction_map(), params);

    const Eigen::Vector2d qp0(0.4, 0.6);
    const double t0 = 1, t1 = 1.8;
    const auto x0 = red(t0, jet(t0, qp0));
    REQUIRE(x0);
    std::vector<double> times;
    for (int i = 1; i <= 8; ++i) times.push_back(t0 + (t1 - t0) * i / 8);
    StepOptions o;
    const auto qp = integrate_to_times(NumericField(ham, params).fn(), t0, qp0, times, o);
    const auto xyz = integrate_to_times(NumericField(system6(), params).fn(), t0, *x0, times, o);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double h = jet(times[i], qp[i])[0];
      CAPTURE(times[i]);
      CHECK(std::abs(xyz[i][0] - h) / std::max(1.0, std::abs(h)) <= 1e-6);
    }
  }
}
