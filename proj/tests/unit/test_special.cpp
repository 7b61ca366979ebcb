#include <cmath>

#include "doctest.h"
#include "hp3/special/series.hpp"

using namespace hp3;

TEST_SUITE("special") {
  TEST_CASE("pochhammer") {
    CHECK(pochhammer(Rat(2), 3) == 24);
    CHECK(pochhammer(make_rat(7, 3), 0) == 1);
    Rat fact(1);
    for (int k = 0; k <= 12; ++k) {
      CHECK(pochhammer(Rat(1), k) == fact);
      fact *= k + 1;
    }
    CHECK(pochhammer(make_rat(1, 2), 2) == make_rat(3, 4));
  }

  TEST_CASE("power series arithmetic") {
    // exp(t) is its own derivative; 1/(1 - t) is the geometric series
    std::vector<Rat> e(11);
    Rat f(1);
    for (int k = 0; k <= 10; ++k) {
      e[static_cast<std::size_t>(k)] = 1 / f;
      f *= k + 1;
    }
    const PowerSeries ex(e, 10);
    CHECK((ex.derivative() - ex.truncated(9)).coefficients() == PowerSeries::constant(Rat(0), 9).coefficients());
    const PowerSeries one = PowerSeries::constant(Rat(1), 10);
    const PowerSeries g = one / (one - PowerSeries::variable(10));
    for (int k = 0; k <= 10; ++k) CHECK(g[k] == 1);
    // exp(t) * exp(-t) = 1
    std::vector<Rat> em = e;
    for (std::size_t k = 1; k < em.size(); k += 2) em[k] = -em[k];
    CHECK((ex * PowerSeries(em, 10)).coefficients() == one.coefficients());
    CHECK_THROWS_AS(one / PowerSeries::variable(10), std::domain_error);
    CHECK_THROWS_AS(one.divided_by_t(), std::domain_error);
    CHECK(PowerSeries::variable(5).divided_by_t()[0] == 1);
    CHECK(ex.evaluate(make_rat(1, 2)) == ex.evaluate(make_rat(1, 2)));
    CHECK(ex.evaluate(1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-7));
  }

  TEST_CASE("F series coefficients") {
    const PowerSeries F2 = F_series(Rat(2), 10);
    CHECK(F2[0] == 1);
    CHECK(F2[1] == make_rat(1, 2));
    CHECK(F2[2] == make_rat(1, 12));
    CHECK(F2[3] == make_rat(1, 144));
    const PowerSeries F1 = F_series(Rat(1), 8);
    Rat fact(1);
    for (int k = 0; k <= 8; ++k) {
      CHECK(F1[k] == 1 / (fact * fact));
      fact *= k + 1;
    }
    for (const Rat& a : {make_rat(1, 3), make_rat(-5, 2), Rat(7)}) CHECK(F_series(a, 3)[0] == 1);
    for (int k = 0; k <= 10; ++k) CHECK(sgn(F2[k]) > 0);
    CHECK_THROWS_AS(F_series(Rat(0), 5), std::invalid_argument);
    CHECK_THROWS_AS(F_series(Rat(-3), 5), std::invalid_argument);
  }

  TEST_CASE("second-order equation for Z") {
    // order-0 coefficient by hand: 2 c1 - c0 = 0
    const PowerSeries Z = F_series(Rat(2), 6);
    CHECK(2 * Z[1] - Z[0] == 0);
    const CheckReport r = verify_Z_ode(40);
    CHECK(r.passed());
    CHECK(r.check_id == "special_z_ode");
    const CheckReport bad = verify_Z_ode(40, Rat(3));
    CHECK_FALSE(bad.passed());
    REQUIRE(bad.witness);
    CHECK(*bad.witness == "coefficient of t^0: -1/3");
  }

  TEST_CASE("Riccati equation for z = 2 Z'/Z") {
    const CheckReport r = verify_riccati_symbolic(40);
    CHECK(r.passed());
    CHECK(r.detail.find("0..37") != std::string::npos);
    const CheckReport wrong = verify_riccati_symbolic(F_series(Rat(3), 20));
    CHECK_FALSE(wrong.passed());
    CHECK(wrong.detail.find("1/t pole") != std::string::npos);
  }

  TEST_CASE("seed solution") {
    CHECK(seed_solution(0.0)[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(seed_solution(Rat(0))[2] == 1);
    const auto [Z, dZ] = evaluate_F(Rat(2), 1.0);
    CHECK(Z == doctest::Approx(1.5906368546373291).epsilon(1e-15));
    // the Riccati equation at t = 1, with dz/dt from the series
    const PowerSeries F = F_series(Rat(2), 60);
    const double d2 = F.derivative().derivative().evaluate(1.0);
    const double z = 2 * dZ / Z, dz = 2 * (d2 * Z - dZ * dZ) / (Z * Z);
    CHECK(std::abs(dz - (-z * z / 2 - 2 * z + 2)) <= 1e-12);
    const auto s = seed_solution(2.5);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
    for (double t = 0.1; t <= 5; t += 0.1) CHECK(seed_solution(t)[2] > 0);
    // exact truncation agrees with the double evaluation
    CHECK(to_double(seed_solution(make_rat(3, 2))[2]) == doctest::Approx(seed_solution(1.5)[2]).epsilon(1e-14));
    CHECK(terms_for(Rat(2), 4) == 40);
    CHECK(terms_for(Rat(2), 400) > 40);
  }

  TEST_CASE("hierarchy") {
    const auto h0 = hierarchy(0);
    REQUIRE(h0.size() == 1);
    CHECK(h0[0].certified);
    CHECK(h0[0].residual <= 1e-6);

    const auto h = hierarchy(3);
    REQUIRE(h.size() == 4);
    CHECK(h[1].alpha0 == -2);
    CHECK(h[1].alpha1 == 1.5);
    CHECK(h[1].maps == "s1");
    CHECK(h[1].certified);
    CHECK(h[1].residual <= 1e-6);
    CHECK(h[2].alpha0 == -4);
    CHECK(h[3].alpha0 == -6);
    CHECK_FALSE(h[2].certified);
    CHECK(h[2].description.find("unreachable") != std::string::npos);
  }
}
