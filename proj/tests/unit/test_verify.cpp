#include "doctest.h"
#include "hp3/algebra/expr_io.hpp"
#include "hp3/verify/checks.hpp"

using namespace hp3;

namespace {

std::vector<std::string> failing(const std::vector<CheckReport>& reports) {
  std::vector<std::string> out;
  for (const auto& r : reports)
    if (!r.informational && !r.passed()) out.push_back(r.check_id);
  return out;
}

ModelSet mutated(const std::string& id) {
  ModelSource src = ModelSource::published();
  for (const auto& m : seeded_mutations())
    if (m.id == id) m.apply(src);
  return ModelSet(src);
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("Hamiltonian jet, spot value before the symbolic pass") {
    const ODESystem hs = hamiltonian_system();
    const RFunc u = hamiltonian();
    const RFunc u1 = hs.total_derivative(u);
    std::map<Symbol, Rat> at{{sym("q"), Rat(1)}, {sym("p"), Rat(1)}, {sym("t"), Rat(1)},
                             {alpha0(), Rat(0)}, {alpha1(), Rat(0)}};
    CHECK((parse("t") * u1 + u).evaluate(at) == 1);
    CHECK(verify_hamiltonian_satisfies_eq1().passed());
  }

  TEST_CASE("each primary check passes") {
    for (const auto& id : check_ids()) {
      if (is_informational(id)) continue;
      CAPTURE(id);
      const CheckReport r = run_check(id);
      CHECK(r.passed());
      CHECK_FALSE(r.witness);
    }
  }

  TEST_CASE("informational checks fail with certified witnesses") {
    for (const auto& id : check_ids()) {
      if (!is_informational(id)) continue;
      CAPTURE(id);
      const CheckReport r = run_check(id);
      CHECK(r.informational);
      CHECK_FALSE(r.passed());
      REQUIRE(r.witness);
      CHECK_FALSE(r.witness_point.empty());
    }
  }

  TEST_CASE("translation reports both orders") {
    const CheckReport r = verify_translation();
    CHECK(r.passed());
    CHECK(r.detail.find("s0 then s1: (a0 - 2, -a1 + 1)") != std::string::npos);
    CHECK(r.detail.find("s1 then s0: (a0 + 2, -a1 + 1)") != std::string::npos);
    const ParamMap c = backlund("s0").pmap.then(backlund("s1").pmap);
    const auto img = c.apply({{alpha0(), Rat(0)}, {alpha1(), make_rat(-1, 2)}});
    CHECK(img.at(alpha0()) == -2);
    CHECK(img.at(alpha1()) == make_rat(3, 2));
  }

  TEST_CASE("suite is deterministic across parallelism") {
    const auto a = run_all(default_models(), false);
    const auto b = run_all(default_models(), true);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].check_id == b[i].check_id);
      CHECK(a[i].status == b[i].status);
      CHECK(a[i].witness == b[i].witness);
      CHECK(a[i].detail == b[i].detail);
    }
    CHECK(suite_passed(a));
  }

  TEST_CASE("every seeded mutation breaks its target check") {
    for (const auto& m : seeded_mutations()) {
      CAPTURE(m.id);
      const ModelSet ms = mutated(m.id);
      const CheckReport r = run_check(m.target_check, ms);
      CHECK_FALSE(r.passed());
      REQUIRE(r.witness);
      CHECK_FALSE(r.witness_point.empty());
    }
  }

  TEST_CASE("mutations confined to one consumer flip only that check") {
    CHECK(failing(run_all(mutated("hamiltonian_tp_sign"), true)) == std::vector<std::string>{"hamiltonian_eq1"});
    CHECK(failing(run_all(mutated("blowup_omit_step6"), true)) == std::vector<std::string>{"blowup_sequence"});
  }

  TEST_CASE("token replacement is strict") {
    std::string s = "a + b + a";
    CHECK_THROWS_AS(replace_token(s, "a", "c"), std::logic_error);
    CHECK_THROWS_AS(replace_token(s, "d", "c"), std::logic_error);
    replace_token(s, "b", "c");
    CHECK(s == "a + c + a");
    CHECK_THROWS_AS(run_check("nope"), std::invalid_argument);
  }
}
