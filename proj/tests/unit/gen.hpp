#pragma once

// Hand-rolled generators for property tests.

#include <random>
#include <vector>

#include "hp3/algebra/rfunc.hpp"

namespace hp3::testing {

inline std::vector<Symbol> gen_vars() { return {sym("x"), sym("y"), sym("z"), sym("t")}; }

inline Rat gen_rat(std::mt19937_64& rng, int span = 9) {
  std::uniform_int_distribution<int> num(-span, span);
  std::uniform_int_distribution<int> den(1, 5);
  return make_rat(num(rng), den(rng));
}

/// Random polynomial: up to `max_terms` terms of total degree <= `max_deg`
/// in the first `nvars` generator variables.
inline MPoly gen_poly(std::mt19937_64& rng, int max_terms = 8, int max_deg = 4, int nvars = 4) {
  const auto vars = gen_vars();
  std::uniform_int_distribution<int> nterms(0, max_terms);
  std::uniform_int_distribution<int> var(0, nvars - 1);
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::vector<MPoly::Term> terms;
  const int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    Monomial m;
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) m = m * Monomial(vars[var(rng)]);
    terms.push_back({m, gen_rat(rng)});
  }
  return MPoly::from_terms(std::move(terms));
}

inline RFunc gen_rfunc(std::mt19937_64& rng) {
  MPoly d;
  while (d.is_zero()) d = gen_poly(rng, 3, 2);
  return RFunc(gen_poly(rng, 5, 3), d);
}

/// Random rational point avoiding zeros of `avoid` (up to 20 trials).
inline std::map<Symbol, Rat> gen_point(std::mt19937_64& rng, const std::set<Symbol>& symbols) {
  std::map<Symbol, Rat> pt;
  for (auto s : symbols) pt[s] = gen_rat(rng, 20);
  return pt;
}

}  // namespace hp3::testing
