#include "hp3/algebra/rfunc.hpp"

#include <algorithm>
#include <vector>

namespace hp3 {
namespace {

// Splits p into (monomial content, remaining core).
std::pair<Monomial, MPoly> split_monomial(const MPoly& p) {
  Monomial m = p.monomial_content();
  return {m, p.divide_monomial(m)};
}

Monomial monomial_lcm(const Monomial& a, const Monomial& b) { return (a * b) / Monomial::gcd(a, b); }

}  // namespace

RFunc::RFunc(MPoly num, MPoly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw ZeroDenominator("zero denominator");
  canonicalize();
}

void RFunc::canonicalize() {
  if (num_.is_zero()) {
    den_ = MPoly(1);
    return;
  }
  if (!den_.is_constant()) {
    const Monomial g = Monomial::gcd(num_.monomial_content(), den_.monomial_content());
    if (!g.is_one()) {
      num_ = num_.divide_monomial(g);
      den_ = den_.divide_monomial(g);
    }
  }
  Rat scale = den_.content();
  if (sgn(den_.leading().coeff) < 0) scale = -scale;
  if (scale != 1) {
    const Rat inv = Rat(1) / scale;
    num_ = num_.scaled(inv);
    den_ = den_.scaled(inv);
  }
  // A non-monomial denominator that divides the numerator disappears.
  if (den_.size() > 1) {
    auto [m, core] = split_monomial(den_);
    if (num_.total_degree() >= core.total_degree()) {
      if (auto q = num_.divide_exact(core)) {
        num_ = std::move(*q);
        den_ = MPoly(m, Rat(1));
      }
    }
  }
}

Rat RFunc::constant_value() const {
  if (!is_constant()) throw std::domain_error("expression is not constant");
  return num_.constant_term() / den_.constant_term();
}

std::set<Symbol> RFunc::free_symbols() const {
  auto s = num_.free_symbols();
  auto d = den_.free_symbols();
  s.insert(d.begin(), d.end());
  return s;
}

RFunc& RFunc::operator+=(const RFunc& o) {
  if (o.is_zero()) return *this;
  if (is_zero()) return *this = o;
  if (den_ == o.den_) {
    num_ += o.num_;
    canonicalize();
    return *this;
  }
  // Common denominator: lcm of monomial parts times the larger core when one
  // core divides the other, otherwise the product of cores.
  auto [ma, ca] = split_monomial(den_);
  auto [mb, cb] = split_monomial(o.den_);
  const Monomial m = monomial_lcm(ma, mb);
  MPoly fa;
  MPoly fb;
  MPoly core;
  if (ca == cb) {
    core = ca;
    fa = MPoly(1);
    fb = MPoly(1);
  } else if (auto q = ca.divide_exact(cb); q && !cb.is_constant()) {
    core = ca;
    fa = MPoly(1);
    fb = *q;
  } else if (auto r = cb.divide_exact(ca); r && !ca.is_constant()) {
    core = cb;
    fa = *r;
    fb = MPoly(1);
  } else {
    core = ca * cb;
    fa = cb;
    fb = ca;
  }
  MPoly n = (num_ * fa).times(m / ma) + (o.num_ * fb).times(m / mb);
  num_ = std::move(n);
  den_ = core.times(m);
  canonicalize();
  return *this;
}

RFunc& RFunc::operator*=(const RFunc& o) {
  if (is_zero()) return *this;
  if (o.is_zero()) return *this = RFunc();
  num_ = num_ * o.num_;
  den_ = den_ * o.den_;
  canonicalize();
  return *this;
}

RFunc& RFunc::operator/=(const RFunc& o) {
  if (o.is_zero()) throw ZeroDenominator("division by the zero function");
  if (is_zero()) return *this;
  num_ = num_ * o.den_;
  den_ = den_ * o.num_;
  canonicalize();
  return *this;
}

bool operator==(const RFunc& a, const RFunc& b) {
  if (a.den_ == b.den_) return a.num_ == b.num_;
  return a.num_ * b.den_ == b.num_ * a.den_;
}

RFunc RFunc::pow(int k) const {
  if (k >= 0) return RFunc(num_.pow(static_cast<unsigned>(k)), den_.pow(static_cast<unsigned>(k)));
  if (is_zero()) throw ZeroDenominator("negative power of the zero function");
  const auto e = static_cast<unsigned>(-k);
  return RFunc(den_.pow(e), num_.pow(e));
}

RFunc RFunc::diff(Symbol s) const {
  if (den_.is_constant()) return RFunc(num_.diff(s), den_);
  auto [m, core] = split_monomial(den_);
  if (core.diff(s).is_zero()) {
    // den = m * core with core free of s: only the monomial part is differentiated.
    const MPoly mp(m, Rat(1));
    return RFunc(num_.diff(s) * mp - num_ * mp.diff(s), (mp * mp) * core);
  }
  return RFunc(num_.diff(s) * den_ - num_ * den_.diff(s), den_ * den_);
}

Rat RFunc::evaluate(const std::map<Symbol, Rat>& point) const {
  const Rat d = den_.evaluate(point);
  if (sgn(d) == 0) throw ZeroDenominator("denominator vanishes at evaluation point");
  return num_.evaluate(point) / d;
}

RFunc RFunc::partial_evaluate(const std::map<Symbol, Rat>& point) const {
  MPoly d = den_.partial_evaluate(point);
  if (d.is_zero()) throw ZeroDenominator("denominator vanishes identically after specialization");
  return RFunc(num_.partial_evaluate(point), std::move(d));
}

// ---------------------------------------------------------------------------

RFunc substitute(const MPoly& e, const Bindings& bindings) {
  if (e.is_zero()) return RFunc();
  // Homogenize over the bound symbols: with s -> n_s/d_s and E_s the highest
  // power of s in e, multiply through by prod d_s^E_s so that every term
  // becomes a polynomial; then divide once.
  struct Slot {
    Symbol s;
    const RFunc* value;
    std::uint32_t max_exp;
    std::vector<MPoly> num_pows;
    std::vector<MPoly> den_pows;
  };
  std::vector<Slot> slots;
  for (const auto& [s, v] : bindings) {
    const auto e_max = e.degree_in(s);
    if (e_max == 0) continue;
    slots.push_back({s, &v, e_max, {}, {}});
  }
  if (slots.empty()) return RFunc(e);

  MPoly common_den(1);
  for (auto& slot : slots) {
    slot.num_pows.reserve(slot.max_exp + 1);
    slot.den_pows.reserve(slot.max_exp + 1);
    slot.num_pows.emplace_back(1);
    slot.den_pows.emplace_back(1);
    for (std::uint32_t k = 1; k <= slot.max_exp; ++k) {
      slot.num_pows.push_back(slot.num_pows.back() * slot.value->num());
      slot.den_pows.push_back(slot.den_pows.back() * slot.value->den());
    }
    common_den = common_den * slot.den_pows.back();
  }

  // Group terms by the exponent pattern of the bound symbols so the expensive
  // products are formed once per pattern.
  std::map<std::vector<std::uint32_t>, std::vector<MPoly::Term>> groups;
  for (const auto& term : e.terms()) {
    std::vector<std::uint32_t> key;
    key.reserve(slots.size());
    Monomial rest = term.mono;
    for (const auto& slot : slots) {
      key.push_back(term.mono.exponent(slot.s));
      rest = rest.without(slot.s);
    }
    groups[key].push_back({std::move(rest), term.coeff});
  }

  MPoly total;
  for (auto& [key, rest_terms] : groups) {
    MPoly factor = MPoly::from_terms(std::move(rest_terms));
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto k = key[i];
      if (k > 0) factor = factor * slots[i].num_pows[k];
      if (k < slots[i].max_exp) factor = factor * slots[i].den_pows[slots[i].max_exp - k];
    }
    total += factor;
  }
  return RFunc(std::move(total), std::move(common_den));
}

RFunc substitute(const RFunc& e, const Bindings& bindings) {
  RFunc n = substitute(e.num(), bindings);
  if (e.den().is_constant()) return n / RFunc(e.den());
  RFunc d = substitute(e.den(), bindings);
  if (d.is_zero()) throw ZeroDenominator("substitution makes a denominator identically zero");
  return n / d;
}

bool den_is_t_monomial(const RFunc& e, Symbol t) {
  const MPoly& d = e.den();
  if (d.size() != 1) return false;
  for (const auto& [id, exp] : d.leading().mono.factors())
    if (id != t.id()) return false;
  return true;
}

unsigned t_pole_order(const RFunc& e, Symbol t) { return e.den().min_degree_in(t); }

int order_along(const RFunc& e, Symbol s) {
  if (e.is_zero()) return 0;
  return static_cast<int>(e.num().min_degree_in(s)) - static_cast<int>(e.den().min_degree_in(s));
}

}  // namespace hp3
