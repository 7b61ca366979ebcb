#include "hp3/algebra/mpoly.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace hp3 {
namespace {

std::uint32_t checked_add(std::uint32_t a, std::uint32_t b) {
  constexpr std::uint32_t kMax = std::numeric_limits<std::int32_t>::max();
  if (a > kMax - b) throw std::overflow_error("monomial exponent overflow");
  return a + b;
}

bool desc(const MPoly::Term& a, const MPoly::Term& b) { return grlex(a.mono, b.mono) > 0; }

}  // namespace

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(Symbol s, std::uint32_t exponent) {
  if (exponent > 0) {
    factors_.emplace_back(s.id(), exponent);
    degree_ = exponent;
  }
}

std::uint32_t Monomial::exponent(Symbol s) const {
  for (const auto& [id, e] : factors_)
    if (id == s.id()) return e;
  return 0;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial out;
  out.factors_.reserve(factors_.size() + o.factors_.size());
  auto a = factors_.begin();
  auto b = o.factors_.begin();
  while (a != factors_.end() || b != o.factors_.end()) {
    if (b == o.factors_.end() || (a != factors_.end() && a->first < b->first)) {
      out.factors_.push_back(*a++);
    } else if (a == factors_.end() || b->first < a->first) {
      out.factors_.push_back(*b++);
    } else {
      out.factors_.emplace_back(a->first, checked_add(a->second, b->second));
      ++a;
      ++b;
    }
  }
  out.degree_ = checked_add(degree_, o.degree_);
  return out;
}

bool Monomial::divisible_by(const Monomial& o) const {
  if (o.degree_ > degree_) return false;
  auto a = factors_.begin();
  for (const auto& [id, e] : o.factors_) {
    while (a != factors_.end() && a->first < id) ++a;
    if (a == factors_.end() || a->first != id || a->second < e) return false;
  }
  return true;
}

Monomial Monomial::operator/(const Monomial& o) const {
  if (!divisible_by(o)) throw std::domain_error("monomial division is not exact");
  Monomial out;
  auto b = o.factors_.begin();
  for (const auto& [id, e] : factors_) {
    std::uint32_t sub = 0;
    if (b != o.factors_.end() && b->first == id) sub = (b++)->second;
    if (e > sub) out.factors_.emplace_back(id, e - sub);
  }
  out.degree_ = degree_ - o.degree_;
  return out;
}

Monomial Monomial::without(Symbol s) const {
  Monomial out;
  for (const auto& f : factors_) {
    if (f.first == s.id()) continue;
    out.factors_.push_back(f);
    out.degree_ += f.second;
  }
  return out;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
  Monomial out;
  auto j = b.factors_.begin();
  for (const auto& [id, e] : a.factors_) {
    while (j != b.factors_.end() && j->first < id) ++j;
    if (j != b.factors_.end() && j->first == id) {
      const auto m = std::min(e, j->second);
      out.factors_.emplace_back(id, m);
      out.degree_ += m;
    }
  }
  return out;
}

std::strong_ordering grlex(const Monomial& a, const Monomial& b) {
  if (a.degree_ != b.degree_) return a.degree_ <=> b.degree_;
  const auto n = std::min(a.factors_.size(), b.factors_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& fa = a.factors_[i];
    const auto& fb = b.factors_[i];
    // The monomial carrying the earlier symbol is larger.
    if (fa.first != fb.first) return fa.first < fb.first ? std::strong_ordering::greater : std::strong_ordering::less;
    if (fa.second != fb.second) return fa.second <=> fb.second;
  }
  return a.factors_.size() <=> b.factors_.size();
}

// ---------------------------------------------------------------------------
// MPoly

MPoly::MPoly(const Rat& c) {
  if (sgn(c) != 0) terms_.push_back({Monomial(), c});
}

MPoly::MPoly(Symbol s) { terms_.push_back({Monomial(s), Rat(1)}); }

MPoly::MPoly(Monomial m, Rat c) {
  if (sgn(c) != 0) terms_.push_back({std::move(m), std::move(c)});
}

MPoly MPoly::from_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(), desc);
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& term : terms) {
    if (!out.empty() && out.back().mono == term.mono) {
      out.back().coeff += term.coeff;
    } else {
      if (!out.empty() && sgn(out.back().coeff) == 0) out.pop_back();
      out.push_back(std::move(term));
    }
  }
  if (!out.empty() && sgn(out.back().coeff) == 0) out.pop_back();
  return MPoly(std::move(out), 0);
}

Rat MPoly::constant_term() const {
  if (!terms_.empty() && terms_.back().mono.is_one()) return terms_.back().coeff;
  return Rat(0);
}

std::uint32_t MPoly::total_degree() const { return terms_.empty() ? 0 : terms_.front().mono.degree(); }

std::uint32_t MPoly::degree_in(Symbol s) const {
  std::uint32_t d = 0;
  for (const auto& term : terms_) d = std::max(d, term.mono.exponent(s));
  return d;
}

std::uint32_t MPoly::min_degree_in(Symbol s) const {
  if (terms_.empty()) return 0;
  std::uint32_t d = std::numeric_limits<std::uint32_t>::max();
  for (const auto& term : terms_) d = std::min(d, term.mono.exponent(s));
  return d;
}

std::set<Symbol> MPoly::free_symbols() const {
  std::set<Symbol> out;
  for (const auto& term : terms_)
    for (const auto& f : term.mono.factors()) out.insert(Symbol::from_id(f.first));
  return out;
}

MPoly MPoly::operator-() const {
  MPoly out = *this;
  for (auto& term : out.terms_) term.coeff = -term.coeff;
  return out;
}

namespace {

// Merges two descending term lists, adding coefficients; `sign` = -1 subtracts.
std::vector<MPoly::Term> merge(const std::vector<MPoly::Term>& a, const std::vector<MPoly::Term>& b, int sign) {
  std::vector<MPoly::Term> out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    const auto c = grlex(i->mono, j->mono);
    if (c > 0) {
      out.push_back(*i++);
    } else if (c < 0) {
      out.push_back({j->mono, sign > 0 ? j->coeff : Rat(-j->coeff)});
      ++j;
    } else {
      Rat sum = sign > 0 ? Rat(i->coeff + j->coeff) : Rat(i->coeff - j->coeff);
      if (sgn(sum) != 0) out.push_back({i->mono, std::move(sum)});
      ++i;
      ++j;
    }
  }
  for (; i != a.end(); ++i) out.push_back(*i);
  for (; j != b.end(); ++j) out.push_back({j->mono, sign > 0 ? j->coeff : Rat(-j->coeff)});
  return out;
}

}  // namespace

MPoly& MPoly::operator+=(const MPoly& o) {
  if (o.terms_.empty()) return *this;
  terms_ = merge(terms_, o.terms_, +1);
  return *this;
}

MPoly& MPoly::operator-=(const MPoly& o) {
  if (o.terms_.empty()) return *this;
  terms_ = merge(terms_, o.terms_, -1);
  return *this;
}

MPoly operator*(const MPoly& a, const MPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.is_constant()) return b.scaled(a.terms_[0].coeff);
  if (b.is_constant()) return a.scaled(b.terms_[0].coeff);
  std::vector<MPoly::Term> prod;
  prod.reserve(a.size() * b.size());
  for (const auto& ta : a.terms_)
    for (const auto& tb : b.terms_) prod.push_back({ta.mono * tb.mono, ta.coeff * tb.coeff});
  return MPoly::from_terms(std::move(prod));
}

MPoly MPoly::scaled(const Rat& c) const {
  if (sgn(c) == 0) return {};
  MPoly out = *this;
  for (auto& term : out.terms_) term.coeff *= c;
  return out;
}

MPoly MPoly::times(const Monomial& m) const {
  MPoly out = *this;
  for (auto& term : out.terms_) term.mono = term.mono * m;
  return out;
}

MPoly MPoly::pow(unsigned k) const {
  MPoly out(1);
  MPoly base = *this;
  while (k != 0) {
    if (k & 1U) out = out * base;
    k >>= 1U;
    if (k != 0) base = base * base;
  }
  return out;
}

MPoly MPoly::diff(Symbol s) const {
  std::vector<Term> out;
  for (const auto& term : terms_) {
    const auto e = term.mono.exponent(s);
    if (e == 0) continue;
    Monomial m = term.mono.without(s) * Monomial(s, e - 1);
    out.push_back({std::move(m), term.coeff * e});
  }
  // Differentiation can reorder monomials of equal degree, so re-canonicalize.
  return from_terms(std::move(out));
}

std::optional<MPoly> MPoly::divide_exact(const MPoly& d) const {
  if (d.is_zero()) throw std::domain_error("division by the zero polynomial");
  if (is_zero()) return MPoly();
  if (d.is_constant()) return scaled(Rat(1) / d.terms_[0].coeff);
  const auto& lead = d.terms_.front();
  MPoly rem = *this;
  std::vector<Term> quot;
  while (!rem.is_zero()) {
    const auto& lt = rem.terms_.front();
    if (!lt.mono.divisible_by(lead.mono)) return std::nullopt;
    Term q{lt.mono / lead.mono, lt.coeff / lead.coeff};
    rem -= d.times(q.mono).scaled(q.coeff);
    quot.push_back(std::move(q));
  }
  return from_terms(std::move(quot));
}

MPoly MPoly::divide_monomial(const Monomial& m) const {
  if (m.is_one()) return *this;
  MPoly out = *this;
  for (auto& term : out.terms_) term.mono = term.mono / m;
  return out;
}

Monomial MPoly::monomial_content() const {
  if (terms_.empty()) return {};
  Monomial g = terms_.front().mono;
  for (const auto& term : terms_) {
    if (g.is_one()) break;
    g = Monomial::gcd(g, term.mono);
  }
  return g;
}

Rat MPoly::content() const {
  if (terms_.empty()) return Rat(1);
  BigInt num_gcd = 0;
  BigInt den_lcm = 1;
  for (const auto& term : terms_) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), term.coeff.get_num_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), term.coeff.get_den_mpz_t());
  }
  Rat c(num_gcd, den_lcm);
  c.canonicalize();
  return c;
}

std::vector<MPoly> MPoly::coefficients_in(Symbol s) const {
  std::vector<std::vector<Term>> buckets(degree_in(s) + 1);
  for (const auto& term : terms_) buckets[term.mono.exponent(s)].push_back({term.mono.without(s), term.coeff});
  std::vector<MPoly> out;
  out.reserve(buckets.size());
  for (auto& b : buckets) out.push_back(from_terms(std::move(b)));
  return out;
}

Rat MPoly::evaluate(const std::map<Symbol, Rat>& point) const {
  Rat sum(0);
  for (const auto& term : terms_) {
    Rat v = term.coeff;
    for (const auto& [id, e] : term.mono.factors()) {
      auto it = point.find(Symbol::from_id(id));
      if (it == point.end()) throw std::invalid_argument("unbound symbol '" + Symbol::from_id(id).name() + "'");
      v *= hp3::pow(it->second, e);
    }
    sum += v;
  }
  return sum;
}

MPoly MPoly::partial_evaluate(const std::map<Symbol, Rat>& point) const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& term : terms_) {
    Rat c = term.coeff;
    Monomial m;
    for (const auto& [id, e] : term.mono.factors()) {
      auto it = point.find(Symbol::from_id(id));
      if (it != point.end())
        c *= hp3::pow(it->second, e);
      else
        m = m * Monomial(Symbol::from_id(id), e);
    }
    out.push_back({std::move(m), std::move(c)});
  }
  return from_terms(std::move(out));
}

}  // namespace hp3
