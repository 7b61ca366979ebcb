#include "hp3/numerics/compiled.hpp"

#include <cmath>
#include <unordered_map>

namespace hp3 {

double to_double_exact(const Rat& r) { return r.get_d(); }

CompiledPoly::CompiledPoly(const MPoly& p, const std::vector<Symbol>& layout) {
  std::unordered_map<std::uint32_t, std::uint32_t> slot;
  for (std::uint32_t i = 0; i < layout.size(); ++i) slot[layout[i].id()] = i;
  terms_.reserve(p.size());
  for (const auto& term : p.terms()) {
    Term t{to_double_exact(term.coeff), {}};
    for (const auto& [id, e] : term.mono.factors()) {
      auto it = slot.find(id);
      if (it == slot.end())
        throw std::invalid_argument("symbol '" + Symbol::from_id(id).name() + "' missing from the variable layout");
      t.powers.emplace_back(it->second, e);
    }
    terms_.push_back(std::move(t));
  }
}

double CompiledPoly::operator()(std::span<const double> v) const {
  double sum = 0;
  for (const auto& t : terms_) {
    double x = t.coeff;
    for (const auto& [s, e] : t.powers) {
      const double b = v[s];
      switch (e) {
        case 1: x *= b; break;
        case 2: x *= b * b; break;
        case 3: x *= b * b * b; break;
        default: x *= std::pow(b, static_cast<int>(e));
      }
    }
    sum += x;
  }
  return sum;
}

CompiledRFunc::CompiledRFunc(const RFunc& f, const std::vector<Symbol>& layout, double pole_tol)
    : num_(f.num(), layout), den_(f.den(), layout), den_is_one_(f.den() == MPoly(1)), pole_tol_(pole_tol) {}

double CompiledRFunc::eval(std::span<const double> v, bool& ok) const {
  if (den_is_one_) {
    ok = true;
    return num_(v);
  }
  const double d = den_(v);
  if (!(std::abs(d) >= pole_tol_)) {
    ok = false;
    return 0;
  }
  ok = true;
  return num_(v) / d;
}

double CompiledRFunc::operator()(std::span<const double> v) const {
  bool ok = true;
  const double r = eval(v, ok);
  if (!ok) throw NearPole("denominator below tolerance");
  return r;
}

}  // namespace hp3
