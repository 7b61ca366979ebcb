#include "hp3/models/system.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace hp3 {

void ODESystem::validate() const {
  if (rhs.size() != state.size()) throw std::invalid_argument("rhs keys differ from state");
  std::set<Symbol> allowed(state.begin(), state.end());
  allowed.insert(indep);
  allowed.insert(params.begin(), params.end());
  for (auto s : state) {
    auto it = rhs.find(s);
    if (it == rhs.end()) throw std::invalid_argument("missing rhs for " + s.name());
    for (auto f : it->second.free_symbols())
      if (!allowed.count(f)) throw std::invalid_argument("rhs of " + s.name() + " mentions stray symbol " + f.name());
  }
}

RFunc ODESystem::total_derivative(const RFunc& f) const {
  RFunc out = f.diff(indep);
  for (auto s : state) {
    RFunc d = f.diff(s);
    if (!d.is_zero()) out += d * rhs.at(s);
  }
  return out;
}

ODESystem ODESystem::substituted(const Bindings& b) const {
  ODESystem out = *this;
  for (auto& [s, e] : out.rhs) e = substitute(e, b);
  for (const auto& [s, v] : b) out.params.erase(s);
  return out;
}

bool ChartMap::inverse_round_trips() const {
  if (!inverse) return false;
  for (auto w : target_vars) {
    if (!(substitute(forward.at(w), *inverse) - RFunc(w)).is_zero()) return false;
  }
  return true;
}

bool ChartMap::inverse_round_trips_sampled(int trials) const {
  if (!inverse) return false;
  std::set<Symbol> free;
  for (const auto& [s, e] : *inverse)
    for (auto f : e.free_symbols()) free.insert(f);
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<int> num(-40, 40), den(1, 13);
  int done = 0;
  for (int attempt = 0; done < trials && attempt < 20 * trials; ++attempt) {
    std::map<Symbol, Rat> pt;
    for (auto f : free) pt[f] = make_rat(num(rng), den(rng));
    try {
      std::map<Symbol, Rat> src = pt;
      for (auto s : source_vars) src[s] = inverse->at(s).evaluate(pt);
      for (auto w : target_vars)
        if (forward.at(w).evaluate(src) != pt[w]) return false;
      ++done;
    } catch (const ZeroDenominator&) {
      // landed on a pole; draw again
    }
  }
  return done == trials;
}

ChartMap ChartMap::substituted(const Bindings& b) const {
  ChartMap out = *this;
  for (auto& [s, e] : out.forward) e = substitute(e, b);
  if (out.inverse)
    for (auto& [s, e] : *out.inverse) e = substitute(e, b);
  return out;
}

ChartMap identity_chart(const std::vector<Symbol>& vars, std::string id) {
  ChartMap c{std::move(id), vars, vars, {}, Bindings{}};
  for (auto v : vars) {
    c.forward[v] = RFunc(v);
    (*c.inverse)[v] = RFunc(v);
  }
  return c;
}

ChartMap compose(const ChartMap& first, const ChartMap& second) {
  ChartMap out;
  out.id = first.id + "*" + second.id;
  out.source_vars = first.source_vars;
  out.target_vars = second.target_vars;
  for (auto w : second.target_vars) out.forward[w] = substitute(second.forward.at(w), first.forward);
  if (first.inverse && second.inverse) {
    Bindings inv;
    for (auto s : first.source_vars) inv[s] = substitute(first.inverse->at(s), *second.inverse);
    out.inverse = std::move(inv);
  }
  return out;
}

std::optional<Bindings> invert_triangular(const ChartMap& c) {
  if (c.source_vars.size() != c.target_vars.size()) return std::nullopt;
  Bindings solved;
  std::vector<bool> used(c.target_vars.size(), false);
  const std::set<Symbol> sources(c.source_vars.begin(), c.source_vars.end());
  bool progress = true;
  while (solved.size() < c.source_vars.size() && progress) {
    progress = false;
    for (std::size_t i = 0; i < c.target_vars.size(); ++i) {
      if (used[i]) continue;
      const Symbol w = c.target_vars[i];
      const RFunc f = substitute(c.forward.at(w), solved);
      std::vector<Symbol> unknown;
      for (auto s : f.free_symbols())
        if (sources.count(s) && !solved.count(s)) unknown.push_back(s);
      if (unknown.size() != 1) continue;
      const Symbol s = unknown.front();
      // w - f = N/D; N must be A*s + B.
      const RFunc eq = RFunc(w) - f;
      const auto coeffs = eq.num().coefficients_in(s);
      if (coeffs.size() != 2) continue;
      solved[s] = RFunc(-coeffs[0]) / RFunc(coeffs[1]);
      used[i] = true;
      progress = true;
    }
  }
  if (solved.size() != c.source_vars.size()) return std::nullopt;
  return solved;
}

std::map<Symbol, Rat> ParamMap::apply(const std::map<Symbol, Rat>& point) const {
  std::map<Symbol, Rat> out = point;
  for (const auto& [s, e] : images) out[s] = e.evaluate(point);
  return out;
}

ParamMap ParamMap::then(const ParamMap& next) const {
  ParamMap out;
  for (const auto& [s, e] : next.images) out.images[s] = substitute(e, images);
  for (const auto& [s, e] : images)
    if (!out.images.count(s)) out.images[s] = e;
  return out;
}

bool ParamMap::is_affine() const {
  return std::all_of(images.begin(), images.end(),
                     [](const auto& kv) { return kv.second.is_polynomial() && kv.second.num().total_degree() <= 1; });
}

ODESystem pushforward(const ODESystem& s, const ChartMap& c) {
  if (!c.inverse) throw std::invalid_argument("pushforward through chart '" + c.id + "' needs an inverse");
  ODESystem out;
  out.state = c.target_vars;
  out.indep = s.indep;
  out.params = s.params;
  for (auto w : c.target_vars) out.rhs[w] = substitute(s.total_derivative(c.forward.at(w)), *c.inverse);
  return out;
}

std::map<Symbol, RFunc> transport_residual(const ODESystem& s, const ChartMap& c, const ODESystem& target) {
  std::map<Symbol, RFunc> out;
  for (auto w : c.target_vars)
    out[w] = s.total_derivative(c.forward.at(w)) - substitute(target.rhs.at(w), c.forward);
  return out;
}

RFunc jacobian_det(const ChartMap& c) {
  if (c.source_vars.size() != 3 || c.target_vars.size() != 3)
    throw std::invalid_argument("jacobian_det is implemented for 3x3 charts");
  RFunc m[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = c.forward.at(c.target_vars[i]).diff(c.source_vars[j]);
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace hp3
