#include "hp3/singularity/laurent.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "hp3/numerics/compiled.hpp"

namespace hp3 {
namespace {

template <class Scalar>
struct Context {
  /// Converts a t-free coefficient (rational in the parameters) to Scalar.
  std::function<Scalar(const RFunc&)> convert;
  /// Value of the n-th free parameter (1-based).
  std::function<Scalar(int)> free_param;
  std::function<Symbol(int)> free_symbol = [](int n) { return sym("f" + std::to_string(n)); };
};

/// sum c[k] tau^(lo + k), k = 0..c.size()-1.
template <class Scalar>
struct Series {
  int lo = 0;
  std::vector<Scalar> c;

  Scalar at(int e) const {
    const int k = e - lo;
    return (k >= 0 && k < static_cast<int>(c.size())) ? c[k] : Scalar(0);
  }
};

template <class Scalar>
Series<Scalar> mul(const Series<Scalar>& a, const Series<Scalar>& b, int hi) {
  Series<Scalar> out;
  out.lo = a.lo + b.lo;
  const int len = hi - out.lo + 1;
  if (len <= 0) return out;
  out.c.assign(len, Scalar(0));
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (scalar_is_zero(a.c[i], 0)) continue;
    for (std::size_t j = 0; j < b.c.size() && static_cast<int>(i + j) < len; ++j) out.c[i + j] = out.c[i + j] + a.c[i] * b.c[j];
  }
  return out;
}

/// One monomial of a right-hand side: coefficient series times prod x_j^e_j.
template <class Scalar>
struct RhsTerm {
  std::vector<std::uint32_t> exps;
  Series<Scalar> coeff;  // Taylor series in tau, lo = 0
};

Rat binomial(unsigned n, unsigned k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return Rat(r);
}

/// Taylor coefficients of p(t0 + tau) for p polynomial in t.
template <class Scalar>
std::vector<Scalar> shifted(const MPoly& p, Symbol t, const Scalar& t0, const Context<Scalar>& ctx, int order) {
  const auto cs = p.coefficients_in(t);
  std::vector<Scalar> out(order + 1, Scalar(0));
  for (unsigned j = 0; j < cs.size(); ++j) {
    if (cs[j].is_zero()) continue;
    const Scalar cj = ctx.convert(RFunc(cs[j]));
    Scalar t0pow(1);  // t0^(j-k), built from k = j downwards
    for (int k = static_cast<int>(j); k >= 0; --k) {
      if (k <= order) out[k] = out[k] + cj * ctx.convert(RFunc(binomial(j, k))) * t0pow;
      t0pow = t0pow * t0;
    }
  }
  return out;
}

template <class Scalar>
Series<Scalar> taylor(const RFunc& f, Symbol t, const Scalar& t0, const Context<Scalar>& ctx, int order) {
  const auto n = shifted(f.num(), t, t0, ctx, order);
  const auto d = shifted(f.den(), t, t0, ctx, order);
  if (scalar_is_zero(d[0], 0)) throw std::domain_error("coefficient has a pole at the expansion point");
  Series<Scalar> out;
  out.c.assign(order + 1, Scalar(0));
  const Scalar inv = Scalar(1) / d[0];
  for (int k = 0; k <= order; ++k) {
    Scalar acc = n[k];
    for (int j = 1; j <= k; ++j) acc = acc - d[j] * out.c[k - j];
    out.c[k] = acc * inv;
  }
  return out;
}

template <class Scalar>
class Engine {
 public:
  Engine(const ODESystem& s, std::vector<int> m, const Scalar& t0, const Context<Scalar>& ctx, int depth)
      : s_(s), m_(std::move(m)), t0_(t0), ctx_(ctx), depth_(depth) {
    min_m_ = *std::min_element(m_.begin(), m_.end());
    const int max_order = depth + 4;
    for (auto v : s.state) {
      const RFunc& f = s[v];
      for (auto w : s.state)
        if (f.den().degree_in(w) > 0) throw std::invalid_argument("laurent_solve: right-hand side must be polynomial");
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
      std::vector<RhsTerm<Scalar>> ts;
      for (auto& [e, c] : groups) ts.push_back({e, taylor(RFunc(c, f.den()), s.indep, t0_, ctx_, max_order)});
      rhs_.push_back(std::move(ts));
    }
  }

  /// Residual of equation i at tau^e given coefficient tables coeffs[j][0..kmax].
  std::vector<Scalar> residuals(const std::vector<std::vector<Scalar>>& coeffs, const std::vector<int>& orders) const {
    const std::size_t n = s_.state.size();
    const int hi = *std::max_element(orders.begin(), orders.end());
    std::vector<Series<Scalar>> x(n);
    for (std::size_t j = 0; j < n; ++j) {
      x[j].lo = -m_[j];
      x[j].c = coeffs[j];
    }
    std::vector<Scalar> out(n, Scalar(0));
    for (std::size_t i = 0; i < n; ++i) {
      const int e = orders[i];
      // LHS: d/dtau of x_i at tau^e is (e + 1) * coefficient at tau^(e+1).
      Scalar lhs = Scalar(e + 1) * x[i].at(e + 1);
      Scalar rhs(0);
      for (const auto& term : rhs_[i]) {
        // Lowest exponent still to be multiplied in, so that intermediate
        // products are truncated relative to the final one.
        int pending = 0;
        for (std::size_t j = 0; j < n; ++j) pending += static_cast<int>(term.exps[j]) * x[j].lo;
        Series<Scalar> prod = term.coeff;
        for (std::size_t j = 0; j < n; ++j)
          for (std::uint32_t p = 0; p < term.exps[j]; ++p) {
            pending -= x[j].lo;
            prod = mul(prod, x[j], hi - pending);
          }
        rhs = rhs + prod.at(e);
      }
      out[i] = lhs - rhs;
    }
    return out;
  }

  LaurentSolution<Scalar> run(const std::vector<std::optional<Scalar>>& lead) {
    const std::size_t n = s_.state.size();
    LaurentSolution<Scalar> sol;
    sol.t0 = t0_;
    sol.vars = s_.state;
    sol.pole_order = m_;
    sol.depth = depth_;
    std::vector<std::vector<Scalar>> c(n);
    int free_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (lead[i]) {
        c[i].push_back(*lead[i]);
      } else {
        ++free_count;
        sol.free_parameters.push_back(ctx_.free_symbol(free_count));
        sol.free_parameter_positions.insert(0);
        c[i].push_back(ctx_.free_param(free_count));
      }
    }
    auto orders_at = [&](int k) {
      std::vector<int> o(n);
      for (std::size_t i = 0; i < n; ++i) o[i] = k - m_[i] - 1;
      return o;
    };
    {
      const auto r0 = residuals(c, orders_at(0));
      double scale = 0;
      for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, scalar_magnitude(c[i][0]));
      for (const auto& r : r0)
        if (!scalar_is_zero(r, scale * scale + 1)) throw InconsistentResonance("leading balance is not satisfied");
    }
    for (int k = 1; k <= depth_; ++k) {
      for (auto& ci : c) ci.push_back(Scalar(0));
      const auto orders = orders_at(k);
      const auto r0 = residuals(c, orders);
      Mat<Scalar> K(n, n);
      for (std::size_t j = 0; j < n; ++j) {
        c[j][k] = Scalar(1);
        const auto rj = residuals(c, orders);
        c[j][k] = Scalar(0);
        for (std::size_t i = 0; i < n; ++i) K(i, j) = rj[i] - r0[i];
      }
      Vec<Scalar> rhs(n);
      for (std::size_t i = 0; i < n; ++i) rhs(i) = -r0[i];
      LinearSolution<Scalar> ls;
      try {
        ls = solve_linear<Scalar>(K, rhs);
      } catch (const InconsistentSystem&) {
        throw InconsistentResonance("resonance at order " + std::to_string(k) + " is inconsistent");
      }
      Vec<Scalar> val = ls.particular;
      for (std::size_t f = 0; f < ls.kernel.size(); ++f) {
        ++free_count;
        sol.free_parameters.push_back(ctx_.free_symbol(free_count));
        sol.free_parameter_positions.insert(k);
        const Scalar fp = ctx_.free_param(free_count);
        for (std::size_t i = 0; i < n; ++i) val(i) = val(i) + fp * ls.kernel[f](i);
      }
      for (std::size_t i = 0; i < n; ++i) c[i][k] = val(i);
    }
    sol.coeffs = std::move(c);
    return sol;
  }

 private:
  const ODESystem& s_;
  std::vector<int> m_;
  int min_m_ = 0;
  Scalar t0_;
  Context<Scalar> ctx_;
  int depth_;
  std::vector<std::vector<RhsTerm<Scalar>>> rhs_;
};

void check_args(const ODESystem& s, const LeadingOrders& lead, int depth) {
  if (lead.exponents.size() != s.state.size()) throw std::invalid_argument("laurent_solve: leading orders do not match the system");
  if (depth < 1) throw std::invalid_argument("laurent_solve: depth must be positive");
}

}  // namespace

template <class Scalar>
Scalar LaurentSolution<Scalar>::residue(Symbol v) const {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] != v) continue;
    const int k = pole_order[i] - 1;
    if (k < 0 || k >= static_cast<int>(coeffs[i].size())) return Scalar(0);
    return coeffs[i][k];
  }
  throw std::invalid_argument("residue: unknown variable " + v.name());
}

template struct LaurentSolution<RFunc>;
template struct LaurentSolution<double>;

LaurentSolution<RFunc> laurent_solve(const ODESystem& s, const LeadingOrders& lead, const Rat& t0, int depth) {
  check_args(s, lead, depth);
  if (t0 == 0) throw std::invalid_argument("laurent_solve: t0 = 0 is a fixed singularity");
  if (!lead.exact) throw std::invalid_argument("laurent_solve: exact mode needs exact leading coefficients");
  Context<RFunc> ctx;
  ctx.convert = [](const RFunc& f) { return f; };
  ctx.free_param = [](int n) { return RFunc(sym("f" + std::to_string(n))); };
  std::vector<std::optional<RFunc>> lc;
  for (std::size_t i = 0; i < lead.coeffs.size(); ++i) {
    if (lead.free[i]) lc.emplace_back(std::nullopt);
    else lc.emplace_back(substitute(lead.coeffs[i], {{sym("t1"), RFunc(t0)}}));
  }
  Engine<RFunc> e(s, lead.exponents, RFunc(t0), ctx, depth);
  return e.run(lc);
}

LaurentSolution<double> laurent_solve(const ODESystem& s, const LeadingOrders& lead, double t0, int depth,
                                      const std::map<Symbol, double>& params, const std::vector<double>& free_values) {
  check_args(s, lead, depth);
  if (t0 == 0) throw std::invalid_argument("laurent_solve: t0 = 0 is a fixed singularity");
  std::vector<Symbol> layout;
  std::vector<double> vals;
  for (const auto& [k, v] : params) {
    layout.push_back(k);
    vals.push_back(v);
  }
  const auto t1 = sym("t1");
  if (!params.count(t1)) {
    layout.push_back(t1);
    vals.push_back(t0);
  }
  Context<double> ctx;
  ctx.convert = [layout, vals](const RFunc& f) { return CompiledRFunc(f, layout)(vals); };
  ctx.free_param = [free_values](int n) {
    return n - 1 < static_cast<int>(free_values.size()) ? free_values[n - 1] : 0.0;
  };
  std::vector<std::optional<double>> lc;
  for (std::size_t i = 0; i < lead.coeffs.size(); ++i) {
    if (lead.free[i]) lc.emplace_back(std::nullopt);
    else if (!lead.exact) lc.emplace_back(lead.numeric[i]);
    else lc.emplace_back(ctx.convert(lead.coeffs[i]));
  }
  Engine<double> e(s, lead.exponents, t0, ctx, depth);
  return e.run(lc);
}

std::vector<int> laurent_residual_orders(const ODESystem& s, const LaurentSolution<RFunc>& sol) {
  Context<RFunc> ctx;
  ctx.convert = [](const RFunc& f) { return f; };
  ctx.free_param = [](int n) { return RFunc(sym("f" + std::to_string(n))); };
  Engine<RFunc> e(s, sol.pole_order, sol.t0, ctx, sol.depth);
  const std::size_t n = s.state.size();
  std::vector<int> out(n, std::numeric_limits<int>::max());
  const int min_m = *std::min_element(sol.pole_order.begin(), sol.pole_order.end());
  for (int k = 0; k <= sol.depth + 2; ++k) {
    std::vector<int> orders(n);
    for (std::size_t i = 0; i < n; ++i) orders[i] = k - sol.pole_order[i] - 1;
    (void)min_m;
    const auto r = e.residuals(sol.coeffs, orders);
    for (std::size_t i = 0; i < n; ++i)
      if (out[i] == std::numeric_limits<int>::max() && !r[i].is_zero()) out[i] = orders[i];
  }
  return out;
}

std::vector<double> laurent_evaluate(const LaurentSolution<RFunc>& sol, double tau,
                                     const std::map<Symbol, double>& values) {
  std::vector<Symbol> layout;
  std::vector<double> vals;
  for (const auto& [k, v] : values) {
    layout.push_back(k);
    vals.push_back(v);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < sol.vars.size(); ++i) {
    double acc = 0;
    for (std::size_t k = sol.coeffs[i].size(); k-- > 0;) {
      const double c = CompiledRFunc(sol.coeffs[i][k], layout)(vals);
      acc += c * std::pow(tau, static_cast<int>(k) - sol.pole_order[i]);
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> laurent_evaluate(const LaurentSolution<double>& sol, double tau) {
  std::vector<double> out;
  for (std::size_t i = 0; i < sol.vars.size(); ++i) {
    double acc = 0;
    for (std::size_t k = 0; k < sol.coeffs[i].size(); ++k)
      acc += sol.coeffs[i][k] * std::pow(tau, static_cast<int>(k) - sol.pole_order[i]);
    out.push_back(acc);
  }
  return out;
}

std::vector<double> laurent_evaluate_derivative(const LaurentSolution<double>& sol, double tau) {
  std::vector<double> out;
  for (std::size_t i = 0; i < sol.vars.size(); ++i) {
    double acc = 0;
    for (std::size_t k = 0; k < sol.coeffs[i].size(); ++k) {
      const int e = static_cast<int>(k) - sol.pole_order[i];
      if (e != 0) acc += e * sol.coeffs[i][k] * std::pow(tau, e - 1);
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace hp3
