#include "hp3/models/painleve.hpp"

#include <stdexcept>

#include "hp3/algebra/expr_io.hpp"

namespace hp3 {
namespace {

std::vector<Symbol> syms(std::initializer_list<const char*> names) {
  std::vector<Symbol> out;
  for (const char* n : names) out.push_back(sym(n));
  return out;
}

const std::vector<Symbol>& xyz() {
  static const auto v = syms({"x", "y", "z"});
  return v;
}

Bindings param_bindings(const std::array<std::string, 2>& images) {
  return {{alpha0(), parse(images[0])}, {alpha1(), parse(images[1])}};
}

// Inverse of a map (x,y,z) -> (x,y,z) whose target reuses the source names.
std::optional<Bindings> invert_self_map(const ChartMap& c) {
  const auto tmp = syms({"X", "Y", "Z"});
  ChartMap renamed{c.id, c.source_vars, tmp, {}, std::nullopt};
  for (std::size_t i = 0; i < 3; ++i) renamed.forward[tmp[i]] = c.forward.at(c.target_vars[i]);
  auto inv = invert_triangular(renamed);
  if (!inv) return std::nullopt;
  Bindings back;
  for (std::size_t i = 0; i < 3; ++i) back[tmp[i]] = RFunc(c.target_vars[i]);
  Bindings out;
  for (const auto& [s, e] : *inv) out[s] = substitute(e, back);
  return out;
}

}  // namespace

ModelSource ModelSource::published() {
  ModelSource m;
  m.hamiltonian = "(q^2*p*(p-1) + q*((1-2*a1)*p - a0) + t*p)/t";
  m.eq1_rhs =
      "(t^2*u2 - (2*a1-1)*u - a0)*(t^2*u2 + (2*a1-1)*u + a0)/(2*t^4*u1)"
      " - 4*u1*(u + t*u1)/t + (4*t + (2*a1-1)^2)/(2*t^2)*u1 - 2/t*u2";
  m.system6 = {
      "y",
      "y*z + (2*a1-1)/t^2*x + a0/t^2",
      "-1/2*z^2 - 4/t*x - 4*y - 2/t*z + (2*a1-1)*(2*a1-3)/(2*t^2) + 2/t",
  };
  m.reduction = {"u", "u1", "(u2 - ((2*a1-1)*u + a0)/t^2)/u1"};
  m.reduction_inv = {"x", "y", "y*z + ((2*a1-1)*x + a0)/t^2"};
  m.glue1 = {"x", "-(y*z + (2*(2*a1-1)*x + 2*a0)/t^2)*z", "1/z"};
  m.glue2 = {
      "x + z/2",
      "-((y + 2/t*x - 1/t - (4*(a1-1)*a1 - 7)/(4*t^2))*z"
      " - (2*(2*a1-3)*t*x + 2*(a0+1)*t + 4*a1^2 - 8*a1 + 3)/t^3"
      " + (t*z + 4)/(4*t)*z^2)*z",
      "1/z",
  };
  m.p3_u1 = {"1/x", "y/x", "z/x"};
  m.p3_u2 = {"x/y", "1/y", "z/y"};
  m.p3_u3 = {"x/z", "y/z", "1/z"};
  m.scaled = {"x/z", "y/z^2", "1/z"};
  m.blowup_steps = {
      {"x/y", "1/y", "z/y"},                                                           // U2 chart
      {"X2/Z2", "Z2", "Y2/Z2"},                                                        // Step 1
      {"p1", "q1/r1", "r1"},                                                           // Step 2
      {"p2", "1/q2", "r2"},                                                            // Step 3
      {"(p3 + 1/2)/r3", "(q3 + 1/4)/r3", "r3"},                                        // Step 4
      {"p4", "q4/r4", "r4"},                                                           // Step 5
      {"p5", "(q5 - (5 - 12*a1 + 4*a1^2 + 4*t - 8*t*p5)/(4*t^2))/r5", "r5"},           // Step 6
      {"p6", "(q6 - (3 - 8*a1 + 4*a1^2 + 2*t + 2*a0*t - 6*t*p6 + 4*a1*t*p6)/t^3)/r6", "r6"},  // Step 7
      {"p7", "-q7", "r7"},                                                             // sign flip
  };
  m.s0 = {"x", "y", "z + (2*(2*a1-1)*x + 2*a0)/(t^2*y)"};
  m.s0_params = {"-a0", "1 - a1"};
  m.g =
      "(t*(2*(2*a1-3)*x + (2*a1-3)*z + 2*(a0+1)) + (2*a1-1)*(2*a1-3))"
      "/(t*(t^2*(4*y + z^2) + 4*t*(2*x + z - 1) - (2*a1-1)*(2*a1-5)))";
  // The published y-image reads y + 2*G - 4*G^2; conjugating s0 by pi gives
  // y + 2*z*G - 4*G^2, which is the one that is a symmetry.
  m.s1 = {"x + 2*G", "y + 2*z*G - 4*G^2", "z - 4*G"};
  m.s1_printed = {"x + 2*G", "y + 2*G - 4*G^2", "z - 4*G"};
  m.s1_params = {"-2 - a0", "a1"};
  m.pi_printed = {
      "x + z/2",
      "-y - 2*x/t - z^2/4 - z/t + (2*a1-1)*(2*a1-3)/(4*t^2) + 1/t",
      "-z - 2/t",
  };
  m.pi_params = {"-a0 - 1", "1/2"};
  return m;
}

ChartId chart_id_from_string(const std::string& name) {
  if (name == "p3_u1") return ChartId::p3_u1;
  if (name == "p3_u2") return ChartId::p3_u2;
  if (name == "p3_u3") return ChartId::p3_u3;
  if (name == "scaled") return ChartId::scaled;
  if (name == "glue1") return ChartId::glue1;
  if (name == "glue2") return ChartId::glue2;
  throw std::invalid_argument("unknown chart id '" + name + "'");
}

std::string to_string(ChartId id) {
  switch (id) {
    case ChartId::p3_u1: return "p3_u1";
    case ChartId::p3_u2: return "p3_u2";
    case ChartId::p3_u3: return "p3_u3";
    case ChartId::scaled: return "scaled";
    case ChartId::glue1: return "glue1";
    case ChartId::glue2: return "glue2";
  }
  return "?";
}

ChartMap ModelSet::make_chart(std::string id, const std::vector<Symbol>& src, const std::vector<Symbol>& dst,
                              const std::array<std::string, 3>& forward, const std::string& extra_symbol,
                              const RFunc* extra_value) const {
  ChartMap c{std::move(id), src, dst, {}, std::nullopt};
  Bindings extra;
  if (extra_value) extra[sym(extra_symbol)] = *extra_value;
  for (std::size_t i = 0; i < 3; ++i) {
    RFunc f = parse(forward[i]);
    if (!extra.empty()) f = substitute(f, extra);
    c.forward[dst[i]] = std::move(f);
  }
  return c;
}

ModelSet::ModelSet(const ModelSource& src) : src_(src) {
  hamiltonian_ = parse(src.hamiltonian);
  eq1_rhs_ = parse(src.eq1_rhs);

  system6_.state = xyz();
  system6_.params = {alpha0(), alpha1()};
  for (std::size_t i = 0; i < 3; ++i) system6_.rhs[xyz()[i]] = parse(src.system6[i]);
  system6_.validate();

  reduction_ = make_chart("reduction", syms({"u", "u1", "u2"}), xyz(), src.reduction);
  Bindings red_inv;
  const auto jet = syms({"u", "u1", "u2"});
  for (std::size_t i = 0; i < 3; ++i) red_inv[jet[i]] = parse(src.reduction_inv[i]);
  reduction_.inverse = std::move(red_inv);

  auto add_chart = [&](ChartId id, std::vector<Symbol> dst, const std::array<std::string, 3>& fw) {
    ChartMap c = make_chart(to_string(id), xyz(), dst, fw);
    c.inverse = invert_triangular(c);
    charts_.push_back(std::move(c));
  };
  add_chart(ChartId::p3_u1, syms({"X1", "Y1", "Z1"}), src.p3_u1);
  add_chart(ChartId::p3_u2, syms({"X2", "Y2", "Z2"}), src.p3_u2);
  add_chart(ChartId::p3_u3, syms({"X3", "Y3", "Z3"}), src.p3_u3);
  add_chart(ChartId::scaled, syms({"Xs", "Ys", "Zs"}), src.scaled);
  add_chart(ChartId::glue1, syms({"x1", "y1", "z1"}), src.glue1);
  add_chart(ChartId::glue2, syms({"x2", "y2", "z2"}), src.glue2);

  std::vector<Symbol> prev = xyz();
  for (std::size_t k = 0; k < src.blowup_steps.size(); ++k) {
    std::vector<Symbol> next;
    std::string id;
    if (k == 0) {
      next = syms({"X2", "Y2", "Z2"});
      id = "U2";
    } else if (k + 1 == src.blowup_steps.size()) {
      next = syms({"x2", "y2", "z2"});
      id = "flip";
    } else {
      const auto n = std::to_string(k);
      next = {sym("p" + n), sym("q" + n), sym("r" + n)};
      id = "step" + n;
    }
    ChartMap c = make_chart(id, prev, next, src.blowup_steps[k]);
    c.inverse = invert_triangular(c);
    steps_.push_back(std::move(c));
    prev = next;
  }

  g_ = parse(src.g);
}

const ChartMap& ModelSet::chart(ChartId id) const { return charts_.at(static_cast<std::size_t>(id)); }

ODESystem ModelSet::hamiltonian_system() const {
  const Symbol q = sym("q"), p = sym("p");
  ODESystem s;
  s.state = {q, p};
  s.params = {alpha0(), alpha1()};
  s.rhs[q] = hamiltonian_.diff(p);
  s.rhs[p] = -hamiltonian_.diff(q);
  return s;
}

RFunc ModelSet::eq1_residual(const Jet3& j) const {
  const Jet3 canonical;
  RFunc rhs = eq1_rhs_;
  if (!(j.u == canonical.u && j.u1 == canonical.u1 && j.u2 == canonical.u2))
    rhs = substitute(rhs, {{canonical.u, RFunc(j.u)}, {canonical.u1, RFunc(j.u1)}, {canonical.u2, RFunc(j.u2)}});
  return RFunc(j.u3) - rhs;
}

ODESystem ModelSet::jet_system() const {
  const Jet3 j;
  ODESystem s;
  s.state = {j.u, j.u1, j.u2};
  s.params = {alpha0(), alpha1()};
  s.rhs[j.u] = RFunc(j.u1);
  s.rhs[j.u1] = RFunc(j.u2);
  s.rhs[j.u2] = eq1_rhs_;
  return s;
}

Backlund ModelSet::backlund(const std::string& name) const {
  const Bindings at_three_halves{{alpha1(), parse("3/2")}};
  Backlund b;
  b.name = name;
  if (name == "s0") {
    b.chart = make_chart("s0", xyz(), xyz(), src_.s0);
    b.pmap.images = param_bindings(src_.s0_params);
  } else if (name == "s1" || name == "s1_printed") {
    b.chart = make_chart(name, xyz(), xyz(), name == "s1" ? src_.s1 : src_.s1_printed, "G", &g_);
    b.pmap.images = param_bindings(src_.s1_params);
    b.validity = at_three_halves;
  } else if (name == "pi" || name == "pi_printed") {
    const ChartMap printed = make_chart("pi_printed", xyz(), xyz(), src_.pi_printed);
    b.pmap.images = param_bindings(src_.pi_params);
    b.validity = at_three_halves;
    if (name == "pi_printed") {
      b.chart = printed;
    } else {
      // The printed coordinate formula carries solutions at a1 = 1/2 to
      // a1 = 3/2; the map with the stated parameter action is its inverse.
      auto inv = invert_self_map(printed);
      if (!inv) throw std::logic_error("pi: printed formula is not triangular");
      b.chart = ChartMap{"pi", xyz(), xyz(), std::move(*inv), printed.forward};
    }
  } else {
    throw std::invalid_argument("unknown Backlund transformation '" + name + "'");
  }
  if (!b.chart.inverse) b.chart.inverse = invert_self_map(b.chart);
  if (!b.chart.inverse && b.validity) {
    // Not triangular (s1): try it as an involution, i.e. the same formula
    // read at the image parameters, under its constraint.
    ChartMap c = b.chart.substituted(*b.validity);
    Bindings back;
    for (const auto& [s, e] : c.forward) back[s] = substitute(e, b.pmap.images);
    c.inverse = back;
    if (c.inverse_round_trips_sampled()) b.chart.inverse = std::move(back);
  }
  return b;
}

const ModelSet& default_models() {
  static const ModelSet models;
  return models;
}

RFunc hamiltonian() { return default_models().hamiltonian(); }
ODESystem hamiltonian_system() { return default_models().hamiltonian_system(); }
RFunc eq1_residual(const Jet3& j) { return default_models().eq1_residual(j); }
ODESystem system6() { return default_models().system6(); }
ChartMap reduction_map() { return default_models().reduction_map(); }
ChartMap chart(ChartId id) { return default_models().chart(id); }
Backlund backlund(const std::string& name) { return default_models().backlund(name); }

}  // namespace hp3
