#include "hp3/verify/checks.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hp3/algebra/expr_io.hpp"

namespace hp3 {
namespace {

constexpr std::size_t kWitnessChars = 4000;
constexpr std::size_t kTermCap = 1000000;

/// Collects named residuals of a check; the check passes iff all are zero.
class Verdict {
 public:
  explicit Verdict(std::string id) : start_(std::chrono::steady_clock::now()) { report_.check_id = std::move(id); }

  /// Records a residual; returns true when it is zero.
  bool expect_zero(const std::string& label, const RFunc& r) {
    if (r.size() > kTermCap) {
      fail(label, r, "expression exceeds the term cap");
      return false;
    }
    if (r.is_zero()) return true;
    fail(label, r, {});
    return false;
  }

  /// Records that f must have a pure power of t as denominator; on failure
  /// the witness is the offending denominator.
  bool expect_t_monomial_den(const std::string& label, const RFunc& f) {
    if (den_is_t_monomial(f)) return true;
    fail(label + " denominator", RFunc(f.den()), {});
    return false;
  }

  void expect(const std::string& label, bool ok, const std::string& why) {
    if (ok || failed_) {
      if (!ok) failed_ = true;
      return;
    }
    failed_ = true;
    report_.witness = label + ": " + why;
  }

  void note(const std::string& s) {
    if (!report_.detail.empty()) report_.detail += "; ";
    report_.detail += s;
  }

  CheckReport finish() {
    report_.status = failed_ ? CheckStatus::fail : CheckStatus::pass;
    report_.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    report_.informational = is_informational(report_.check_id);
    return report_;
  }

 private:
  void fail(const std::string& label, const RFunc& r, const std::string& why) {
    if (failed_) return;
    failed_ = true;
    std::string text = to_string(r);
    if (text.size() > kWitnessChars) {
      text.resize(kWitnessChars);
      report_.witness_truncated = true;
    }
    report_.witness = label + ": " + (why.empty() ? text : why);
    // Find a rational point certifying the residual is nonzero.
    std::mt19937_64 rng(0xC0FFEE);
    std::uniform_int_distribution<int> num(-30, 30), den(1, 11);
    const auto free = r.free_symbols();
    for (int trial = 0; trial < 20; ++trial) {
      std::map<Symbol, Rat> pt;
      for (auto s : free) pt[s] = make_rat(num(rng), den(rng));
      try {
        if (r.evaluate(pt) != 0) {
          for (const auto& [s, v] : pt) report_.witness_point[s.name()] = hp3::to_string(v);
          break;
        }
      } catch (const ZeroDenominator&) {
      }
    }
  }

  CheckReport report_;
  bool failed_ = false;
  std::chrono::steady_clock::time_point start_;
};

const std::vector<Symbol>& xyz() {
  static const std::vector<Symbol> v{sym("x"), sym("y"), sym("z")};
  return v;
}

std::string params_string(const ParamMap& p) {
  return "(" + to_string(p.images.at(alpha0())) + ", " + to_string(p.images.at(alpha1())) + ")";
}

}  // namespace

std::string to_string(CheckStatus s) { return s == CheckStatus::pass ? "pass" : "fail"; }

CheckReport verify_hamiltonian_satisfies_eq1(const ModelSet& m) {
  Verdict v("hamiltonian_eq1");
  const ODESystem hs = m.hamiltonian_system();
  const RFunc u = m.hamiltonian();
  const RFunc u1 = hs.total_derivative(u);
  const RFunc u2 = hs.total_derivative(u1);
  const RFunc u3 = hs.total_derivative(u2);
  const Jet3 j;
  const Bindings jet{{j.u, u}, {j.u1, u1}, {j.u2, u2}, {j.u3, u3}};
  const RFunc t(sym("t")), p(sym("p")), q(sym("q")), a0(alpha0()), a1(alpha1());
  v.expect_zero("u3 - F(t,u,u1,u2)", substitute(m.eq1_residual(j), jet));
  v.expect_zero("p - (t*u1 + u)", p - (t * u1 + u));
  v.expect_zero("q*(a0 + (2*a1-1)*u + t*(2*a1+1)*u1 + t^2*u2) - 2*t^2*u1",
                q * (a0 + (2 * a1 - 1) * u + t * (2 * a1 + 1) * u1 + t.pow(2) * u2) - 2 * t.pow(2) * u1);
  v.note("jet sizes u1/u2/u3 = " + std::to_string(u1.size()) + "/" + std::to_string(u2.size()) + "/" +
         std::to_string(u3.size()) + " terms");
  return v.finish();
}

CheckReport verify_reduction(const ModelSet& m) {
  Verdict v("reduction");
  const ODESystem moved = pushforward(m.jet_system(), m.reduction_map());
  for (auto s : xyz()) v.expect_zero("d" + s.name() + "/dt", moved[s] - m.system6()[s]);
  return v.finish();
}

CheckReport verify_holomorphy(const ModelSet& m) {
  Verdict v("holomorphy");
  for (auto id : {ChartId::glue1, ChartId::glue2}) {
    const ChartMap& c = m.chart(id);
    const std::string name = to_string(id);
    v.expect_zero(name + ": jacobian_det - 1", jacobian_det(c) - RFunc(1));
    const ODESystem moved = pushforward(m.system6(), c);
    unsigned max_pow = 0;
    for (auto w : c.target_vars) {
      const RFunc& f = moved[w];
      v.expect_t_monomial_den(name + ": d" + w.name() + "/dt", f);
      max_pow = std::max(max_pow, t_pole_order(f));
    }
    v.note(name + " max t-power " + std::to_string(max_pow));
  }
  return v.finish();
}

CheckReport verify_backlund(const std::string& name, const ModelSet& m, bool symbolic) {
  const Backlund b = m.backlund(name);
  std::string id = "backlund_" + name;
  if (symbolic && b.validity) id = "backlund_" + name + "_symbolic";
  Verdict v(id);
  ODESystem source = m.system6();
  ChartMap c = b.chart;
  ODESystem target = source.substituted(b.pmap.images);
  if (b.validity && !symbolic) {
    source = source.substituted(*b.validity);
    c.forward = c.substituted(*b.validity).forward;
    target = target.substituted(*b.validity);
    v.note("under a1 = " + to_string(b.validity->at(alpha1())));
  }
  v.note("parameters -> " + params_string(b.pmap));
  // Inverse-free form of pushforward(source, c) == target.
  const auto res = transport_residual(source, c, target);
  for (auto w : xyz()) v.expect_zero("d" + w.name() + "/dt", res.at(w));
  return v.finish();
}

CheckReport verify_translation(const ModelSet& m) {
  Verdict v("translation");
  const ParamMap s0 = m.backlund("s0").pmap;
  const ParamMap s1 = m.backlund("s1").pmap;
  const ParamMap s0_then_s1 = s0.then(s1);
  const ParamMap s1_then_s0 = s1.then(s0);
  const RFunc target = RFunc(alpha0()) - RFunc(2);
  const bool a = s0_then_s1.images.at(alpha0()) == target;
  const bool b = s1_then_s0.images.at(alpha0()) == target;
  v.note("s0 then s1: " + params_string(s0_then_s1));
  v.note("s1 then s0: " + params_string(s1_then_s0));
  if (a) v.note("a0 -> a0 - 2 when s0 is applied first");
  if (b) v.note("a0 -> a0 - 2 when s1 is applied first");
  v.expect("translation", a || b, "no composition order translates a0 by -2");
  return v.finish();
}

CheckReport verify_blowup_sequence(const ModelSet& m) {
  Verdict v("blowup_sequence");
  const auto& steps = m.blowup_steps();
  if (steps.size() < 2) {
    v.expect("steps", false, "fewer than two charts in the sequence");
    return v.finish();
  }
  ChartMap acc = steps.front();
  for (std::size_t k = 1; k + 1 < steps.size(); ++k) acc = compose(acc, steps[k]);
  // acc now ends after the last blow-up step; the transported field there
  // must already be polynomial.
  if (acc.inverse) {
    const ODESystem moved = pushforward(m.system6(), acc);
    for (auto w : acc.target_vars)
      v.expect_t_monomial_den("after last step: d" + w.name() + "/dt", moved[w]);
  } else {
    v.expect("inverse", false, "composite has no inverse");
  }
  const ChartMap full = compose(acc, steps.back());
  const ChartMap& g2 = m.chart(ChartId::glue2);
  for (auto w : g2.target_vars) {
    auto it = full.forward.find(w);
    if (it == full.forward.end()) {
      v.expect(w.name(), false, "composite lacks coordinate");
      continue;
    }
    v.expect_zero(w.name() + " - glue2", it->second - g2[w]);
  }
  v.note(std::to_string(steps.size() - 2) + " blow-up steps between the U2 chart and the sign flip");
  return v.finish();
}

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids{
      "hamiltonian_eq1",   "reduction",          "holomorphy",          "backlund_s0",
      "backlund_s1",       "backlund_pi",        "translation",         "blowup_sequence",
      "backlund_s1_symbolic", "backlund_s1_printed", "backlund_pi_printed",
  };
  return ids;
}

bool is_informational(const std::string& id) {
  return id == "backlund_s1_symbolic" || id == "backlund_s1_printed" || id == "backlund_pi_printed";
}

CheckReport run_check(const std::string& id, const ModelSet& m) {
  if (id == "hamiltonian_eq1") return verify_hamiltonian_satisfies_eq1(m);
  if (id == "reduction") return verify_reduction(m);
  if (id == "holomorphy") return verify_holomorphy(m);
  if (id == "backlund_s0") return verify_backlund("s0", m);
  if (id == "backlund_s1") return verify_backlund("s1", m);
  if (id == "backlund_pi") return verify_backlund("pi", m);
  if (id == "backlund_s1_symbolic") return verify_backlund("s1", m, true);
  if (id == "backlund_s1_printed") return verify_backlund("s1_printed", m);
  if (id == "backlund_pi_printed") return verify_backlund("pi_printed", m);
  if (id == "translation") return verify_translation(m);
  if (id == "blowup_sequence") return verify_blowup_sequence(m);
  throw std::invalid_argument("unknown check id '" + id + "'");
}

std::vector<CheckReport> run_all(const ModelSet& m, bool parallel) {
  const auto& ids = check_ids();
  std::vector<CheckReport> out;
  out.reserve(ids.size());
  if (!parallel) {
    for (const auto& id : ids) out.push_back(run_check(id, m));
    return out;
  }
  std::vector<std::future<CheckReport>> jobs;
  for (const auto& id : ids) jobs.push_back(std::async(std::launch::async, [&m, id] { return run_check(id, m); }));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

bool suite_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const CheckReport& r) { return r.informational || r.passed(); });
}

void replace_token(std::string& text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::logic_error("mutation token '" + from + "' not found");
  if (text.find(from, pos + 1) != std::string::npos)
    throw std::logic_error("mutation token '" + from + "' is ambiguous");
  text.replace(pos, from.size(), to);
}

const std::vector<Mutation>& seeded_mutations() {
  static const std::vector<Mutation> list{
      {"hamiltonian_tp_sign", "hamiltonian_eq1",
       [](ModelSource& s) { replace_token(s.hamiltonian, "+ t*p", "- t*p"); }},
      {"system6_drop_2_over_t", "reduction", [](ModelSource& s) { replace_token(s.system6[2], " + 2/t", ""); }},
      {"glue2_constant_3", "holomorphy", [](ModelSource& s) { replace_token(s.glue2[1], "8*a1 + 3", "8*a1 + 2"); }},
      {"blowup_omit_step6", "blowup_sequence",
       [](ModelSource& s) { s.blowup_steps.at(6) = {"p5", "q5", "r5"}; }},
  };
  return list;
}

}  // namespace hp3
