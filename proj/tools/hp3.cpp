// Command-line front end: verification, singularity analysis, Laurent
// series, atlas integration, special solutions and model dumps.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "hp3/algebra/expr_io.hpp"
#include "hp3/numerics/integrate.hpp"
#include "hp3/singularity/analysis.hpp"
#include "hp3/singularity/laurent.hpp"
#include "hp3/special/series.hpp"
#include "hp3/verify/checks.hpp"

using namespace hp3;
using Json = nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0, exit_fail = 1, exit_usage = 2;

/// Input error detected after parsing; reported like a usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

/// "p/q", an integer or a finite decimal, converted exactly.
Rat parse_rat(const std::string& s) {
  try {
    const auto dot = s.find('.');
    if (dot == std::string::npos) {
      Rat r(s);
      r.canonicalize();
      return r;
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument(s);
    Rat r(digits);
    r /= pow(Rat(10), static_cast<unsigned>(s.size() - dot - 1));
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw UsageError("not a rational number: '" + s + "'");
  }
}

std::vector<std::string> strings(const std::vector<RFunc>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(to_string(e));
  return out;
}

std::vector<std::string> names(const std::vector<Symbol>& v) {
  std::vector<std::string> out;
  for (auto s : v) out.push_back(s.name());
  return out;
}

Json bindings_json(const Bindings& b, const std::vector<Symbol>& order) {
  Json j = Json::object();
  for (auto s : order) j[s.name()] = to_string(b.at(s));
  return j;
}

Json bindings_json(const Bindings& b) {
  Json j = Json::object();
  for (const auto& [s, e] : b) j[s.name()] = to_string(e);
  return j;
}

// ---------------------------------------------------------------------------
// verify

Json report_json(const CheckReport& r, bool timings) {
  Json j;
  j["check_id"] = r.check_id;
  j["status"] = to_string(r.status);
  j["informational"] = r.informational;
  j["witness"] = r.witness ? Json(*r.witness) : Json(nullptr);
  j["witness_truncated"] = r.witness_truncated;
  Json wp = Json::object();
  for (const auto& [k, v] : r.witness_point) wp[k] = v;
  j["witness_point"] = wp;
  j["detail"] = r.detail;
  if (timings) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

void print_report_text(const CheckReport& r, bool timings) {
  std::cout << (r.passed() ? "PASS " : "FAIL ") << r.check_id;
  if (r.informational) std::cout << " [informational]";
  if (timings) std::cout << " (" << num(r.elapsed_ms) << " ms)";
  std::cout << ": " << r.detail << '\n';
  if (r.witness) std::cout << "  witness: " << *r.witness << (r.witness_truncated ? " ..." : "") << '\n';
  if (!r.witness_point.empty()) {
    std::cout << "  at:";
    for (const auto& [k, v] : r.witness_point) std::cout << ' ' << k << '=' << v;
    std::cout << '\n';
  }
}

int cmd_verify(const std::vector<std::string>& only, bool json, bool timings, bool serial) {
  std::vector<CheckReport> reports;
  if (only.empty()) {
    reports = run_all(default_models(), !serial);
  } else {
    for (const auto& id : only) {
      const auto& ids = check_ids();
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw UsageError("unknown check id '" + id + "'");
      reports.push_back(run_check(id));
    }
  }
  if (json) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(report_json(r, timings));
    print_json(arr);
  } else {
    for (const auto& r : reports) print_report_text(r, timings);
    std::cout << (suite_passed(reports) ? "suite: pass" : "suite: FAIL") << '\n';
  }
  return suite_passed(reports) ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------------------
// singularities

Json index_json(const LocalIndex& ix) {
  Json j;
  j["factored"] = ix.factored;
  j["eigenvalues"] = strings(ix.eigenvalues);
  j["charpoly"] = strings(ix.charpoly);
  Json ratios = nullptr, integral = nullptr;
  try {
    const IndexRatios r = index_ratios(ix);
    ratios = strings(r.ratios);
    integral = r.integral;
  } catch (const std::domain_error&) {
  }
  j["ratios"] = ratios;
  j["integral"] = integral;
  return j;
}

int cmd_singularities(bool json) {
  const ModelSet& m = default_models();
  Json points = Json::array();
  bool all_accessible = true;
  for (const SingularPoint& p : {jet_point(m), c1_point(m), p2_point(m), p_point(m)}) {
    Json j;
    j["name"] = p.name;
    j["chart"] = p.locus.chart_id;
    j["state"] = names(p.system.state);
    j["divisor"] = p.divisor.name();
    j["point"] = bindings_json(p.point);
    bool acc = false;
    try {
      acc = check_accessible(p.system, p.locus);
    } catch (const NotLogarithmic&) {
    }
    all_accessible = all_accessible && acc;
    j["accessible"] = acc;
    j["local_index"] = index_json(local_index(p.system, p.divisor, p.point));
    points.push_back(j);
  }

  Json balances = Json::array();
  for (const auto& lo : painleve_leading_orders(m.system6(), 3)) {
    Json b;
    b["pole_orders"] = lo.exponents;
    b["exact"] = lo.exact;
    b["coefficients"] = lo.exact ? Json(strings(lo.coeffs)) : Json(lo.numeric);
    balances.push_back(b);
  }

  const SingularPoint P = p_point(m);
  const std::vector<Symbol> scaled{sym("X1"), sym("Y1"), sym("Z1")};
  const ODESystem red = alpha_test(P.system, P.point, sym("t0"), scaled);
  const Bindings candidate{{sym("X1"), parse("c2*(T - 2*c1)")},
                           {sym("Y1"), parse("c3*(T - 2*c1)^4")},
                           {sym("Z1"), parse("-1/2*(T - 2*c1)")}};
  bool solves = true;
  for (const auto& [v, r] : solution_residual(red, candidate)) solves = solves && r.is_zero();
  Json alpha;
  alpha["point"] = P.name;
  alpha["reduced_system"] = bindings_json(red.rhs, red.state);
  alpha["solution"] = bindings_json(candidate, scaled);
  alpha["solution_residual_zero"] = solves;

  if (json) {
    Json out;
    out["points"] = points;
    out["leading_orders"] = balances;
    out["alpha_test"] = alpha;
    print_json(out);
  } else {
    for (const auto& p : points) {
      std::cout << p["name"].get<std::string>() << " (chart " << p["chart"].get<std::string>() << ", divisor "
                << p["divisor"].get<std::string>() << "): accessible " << (p["accessible"].get<bool>() ? "yes" : "no")
                << '\n';
      const auto& ix = p["local_index"];
      if (ix["factored"].get<bool>()) {
        std::cout << "  local index: (";
        const auto ev = ix["eigenvalues"].get<std::vector<std::string>>();
        for (std::size_t i = 0; i < ev.size(); ++i) std::cout << (i ? ", " : "") << ev[i];
        std::cout << ")\n";
      } else {
        std::cout << "  characteristic polynomial (low to high):";
        for (const auto& c : ix["charpoly"]) std::cout << ' ' << c.get<std::string>();
        std::cout << '\n';
      }
      if (!ix["ratios"].is_null()) {
        std::cout << "  ratios: (";
        const auto r = ix["ratios"].get<std::vector<std::string>>();
        for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? ", " : "") << r[i];
        std::cout << ")" << (ix["integral"].get<bool>() ? " integral" : " not integral") << '\n';
      }
    }
    for (const auto& b : balances) {
      std::cout << "leading orders " << b["pole_orders"].dump() << " coefficients " << b["coefficients"].dump()
                << '\n';
    }
    std::cout << "alpha-test at " << P.name << ":\n";
    for (auto s : red.state) std::cout << "  d" << s.name() << "/dT = " << to_string(red[s]) << '\n';
    std::cout << "  rational solution (c2 (T-2c1), c3 (T-2c1)^4, -1/2 (T-2c1)): "
              << (solves ? "exact residual zero" : "RESIDUAL NONZERO") << '\n';
  }
  return all_accessible && solves ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------------------
// laurent

int cmd_laurent(const std::string& t0s, int depth, bool json) {
  if (depth < 1) throw UsageError("--depth must be at least 1");
  const Rat t0 = parse_rat(t0s);
  if (sgn(t0) <= 0) throw UsageError("--t0 must be positive");
  const ODESystem& s = default_models().system6();
  const auto balances = painleve_leading_orders(s, 3);
  if (balances.empty()) throw std::runtime_error("no dominant balance");
  const auto sol = laurent_solve(s, balances.front(), t0, depth);
  const auto orders = laurent_residual_orders(s, sol);

  Json j;
  j["t0"] = to_string(t0);
  j["depth"] = depth;
  j["vars"] = names(sol.vars);
  j["pole_orders"] = sol.pole_order;
  j["free_parameter_positions"] = std::vector<int>(sol.free_parameter_positions.begin(), sol.free_parameter_positions.end());
  j["free_parameters"] = names(sol.free_parameters);
  Json coeffs = Json::object(), residues = Json::object(), resid = Json::object();
  for (std::size_t i = 0; i < sol.vars.size(); ++i) {
    coeffs[sol.vars[i].name()] = strings(sol.coeffs[i]);
    residues[sol.vars[i].name()] = to_string(sol.residue(sol.vars[i]));
    resid[sol.vars[i].name()] = orders[i] == std::numeric_limits<int>::max() ? Json(nullptr) : Json(orders[i]);
  }
  j["coefficients"] = coeffs;
  j["residues"] = residues;
  j["residual_orders"] = resid;
  if (json) {
    print_json(j);
  } else {
    std::cout << "Laurent solution at t0 = " << to_string(t0) << ", depth " << depth << '\n';
    std::cout << "free parameters at orders:";
    for (int k : sol.free_parameter_positions) std::cout << ' ' << k;
    std::cout << '\n';
    for (std::size_t i = 0; i < sol.vars.size(); ++i) {
      const auto v = sol.vars[i];
      std::cout << v.name() << " = sum_k c_k (t - t0)^(k - " << sol.pole_order[i] << "), residue "
                << to_string(sol.residue(v)) << ", residual "
                << (orders[i] == std::numeric_limits<int>::max() ? std::string("identically zero")
                                                                 : "of order " + std::to_string(orders[i]))
                << '\n';
      for (std::size_t k = 0; k < sol.coeffs[i].size(); ++k)
        std::cout << "  c_" << k << " = " << to_string(sol.coeffs[i][k]) << '\n';
    }
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// integrate

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct IntegrateArgs {
  double alpha0 = 0, alpha1 = 1.5, t0 = 1, t1 = 6, rtol = 1e-10, atol = 1e-12, z_switch = 10;
  std::string init = "0.1,0.1,0.1";
  std::string out;
  bool json = false;
};

std::array<double, 3> parse_triple(const std::string& s) {
  std::array<double, 3> v{};
  std::stringstream ss(s);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i == 3) throw UsageError("--init takes exactly three comma-separated numbers");
    try {
      std::size_t used = 0;
      v[i] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--init: not a number: '" + item + "'");
    }
    ++i;
  }
  if (i != 3) throw UsageError("--init takes exactly three comma-separated numbers");
  return v;
}

std::string sidecar_path(const std::string& out) { return out + ".events.json"; }

int cmd_integrate(const IntegrateArgs& a) {
  NumState init;
  init.coords = parse_triple(a.init);
  init.t = a.t0;
  init.alpha0 = a.alpha0;
  init.alpha1 = a.alpha1;
  Trajectory tr;
  try {
    tr = integrate_atlas(init, a.t1, a.rtol, a.atol, a.z_switch);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Atlas atlas(a.alpha0, a.alpha1);

  std::ofstream csv(a.out);
  if (!csv) throw UsageError("cannot write '" + a.out + "'");
  csv << "t,chart,x,y,z,chart_coords\n";
  for (const auto& s : tr.samples) {
    csv << num(s.t) << ',' << to_string(s.chart) << ',';
    const Eigen::Vector3d c(s.coords[0], s.coords[1], s.coords[2]);
    const auto b = atlas.to_base(s.chart, s.t, c);
    if (b) csv << num((*b)[0]) << ',' << num((*b)[1]) << ',' << num((*b)[2]) << ',';
    else csv << ",,,";
    if (s.chart != AtlasChart::base)
      csv << csv_quote("[" + num(s.coords[0]) + "," + num(s.coords[1]) + "," + num(s.coords[2]) + "]");
    csv << '\n';
  }

  Json events = Json::array();
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    const auto& e = tr.events[i];
    Json j;
    j["t"] = e.t;
    j["kind"] = to_string(e.kind);
    j["sample_index"] = e.sample_index;
    j["detail"] = e.detail;
    if (e.kind == EventKind::chart_switch) {
      j["from"] = to_string(e.from);
      j["to"] = to_string(e.to);
      j["from_coords"] = e.from_coords;
      j["to_coords"] = e.to_coords;
    }
    if (e.kind == EventKind::pole_crossing) {
      j["chart"] = to_string(e.from);
      try {
        const PoleFit f = fit_pole(tr, i, a.z_switch);
        j["fit"] = Json{{"t0", f.t0}, {"residue", f.residue}, {"offset", f.offset}, {"samples", f.samples}};
      } catch (const std::domain_error& err) {
        j["fit"] = nullptr;
        j["fit_error"] = err.what();
      }
    }
    events.push_back(j);
  }
  const bool failed = std::any_of(tr.events.begin(), tr.events.end(),
                                  [](const TrajectoryEvent& e) { return e.kind == EventKind::step_failure; });
  Json side;
  side["alpha0"] = a.alpha0;
  side["alpha1"] = a.alpha1;
  side["init"] = init.coords;
  side["t0"] = a.t0;
  side["t1"] = a.t1;
  side["rtol"] = a.rtol;
  side["atol"] = a.atol;
  side["z_switch"] = a.z_switch;
  side["samples"] = tr.samples.size();
  side["t_reached"] = tr.samples.back().t;
  side["completed"] = !failed;
  side["chart_switch_consistency"] = chart_switch_consistency(tr);
  side["residual"] = tr.samples.size() >= 3 ? Json(residual(tr)) : Json(nullptr);
  side["events"] = events;
  std::ofstream ev(sidecar_path(a.out));
  if (!ev) throw UsageError("cannot write '" + sidecar_path(a.out) + "'");
  ev << side.dump(2) << '\n';

  if (a.json) {
    print_json(side);
  } else {
    std::cout << "samples: " << tr.samples.size() << ", reached t = " << num(tr.samples.back().t) << '\n';
    for (const auto& e : tr.events) std::cout << "  " << to_string(e.kind) << " at t = " << num(e.t) << ": " << e.detail << '\n';
    std::cout << "wrote " << a.out << " and " << sidecar_path(a.out) << '\n';
  }
  return failed ? exit_fail : exit_ok;
}

// ---------------------------------------------------------------------------
// special

struct SpecialArgs {
  std::string a = "2";
  int terms = 0;
  std::optional<double> eval;
  std::optional<int> hierarchy_depth;
  bool json = false;
};

int cmd_special(const SpecialArgs& args) {
  const Rat a = parse_rat(args.a);
  if (a.get_den() == 1 && sgn(a) <= 0) throw UsageError("--a must not be 0, -1, -2, ...");
  if (args.terms < 0) throw UsageError("--terms must be positive");
  Json j;
  j["a"] = to_string(a);

  int terms = args.terms;
  if (terms == 0) terms = args.eval ? terms_for(a, *args.eval) + 1 : 10;
  const PowerSeries F = F_series(a, std::max(terms - 1, 1)).truncated(terms - 1);
  j["terms"] = terms;
  std::vector<std::string> coeffs;
  for (const auto& c : F.coefficients()) coeffs.push_back(to_string(c));
  j["coefficients"] = coeffs;
  if (args.eval) {
    const double t = *args.eval;
    const double Z = F.evaluate(t), dZ = terms > 1 ? F.derivative().evaluate(t) : 0.0;
    Json e;
    e["t"] = t;
    e["Z"] = Z;
    e["dZ"] = dZ;
    e["z"] = Z != 0 ? Json(2 * dZ / Z) : Json(nullptr);
    j["eval"] = e;
  }

  const CheckReport zode = verify_Z_ode(40), ric = verify_riccati_symbolic(40);
  j["checks"] = Json::array({report_json(zode, false), report_json(ric, false)});
  bool ok = zode.passed() && ric.passed();
  if (args.hierarchy_depth) {
    if (*args.hierarchy_depth < 0) throw UsageError("--hierarchy must be nonnegative");
    Json h = Json::array();
    for (const auto& s : hierarchy(*args.hierarchy_depth)) {
      Json step;
      step["level"] = s.level;
      step["alpha0"] = s.alpha0;
      step["alpha1"] = s.alpha1;
      step["maps"] = s.maps;
      step["certified"] = s.certified;
      step["residual"] = s.residual;
      step["description"] = s.description;
      if (s.level <= 1) ok = ok && s.certified;
      h.push_back(step);
    }
    j["hierarchy"] = h;
  }

  if (args.json) {
    print_json(j);
  } else {
    std::cout << "F(" << to_string(a) << "; t), " << terms << " terms:";
    for (const auto& c : coeffs) std::cout << ' ' << c;
    std::cout << '\n';
    if (args.eval) {
      const auto& e = j["eval"];
      std::cout << "Z(" << num(*args.eval) << ") = " << num(e["Z"].get<double>()) << '\n';
      std::cout << "Z'(" << num(*args.eval) << ") = " << num(e["dZ"].get<double>()) << '\n';
      if (!e["z"].is_null()) std::cout << "2 Z'/Z = " << num(e["z"].get<double>()) << '\n';
    }
    print_report_text(zode, false);
    print_report_text(ric, false);
    if (j.contains("hierarchy")) {
      for (const auto& s : j["hierarchy"])
        std::cout << "level " << s["level"].get<int>() << " (a0 = " << num(s["alpha0"].get<double>())
                  << ", a1 = " << num(s["alpha1"].get<double>()) << "): "
                  << (s["certified"].get<bool>() ? "certified, residual " + num(s["residual"].get<double>())
                                                  : std::string("not certified"))
                  << " - " << s["description"].get<std::string>() << '\n';
    }
  }
  return ok ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------------------
// dump

Json chart_json(const ChartMap& c) {
  Json j;
  j["id"] = c.id;
  j["source"] = names(c.source_vars);
  j["target"] = names(c.target_vars);
  j["forward"] = bindings_json(c.forward, c.target_vars);
  j["inverse"] = c.inverse ? bindings_json(*c.inverse, c.source_vars) : Json(nullptr);
  return j;
}

void print_chart_text(const ChartMap& c) {
  std::cout << c.id << ": (" ;
  for (std::size_t i = 0; i < c.source_vars.size(); ++i) std::cout << (i ? ", " : "") << c.source_vars[i].name();
  std::cout << ") -> (";
  for (std::size_t i = 0; i < c.target_vars.size(); ++i) std::cout << (i ? ", " : "") << c.target_vars[i].name();
  std::cout << ")\n";
  for (auto w : c.target_vars) std::cout << "  " << w.name() << " = " << to_string(c.forward.at(w)) << '\n';
  if (c.inverse)
    for (auto s : c.source_vars) std::cout << "  inverse " << s.name() << " = " << to_string(c.inverse->at(s)) << '\n';
  else
    std::cout << "  (no inverse)\n";
}

int cmd_dump(const std::string& what, bool json) {
  const ModelSet& m = default_models();
  if (what == "system6") {
    const ODESystem& s = m.system6();
    if (json) {
      Json j;
      j["state"] = names(s.state);
      j["indep"] = s.indep.name();
      j["params"] = names(std::vector<Symbol>(s.params.begin(), s.params.end()));
      j["rhs"] = bindings_json(s.rhs, s.state);
      j["hamiltonian"] = to_string(m.hamiltonian());
      print_json(j);
    } else {
      for (auto v : s.state) std::cout << "d" << v.name() << "/dt = " << to_string(s[v]) << '\n';
      std::cout << "H = " << to_string(m.hamiltonian()) << '\n';
    }
    return exit_ok;
  }
  if (what == "charts") {
    std::vector<ChartMap> charts{m.reduction_map()};
    for (ChartId id : {ChartId::p3_u1, ChartId::p3_u2, ChartId::p3_u3, ChartId::scaled, ChartId::glue1, ChartId::glue2})
      charts.push_back(m.chart(id));
    for (const auto& c : m.blowup_steps()) charts.push_back(c);
    if (json) {
      Json arr = Json::array();
      for (const auto& c : charts) arr.push_back(chart_json(c));
      print_json(arr);
    } else {
      for (const auto& c : charts) print_chart_text(c);
    }
    return exit_ok;
  }
  if (what == "backlund") {
    Json arr = Json::array();
    for (const std::string name : {"s0", "s1", "pi", "s1_printed", "pi_printed"}) {
      const Backlund b = m.backlund(name);
      if (json) {
        Json j = chart_json(b.chart);
        j["name"] = name;
        j["parameter_map"] = bindings_json(b.pmap.images, {alpha0(), alpha1()});
        j["validity"] = b.validity ? bindings_json(*b.validity) : Json(nullptr);
        arr.push_back(j);
      } else {
        std::cout << name << ": (a0, a1) -> (" << to_string(b.pmap.images.at(alpha0())) << ", "
                  << to_string(b.pmap.images.at(alpha1())) << ")";
        if (b.validity)
          for (const auto& [p, v] : *b.validity) std::cout << ", valid for " << p.name() << " = " << to_string(v);
        std::cout << '\n';
        print_chart_text(b.chart);
      }
    }
    if (json) print_json(arr);
    return exit_ok;
  }
  throw UsageError("dump takes one of: system6, charts, backlund");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification and numerics for a third-order Painleve-type system"};
  app.require_subcommand(1);

  bool json = false, timings = false, serial = false;
  std::vector<std::string> only;
  auto* verify = app.add_subcommand("verify", "run the symbolic checks");
  verify->add_option("--only", only, "run only these check ids")->expected(1, -1);
  verify->add_flag("--json", json, "JSON output");
  verify->add_flag("--timings", timings, "include wall-clock times (output no longer byte-stable)");
  verify->add_flag("--serial", serial, "run checks one after another");

  auto* sing = app.add_subcommand("singularities", "accessible points, local indices, leading orders, alpha-test");
  sing->add_flag("--json", json, "JSON output");

  std::string t0s;
  int depth = 10;
  auto* laurent = app.add_subcommand("laurent", "exact formal Laurent solution at a movable pole");
  laurent->add_option("--t0", t0s, "pole location (rational, e.g. 2 or 5/2)")->required();
  laurent->add_option("--depth", depth, "number of coefficients beyond the leading one")->required();
  laurent->add_flag("--json", json, "JSON output");

  IntegrateArgs ia;
  auto* integ = app.add_subcommand("integrate", "atlas integration through movable poles");
  integ->add_option("--alpha0", ia.alpha0, "parameter a0")->capture_default_str();
  integ->add_option("--alpha1", ia.alpha1, "parameter a1")->capture_default_str();
  integ->add_option("--init", ia.init, "initial x,y,z")->capture_default_str();
  integ->add_option("--t0", ia.t0, "initial time")->capture_default_str();
  integ->add_option("--t1", ia.t1, "final time")->capture_default_str();
  integ->add_option("--rtol", ia.rtol, "relative tolerance")->capture_default_str();
  integ->add_option("--atol", ia.atol, "absolute tolerance")->capture_default_str();
  integ->add_option("--z-switch", ia.z_switch, "|z| threshold for the pole chart")->capture_default_str();
  integ->add_option("--out", ia.out, "CSV output path (events go to PATH.events.json)")->required();
  integ->add_flag("--json", ia.json, "print the events summary as JSON");

  SpecialArgs sa;
  auto* special = app.add_subcommand("special", "series special solution F(a; t) and the hierarchy");
  special->add_option("--a", sa.a, "series parameter (rational)")->capture_default_str();
  special->add_option("--terms", sa.terms, "number of series terms (default: 10, or adaptive with --eval)");
  special->add_option("--eval", sa.eval, "evaluate Z, Z' and 2Z'/Z at t");
  special->add_option("--hierarchy", sa.hierarchy_depth, "certify Backlund images up to this level");
  special->add_flag("--json", sa.json, "JSON output");

  std::string what;
  auto* dump = app.add_subcommand("dump", "print the model formulas");
  dump->add_option("what", what, "system6 | charts | backlund")->required()->check(
      CLI::IsMember({"system6", "charts", "backlund"}));
  dump->add_flag("--json", json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  try {
    if (*verify) return cmd_verify(only, json, timings, serial);
    if (*sing) return cmd_singularities(json);
    if (*laurent) return cmd_laurent(t0s, depth, json);
    if (*integ) return cmd_integrate(ia);
    if (*special) return cmd_special(sa);
    if (*dump) return cmd_dump(what, json);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_fail;
  }
  return exit_usage;
}
