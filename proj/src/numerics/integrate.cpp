#include "hp3/numerics/integrate.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hp3/singularity/laurent.hpp"

namespace hp3 {

namespace {

std::map<Symbol, double> param_values(double a0, double a1) { return {{alpha0(), a0}, {alpha1(), a1}}; }

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd to_vec(const std::array<double, 3>& a) { return Eigen::Vector3d(a[0], a[1], a[2]); }

std::array<double, 3> to_array(const Eigen::VectorXd& v) { return {v[0], v[1], v[2]}; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Compiled fields and maps

NumericField::NumericField(const ODESystem& s, const std::map<Symbol, double>& params) : n_(s.state.size()) {
  std::vector<Symbol> layout = s.state;
  layout.push_back(s.indep);
  for (Symbol p : s.params)
    if (!params.contains(p)) throw std::invalid_argument("no value for parameter '" + p.name() + "'");
  for (const auto& [p, v] : params) {
    layout.push_back(p);
    fixed_.push_back(v);
  }
  rhs_.reserve(n_);
  for (Symbol v : s.state) rhs_.emplace_back(s[v], layout);
}

bool NumericField::operator()(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
  std::vector<double> values(n_ + 1 + fixed_.size());
  for (std::size_t i = 0; i < n_; ++i) values[i] = y[static_cast<Eigen::Index>(i)];
  values[n_] = t;
  std::copy(fixed_.begin(), fixed_.end(), values.begin() + static_cast<std::ptrdiff_t>(n_ + 1));
  dy.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    bool ok = true;
    dy[static_cast<Eigen::Index>(i)] = rhs_[i].eval(values, ok);
    if (!ok) return false;
  }
  return all_finite(dy);
}

RhsFn NumericField::fn() const {
  return [this](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { return (*this)(t, y, dy); };
}

NumericMap::NumericMap(const ChartMap& c, const std::map<Symbol, double>& params, bool use_inverse) {
  const auto& in = use_inverse ? c.target_vars : c.source_vars;
  const auto& out = use_inverse ? c.source_vars : c.target_vars;
  if (use_inverse && !c.inverse) throw std::invalid_argument("chart '" + c.id + "' has no inverse");
  const Bindings& b = use_inverse ? *c.inverse : c.forward;
  n_ = in.size();
  std::vector<Symbol> layout = in;
  layout.push_back(sym("t"));
  for (const auto& [p, v] : params) {
    layout.push_back(p);
    fixed_.push_back(v);
  }
  for (Symbol w : out) comp_.emplace_back(b.at(w), layout);
}

std::optional<Eigen::VectorXd> NumericMap::operator()(double t, const Eigen::VectorXd& v) const {
  std::vector<double> values(n_ + 1 + fixed_.size());
  for (std::size_t i = 0; i < n_; ++i) values[i] = v[static_cast<Eigen::Index>(i)];
  values[n_] = t;
  std::copy(fixed_.begin(), fixed_.end(), values.begin() + static_cast<std::ptrdiff_t>(n_ + 1));
  Eigen::VectorXd r(static_cast<Eigen::Index>(comp_.size()));
  for (std::size_t i = 0; i < comp_.size(); ++i) {
    bool ok = true;
    r[static_cast<Eigen::Index>(i)] = comp_[i].eval(values, ok);
    if (!ok) return std::nullopt;
  }
  if (!all_finite(r)) return std::nullopt;
  return r;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// Max-norm of v / (atol + rtol * max(|y0|, |y1|)).
double scaled_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                   const StepOptions& o) {
  double m = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    m = std::max(m, std::abs(v[i]) / sc);
  }
  return m;
}

double initial_step(const RhsFn& f, double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double dir,
                    const StepOptions& o) {
  const double d0 = scaled_norm(y0, y0, y0, o), d1 = scaled_norm(f0, y0, y0, o);
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  if (o.h_max > 0) h = std::min(h, o.h_max);
  Eigen::VectorXd y1 = y0 + dir * h * f0, f1;
  if (!f(t0 + dir * h, y1, f1)) return h * 1e-3;
  const double d2 = scaled_norm(f1 - f0, y0, y0, o) / h;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dm, 1.0 / 5);
  h = std::min(100 * h, h1);
  if (o.h_max > 0) h = std::min(h, o.h_max);
  return h;
}

}  // namespace

RawTrajectory dopri5(const RhsFn& f, double t0, const Eigen::VectorXd& y0, double t_end, const StepOptions& opt,
                     const std::function<bool(double, const Eigen::VectorXd&)>& stop) {
  RawTrajectory out;
  out.t.push_back(t0);
  out.y.push_back(y0);
  if (t_end == t0) return out;
  const double dir = t_end > t0 ? 1.0 : -1.0;

  Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, y = y0, ynew, ytmp;
  if (!f(t0, y, k1)) {
    out.failed = true;
    out.failure = "right-hand side not evaluable at the initial point";
    return out;
  }
  double h = opt.h0 > 0 ? opt.h0 : initial_step(f, t0, y, k1, dir, opt);
  if (opt.h_max > 0) h = std::min(h, opt.h_max);

  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75, facc1 = 1 / 0.2, facc2 = 1 / 10.0;
  double facold = 1e-4;
  bool last_rejected = false;
  double t = t0;
  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    if (dir * (t + dir * h - t_end) > 0) h = std::abs(t_end - t);
    if (h < opt.h_min_rel * std::max(1.0, std::abs(t))) {
      out.failed = true;
      out.failure = "step size underflow at t = " + fmt(t);
      return out;
    }
    const double hs = dir * h;
    bool ok = f(t + c2 * hs, y + hs * a21 * k1, k2);
    ok = ok && f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2), k3);
    ok = ok && f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3), k4);
    ok = ok && f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
    if (ok) {
      ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      ok = f(t + hs, ytmp, k6);
    }
    if (ok) {
      ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      ok = all_finite(ynew) && f(t + hs, ynew, k7);
    }
    if (!ok) {
      ++out.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }
    const Eigen::VectorXd errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = scaled_norm(errv, y, ynew, opt);
    const double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      facold = std::max(err, 1e-4);
      t = (std::abs(t_end - (t + hs)) <= 1e-15 * std::max(1.0, std::abs(t_end))) ? t_end : t + hs;
      y = ynew;
      k1 = k7;
      out.t.push_back(t);
      out.y.push_back(y);
      out.last_h = h;
      if (t == t_end) return out;
      if (stop && stop(t, y)) return out;
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      if (opt.h_max > 0) hnew = std::min(hnew, opt.h_max);
      h = hnew;
      last_rejected = false;
    } else {
      ++out.rejected;
      h /= std::min(facc1, fac11 / safe);
      last_rejected = true;
    }
  }
  out.failed = true;
  out.failure = "step limit reached at t = " + fmt(t);
  return out;
}

std::vector<Eigen::VectorXd> integrate_to_times(const RhsFn& f, double t0, const Eigen::VectorXd& y0,
                                                const std::vector<double>& times, const StepOptions& opt) {
  std::vector<Eigen::VectorXd> out;
  double t = t0;
  Eigen::VectorXd y = y0;
  StepOptions o = opt;
  for (double target : times) {
    if (target != t) {
      const RawTrajectory r = dopri5(f, t, y, target, o);
      if (r.failed) throw std::runtime_error(r.failure);
      t = target;
      y = r.y.back();
      if (r.last_h > 0) o.h0 = r.last_h;
    }
    out.push_back(y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Atlas

std::string to_string(AtlasChart c) {
  switch (c) {
    case AtlasChart::base: return "base";
    case AtlasChart::glue1: return "glue1";
    case AtlasChart::glue2: return "glue2";
  }
  return "?";
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::chart_switch: return "chart_switch";
    case EventKind::pole_crossing: return "pole_crossing";
    case EventKind::step_failure: return "step_failure";
  }
  return "?";
}

Atlas::Atlas(double a0, double a1, const ModelSet& m) : a0_(a0), a1_(a1) {
  const auto params = param_values(a0, a1);
  fields_[0] = NumericField(m.system6(), params);
  const ChartId ids[2] = {ChartId::glue1, ChartId::glue2};
  for (int i = 0; i < 2; ++i) {
    const ChartMap& c = m.chart(ids[i]);
    fields_[i + 1] = NumericField(pushforward(m.system6(), c), params);
    fwd_[i + 1] = NumericMap(c, params);
    inv_[i + 1] = NumericMap(c, params, true);
  }
}

std::optional<Eigen::VectorXd> Atlas::from_base(AtlasChart c, double t, const Eigen::VectorXd& v) const {
  if (c == AtlasChart::base) return v;
  return fwd_[static_cast<int>(c)](t, v);
}

std::optional<Eigen::VectorXd> Atlas::to_base(AtlasChart c, double t, const Eigen::VectorXd& v) const {
  if (c == AtlasChart::base) return v;
  return inv_[static_cast<int>(c)](t, v);
}

double Atlas::base_z(AtlasChart c, const Eigen::VectorXd& v) {
  return c == AtlasChart::base ? v[2] : 1.0 / v[2];
}

namespace {

void check_pre(const NumState& init, double t_end, double rtol, double atol) {
  if (!(init.t > 0) || !(t_end > 0)) throw std::invalid_argument("integration needs t > 0");
  if (!(rtol >= 1e-14 && rtol <= 1e-3) || !(atol >= 1e-14 && atol <= 1e-3))
    throw std::invalid_argument("rtol and atol must lie in [1e-14, 1e-3]");
  for (double c : init.coords)
    if (!std::isfinite(c)) throw std::invalid_argument("initial coordinates must be finite");
}

NumState make_state(AtlasChart c, double t, const Eigen::VectorXd& y, const NumState& proto) {
  NumState s = proto;
  s.chart = c;
  s.t = t;
  s.coords = to_array(y);
  return s;
}

}  // namespace

Trajectory integrate(const NumState& init, double t_end, double rtol, double atol, const ModelSet& m) {
  check_pre(init, t_end, rtol, atol);
  if (init.chart != AtlasChart::base) throw std::invalid_argument("plain integration runs in the base chart");
  const NumericField field(m.system6(), param_values(init.alpha0, init.alpha1));
  StepOptions opt;
  opt.rtol = rtol;
  opt.atol = atol;
  const RawTrajectory raw = dopri5(field.fn(), init.t, to_vec(init.coords), t_end, opt);
  Trajectory traj;
  for (std::size_t i = 0; i < raw.t.size(); ++i) traj.samples.push_back(make_state(AtlasChart::base, raw.t[i], raw.y[i], init));
  if (raw.failed)
    traj.events.push_back({raw.t.back(), EventKind::step_failure, raw.t.size() - 1, raw.failure, {}, {}, {}, {}});
  return traj;
}

Trajectory integrate_atlas(const NumState& init, double t_end, double rtol, double atol, double z_switch,
                           double h_max, const ModelSet& m) {
  check_pre(init, t_end, rtol, atol);
  if (!(z_switch > 1)) throw std::invalid_argument("z_switch must exceed 1");
  const Atlas atlas(init.alpha0, init.alpha1, m);
  StepOptions opt;
  opt.rtol = rtol;
  opt.atol = atol;
  opt.h_max = h_max;

  Trajectory traj;
  traj.samples.push_back(init);
  AtlasChart chart = init.chart;
  double t = init.t;
  Eigen::VectorXd y = to_vec(init.coords);
  const double back_threshold = 2.0 / z_switch;  // |1/z| at which glue charts hand back

  auto fail = [&](const std::string& why) {
    traj.events.push_back({t, EventKind::step_failure, traj.samples.size() - 1, why, chart, chart, {}, {}});
  };

  // One segment in `c` from (t, y); appends samples and pole events. Returns
  // the raw result so a failed glue2 attempt can be rolled back.
  auto run_segment = [&](AtlasChart c, const Eigen::VectorXd& ystart) {
    std::function<bool(double, const Eigen::VectorXd&)> stop;
    if (c == AtlasChart::base)
      stop = [&](double, const Eigen::VectorXd& v) { return std::abs(v[2]) > z_switch; };
    else
      stop = [&](double, const Eigen::VectorXd& v) { return std::abs(v[2]) >= back_threshold; };
    const RawTrajectory raw = dopri5(atlas.field(c).fn(), t, ystart, t_end, opt, stop);
    for (std::size_t i = 1; i < raw.t.size(); ++i) {
      const double zp = raw.y[i - 1][2], zc = raw.y[i][2];
      traj.samples.push_back(make_state(c, raw.t[i], raw.y[i], init));
      if (c != AtlasChart::base && ((zp < 0 && zc >= 0) || (zp > 0 && zc <= 0))) {
        const double tp = raw.t[i - 1], tc = raw.t[i];
        const double tc0 = zc == zp ? tc : tp + (tc - tp) * zp / (zp - zc);
        traj.events.push_back({tc0, EventKind::pole_crossing, traj.samples.size() - 1,
                               "pole of z at t = " + fmt(tc0) + " (in chart " + to_string(c) + ")", c, c, {}, {}});
      }
    }
    return raw;
  };

  while (t != t_end) {
    const std::size_t n_samples = traj.samples.size(), n_events = traj.events.size();
    const StepOptions saved = opt;
    RawTrajectory raw = run_segment(chart, y);
    if (raw.failed && chart == AtlasChart::glue2 && !traj.events.empty() &&
        traj.events.back().kind == EventKind::chart_switch && n_events == traj.events.size()) {
      // glue2 does not resolve this branch: roll back and retry in glue1.
      auto& sw = traj.events.back();
      if (sw.from == AtlasChart::base) {
        const Eigen::VectorXd base_y = to_vec(sw.from_coords);
        if (auto alt = atlas.from_base(AtlasChart::glue1, t, base_y)) {
          traj.samples.resize(n_samples);
          traj.events.resize(n_events);
          opt = saved;
          sw.to = AtlasChart::glue1;
          sw.to_coords = to_array(*alt);
          sw.detail = "base -> glue1 (glue2 failed: " + raw.failure + ")";
          chart = AtlasChart::glue1;
          y = *alt;
          raw = run_segment(chart, y);
        }
      }
    }
    t = raw.t.back();
    y = raw.y.back();
    if (raw.last_h > 0) opt.h0 = raw.last_h;
    if (raw.failed) {
      fail(raw.failure + " in chart " + to_string(chart));
      break;
    }
    if (t == t_end) break;

    // switch charts at the last sample
    TrajectoryEvent ev;
    ev.t = t;
    ev.kind = EventKind::chart_switch;
    ev.sample_index = traj.samples.size() - 1;
    ev.from = chart;
    ev.from_coords = to_array(y);
    std::optional<Eigen::VectorXd> next;
    AtlasChart next_chart = AtlasChart::base;
    if (chart == AtlasChart::base) {
      for (AtlasChart c : {AtlasChart::glue2, AtlasChart::glue1}) {
        next = atlas.from_base(c, t, y);
        if (next) {
          next_chart = c;
          break;
        }
      }
    } else {
      next = atlas.to_base(chart, t, y);
    }
    if (!next) {
      fail("state outside every chart at t = " + fmt(t));
      break;
    }
    ev.to = next_chart;
    ev.to_coords = to_array(*next);
    ev.detail = to_string(chart) + " -> " + to_string(next_chart);
    traj.events.push_back(ev);
    chart = next_chart;
    y = *next;
  }
  return traj;
}

double chart_switch_consistency(const Trajectory& traj, const ModelSet& m) {
  if (traj.samples.empty()) return 0;
  const bool any = std::any_of(traj.events.begin(), traj.events.end(),
                               [](const TrajectoryEvent& e) { return e.kind == EventKind::chart_switch; });
  if (!any) return 0;
  const Atlas atlas(traj.samples.front().alpha0, traj.samples.front().alpha1, m);
  double worst = 0;
  auto rel = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
  };
  for (const auto& e : traj.events) {
    if (e.kind != EventKind::chart_switch) continue;
    const Eigen::VectorXd from = to_vec(e.from_coords), to = to_vec(e.to_coords);
    // forward through the transition, and back again
    std::optional<Eigen::VectorXd> fwd, back;
    if (e.from == AtlasChart::base) {
      fwd = atlas.from_base(e.to, e.t, from);
      back = atlas.to_base(e.to, e.t, to);
    } else {
      fwd = atlas.to_base(e.from, e.t, from);
      back = atlas.from_base(e.from, e.t, to);
    }
    if (!fwd || !back) return std::numeric_limits<double>::infinity();
    worst = std::max({worst, rel(*fwd, to), rel(*back, from)});
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Finite-difference residual

std::vector<double> fd_weights(double x0, const std::vector<double>& x) {
  // Fornberg (1988), first derivative only.
  const std::size_t n = x.size();
  std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
  double c1 = 1, c4 = x[0] - x0;
  c[0][0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

namespace {

// Residual over samples [lo, hi] of one chart.
double segment_residual(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& y, const RhsFn& f) {
  const std::size_t n = t.size();
  if (n < 3) return 0;
  const std::size_t s = std::min<std::size_t>(7, n);
  double worst = 0;
  Eigen::VectorXd rhs;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start = i >= s / 2 ? i - s / 2 : 0;
    start = std::min(start, n - s);
    std::vector<double> nodes(t.begin() + static_cast<std::ptrdiff_t>(start),
                              t.begin() + static_cast<std::ptrdiff_t>(start + s));
    const auto w = fd_weights(t[i], nodes);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(y[i].size());
    // differences against the centre sample: exact zero for constants
    for (std::size_t j = 0; j < s; ++j) d += w[j] * (y[start + j] - y[i]);
    if (!f(t[i], y[i], rhs)) return std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d.size(); ++k)
      worst = std::max(worst, std::abs(d[k] - rhs[k]) / (std::abs(rhs[k]) + 1));
  }
  return worst;
}

}  // namespace

double residual(const RawTrajectory& traj, const RhsFn& f) {
  if (traj.t.size() < 3) throw std::invalid_argument("residual needs at least 3 samples");
  return segment_residual(traj.t, traj.y, f);
}

double residual(const Trajectory& traj, const ModelSet& m) {
  if (traj.samples.size() < 3) throw std::invalid_argument("residual needs at least 3 samples");
  const Atlas atlas(traj.samples.front().alpha0, traj.samples.front().alpha1, m);
  double worst = 0;
  std::size_t lo = 0;
  while (lo < traj.samples.size()) {
    std::size_t hi = lo;
    while (hi + 1 < traj.samples.size() && traj.samples[hi + 1].chart == traj.samples[lo].chart) ++hi;
    std::vector<double> t;
    std::vector<Eigen::VectorXd> y;
    for (std::size_t i = lo; i <= hi; ++i) {
      t.push_back(traj.samples[i].t);
      y.push_back(to_vec(traj.samples[i].coords));
    }
    worst = std::max(worst, segment_residual(t, y, atlas.field(traj.samples[lo].chart).fn()));
    lo = hi + 1;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Pole fitting

PoleFit fit_pole(const std::vector<double>& t, const std::vector<double>& z) {
  const auto n = static_cast<Eigen::Index>(t.size());
  if (n < 3 || t.size() != z.size()) throw std::domain_error("insufficient samples for a pole fit");
  // Linearisation z*t = A + b*t + t0*z with A = r - b*t0.
  Eigen::MatrixXd M(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, 0) = 1;
    M(i, 1) = t[i];
    M(i, 2) = z[i];
    rhs[i] = z[i] * t[i];
  }
  Eigen::Vector3d s = M.colPivHouseholderQr().solve(rhs);
  double b = s[1], t0 = s[2], r = s[0] + b * t0;
  // Gauss-Newton on the actual residuals z - r/(t - t0) - b.
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double tau = t[i] - t0;
      res[i] = z[i] - r / tau - b;
      J(i, 0) = 1 / tau;
      J(i, 1) = 1;
      J(i, 2) = r / (tau * tau);
    }
    const Eigen::Vector3d d = J.colPivHouseholderQr().solve(res);
    r += d[0];
    b += d[1];
    t0 += d[2];
    if (d.norm() <= 1e-15 * (1 + std::abs(r) + std::abs(b) + std::abs(t0))) break;
  }
  return {t0, r, b, t.size()};
}

PoleFit fit_pole(const Trajectory& traj, std::size_t event_index, double z_switch) {
  if (event_index >= traj.events.size()) throw std::out_of_range("event index out of range");
  const auto& ev = traj.events[event_index];
  if (ev.kind != EventKind::pole_crossing)
    throw std::domain_error("insufficient samples: event " + std::to_string(event_index) + " is not a pole crossing");
  std::vector<double> t, z;
  auto z_of = [&](std::size_t i) {
    const auto& s = traj.samples[i];
    return Atlas::base_z(s.chart, to_vec(s.coords));
  };
  auto collect = [&](long i, long step) {
    std::size_t count = 0;
    bool started = false;
    for (; i >= 0 && i < static_cast<long>(traj.samples.size()); i += step) {
      const double a = std::abs(z_of(static_cast<std::size_t>(i)));
      if (a > z_switch) {
        if (started) break;
        continue;
      }
      if (a < z_switch / 4) break;
      started = true;
      t.push_back(traj.samples[static_cast<std::size_t>(i)].t);
      z.push_back(z_of(static_cast<std::size_t>(i)));
      ++count;
    }
    return count;
  };
  const long k = static_cast<long>(ev.sample_index);
  const std::size_t before = collect(k - 1, -1);
  const std::size_t after = collect(k, 1);
  if (before < 8 || after < 8)
    throw std::domain_error("insufficient samples near the pole: " + std::to_string(before) + " before, " +
                            std::to_string(after) + " after (need 8 on each side)");
  return fit_pole(t, z);
}

// ---------------------------------------------------------------------------
// Laurent restart

double laurent_restart_check(const Trajectory& traj, std::size_t event_index, int depth, const ModelSet& m) {
  if (event_index >= traj.events.size() || traj.events[event_index].kind != EventKind::pole_crossing)
    throw std::invalid_argument("event is not a pole crossing");
  const auto& ev = traj.events[event_index];
  const NumState& s0 = traj.samples.front();
  const Atlas atlas(s0.alpha0, s0.alpha1, m);
  const auto params = param_values(s0.alpha0, s0.alpha1);
  const ODESystem& sys = m.system6();

  // The chart a pole is crossed in tells the branch: glue2 resolves the
  // balance with poles in x, y and z; glue1 the one where only z has a
  // simple pole, z ~ 2/tau from z' = -z^2/2, with x(t0) free and y(t0) = 0
  // (the nonnegative-order search does not list it because a leading
  // coefficient vanishes).
  LeadingOrders lead;
  double guess_f1 = 0;
  if (ev.from == AtlasChart::glue1) {
    lead.exponents = {0, 0, 1};
    lead.coeffs = {RFunc(0), RFunc(0), RFunc(2)};
    lead.numeric = {0, 0, 2};
    lead.free = {true, false, false};
  } else {
    const auto balances = painleve_leading_orders(sys, 3);
    if (balances.empty()) throw std::domain_error("no pole balance");
    lead = balances.front();
  }

  // Samples on either side, closest to |tau| = 0.1 with 0.02 <= |tau| <= 0.3.
  auto pick = [&](double sign) -> std::optional<std::pair<double, Eigen::VectorXd>> {
    double best = std::numeric_limits<double>::infinity();
    std::optional<std::pair<double, Eigen::VectorXd>> out;
    for (const auto& s : traj.samples) {
      const double tau = s.t - ev.t;
      if (sign * tau < 0.02 || sign * tau > 0.3) continue;
      const double d = std::abs(std::abs(tau) - 0.1);
      if (d >= best) continue;
      auto b = atlas.to_base(s.chart, s.t, to_vec(s.coords));
      if (!b) continue;
      best = d;
      out = std::make_pair(s.t, *b);
    }
    return out;
  };
  const auto before = pick(-1), after = pick(1);
  if (!before || !after) throw std::domain_error("no samples near the pole on both sides");

  auto eval = [&](const Eigen::Vector3d& p, double t) {
    const auto sol = laurent_solve(sys, lead, p[0], depth, params, {p[1], p[2]});
    const auto v = laurent_evaluate(sol, t - p[0]);
    return Eigen::Vector3d(v[0], v[1], v[2]);
  };
  const Eigen::Vector3d target = before->second;
  const Eigen::Vector3d scale = target.cwiseAbs().cwiseMax(1.0);
  if (ev.from == AtlasChart::glue1) guess_f1 = target[0];
  auto F = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector3d((eval(p, before->first) - target).cwiseQuotient(scale));
  };
  Eigen::Vector3d p(ev.t, guess_f1, 0);
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector3d r = F(p);
    Eigen::Matrix3d J;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d q = p;
      const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
      q[j] += h;
      J.col(j) = (F(q) - r) / h;
    }
    const Eigen::Vector3d d = J.colPivHouseholderQr().solve(r);
    p -= d;
    if (d.norm() <= 1e-14 * (1 + p.norm())) break;
  }
  const Eigen::Vector3d predicted = eval(p, after->first);
  return (predicted - after->second).norm() / std::max(after->second.norm(), 1e-300);
}

// ---------------------------------------------------------------------------
// Backlund commutation

namespace {

// Denominators of a coordinate change, watched along a path.
class DenominatorWatch {
 public:
  DenominatorWatch(const ChartMap& c, double a0, double a1) : a0_(a0), a1_(a1) {
    std::vector<Symbol> layout = c.source_vars;
    layout.push_back(sym("t"));
    layout.push_back(alpha0());
    layout.push_back(alpha1());
    for (Symbol w : c.target_vars)
      if (!c.forward.at(w).is_polynomial()) dens_.emplace_back(c.forward.at(w).den(), layout);
  }

  /// Time where some denominator vanishes or changes sign, if any.
  std::optional<double> crossing(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& y) const {
    std::vector<double> prev;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto cur = values(t[i], y[i]);
      for (std::size_t j = 0; j < cur.size(); ++j) {
        if (std::abs(cur[j]) < 1e-12) return t[i];
        if (i > 0 && (prev[j] < 0) != (cur[j] < 0))
          return t[i - 1] + (t[i] - t[i - 1]) * prev[j] / (prev[j] - cur[j]);
      }
      prev = cur;
    }
    return std::nullopt;
  }

 private:
  std::vector<double> values(double t, const Eigen::VectorXd& y) const {
    const std::vector<double> v{y[0], y[1], y[2], t, a0_, a1_};
    std::vector<double> out;
    for (const auto& d : dens_) out.push_back(d(v));
    return out;
  }

  double a0_, a1_;
  std::vector<CompiledPoly> dens_;
};

}  // namespace

Trajectory map_trajectory(const ChartMap& c, const Trajectory& traj, double image_alpha0, double image_alpha1) {
  if (traj.samples.empty()) return traj;
  const NumState& s0 = traj.samples.front();
  const NumericMap map(c, param_values(s0.alpha0, s0.alpha1));
  const DenominatorWatch watch(c, s0.alpha0, s0.alpha1);
  std::vector<double> t;
  std::vector<Eigen::VectorXd> y;
  for (const auto& s : traj.samples) {
    if (s.chart != AtlasChart::base) throw std::invalid_argument("map_trajectory needs base-chart samples");
    t.push_back(s.t);
    y.push_back(to_vec(s.coords));
  }
  if (const auto tc = watch.crossing(t, y))
    throw std::domain_error("denominator of " + c.id + " vanishes along the path near t = " + fmt(*tc));
  Trajectory out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto v = map(t[i], y[i]);
    if (!v) throw std::domain_error("denominator of " + c.id + " vanishes at t = " + fmt(t[i]));
    NumState s = traj.samples[i];
    s.coords = to_array(*v);
    s.alpha0 = image_alpha0;
    s.alpha1 = image_alpha1;
    out.samples.push_back(s);
  }
  return out;
}

double backlund_commute_check(const std::string& name, const NumState& init, double t_end, double rtol,
                              const ModelSet& m) {
  if (init.chart != AtlasChart::base) throw std::invalid_argument("commute check starts in the base chart");
  check_pre(init, t_end, rtol, 1e-14);
  const auto params = param_values(init.alpha0, init.alpha1);
  ChartMap chart;
  Bindings images;
  if (name == "identity") {
    chart = identity_chart(m.system6().state);
  } else {
    const Backlund b = m.backlund(name);
    if (b.validity) {
      for (const auto& [p, v] : *b.validity) {
        const double want = to_double_exact(v.constant_value());
        if (std::abs(params.at(p) - want) > 1e-12)
          throw std::invalid_argument(name + " needs " + p.name() + " = " + fmt(want));
      }
    }
    chart = b.chart;
    images = b.pmap.images;
  }
  std::map<Symbol, double> image_params = params;
  for (const auto& [p, e] : images) {
    const CompiledRFunc c(e, {alpha0(), alpha1()});
    image_params[p] = c(std::vector<double>{init.alpha0, init.alpha1});
  }
  const NumericMap map(chart, params);
  const DenominatorWatch watch(chart, init.alpha0, init.alpha1);

  StepOptions opt;
  opt.rtol = rtol;
  opt.atol = 1e-14;
  const NumericField src_field(m.system6(), params), dst_field(m.system6(), image_params);
  const Eigen::VectorXd y0 = to_vec(init.coords);
  const auto mapped0 = map(init.t, y0);
  if (!mapped0) throw std::domain_error(name + ": denominator vanishes at the initial point, t = " + fmt(init.t));

  std::vector<double> times;
  constexpr int n_out = 20;
  for (int i = 1; i <= n_out; ++i) times.push_back(init.t + (t_end - init.t) * i / n_out);

  // The two flows are independent; run the image flow concurrently.
  auto image_flow = std::async(std::launch::async,
                               [&] { return integrate_to_times(dst_field.fn(), init.t, *mapped0, times, opt); });

  // Source flow: watch the map's denominators on every accepted step.
  const RawTrajectory path = dopri5(src_field.fn(), init.t, y0, t_end, opt);
  if (path.failed) throw std::runtime_error(path.failure);
  if (const auto tc = watch.crossing(path.t, path.y)) {
    image_flow.wait();
    throw std::domain_error(name + ": denominator of the map vanishes along the path near t = " + fmt(*tc));
  }
  const auto src_out = integrate_to_times(src_field.fn(), init.t, y0, times, opt);
  const auto dst_out = image_flow.get();
  double worst = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto mapped = map(times[i], src_out[i]);
    if (!mapped) throw std::domain_error(name + ": denominator vanishes at t = " + fmt(times[i]));
    worst = std::max(worst, (*mapped - dst_out[i]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace hp3
