#include "hp3/special/series.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

namespace hp3 {

// ---------------------------------------------------------------------------
// PowerSeries

PowerSeries::PowerSeries(std::vector<Rat> coeffs, int order) : c_(std::move(coeffs)), order_(order) {
  if (order < 0) throw std::invalid_argument("series order must be nonnegative");
  c_.resize(static_cast<std::size_t>(order) + 1);
}

PowerSeries PowerSeries::constant(const Rat& c, int order) { return PowerSeries({c}, order); }

PowerSeries PowerSeries::variable(int order) { return PowerSeries({Rat(0), Rat(1)}, order); }

PowerSeries PowerSeries::operator+(const PowerSeries& o) const {
  const int n = std::min(order_, o.order_);
  std::vector<Rat> c(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) c[static_cast<std::size_t>(k)] = (*this)[k] + o[k];
  return {std::move(c), n};
}

PowerSeries PowerSeries::operator-() const { return *this * Rat(-1); }

PowerSeries PowerSeries::operator-(const PowerSeries& o) const { return *this + (-o); }

PowerSeries PowerSeries::operator*(const PowerSeries& o) const {
  const int n = std::min(order_, o.order_);
  std::vector<Rat> c(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    if (is_zero((*this)[i])) continue;
    for (int j = 0; i + j <= n; ++j) c[static_cast<std::size_t>(i + j)] += (*this)[i] * o[j];
  }
  return {std::move(c), n};
}

PowerSeries PowerSeries::operator*(const Rat& s) const {
  std::vector<Rat> c = c_;
  for (auto& x : c) x *= s;
  return {std::move(c), order_};
}

PowerSeries PowerSeries::operator/(const PowerSeries& o) const {
  if (is_zero(o[0])) throw std::domain_error("series division needs a nonzero constant term");
  const int n = std::min(order_, o.order_);
  std::vector<Rat> q(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    Rat acc = (*this)[k];
    for (int j = 1; j <= k; ++j) acc -= o[j] * q[static_cast<std::size_t>(k - j)];
    q[static_cast<std::size_t>(k)] = acc / o[0];
  }
  return {std::move(q), n};
}

PowerSeries PowerSeries::derivative() const {
  if (order_ == 0) return constant(Rat(0), 0);
  std::vector<Rat> c(static_cast<std::size_t>(order_));
  for (int k = 1; k <= order_; ++k) c[static_cast<std::size_t>(k - 1)] = (*this)[k] * k;
  return {std::move(c), order_ - 1};
}

PowerSeries PowerSeries::times_t() const {
  std::vector<Rat> c(c_.size() + 1);
  for (std::size_t k = 0; k < c_.size(); ++k) c[k + 1] = c_[k];
  return {std::move(c), order_ + 1};
}

PowerSeries PowerSeries::divided_by_t() const {
  if (!is_zero(c_[0])) throw std::domain_error("division by t leaves a 1/t pole (constant term " + to_string(c_[0]) + ")");
  if (order_ == 0) return constant(Rat(0), 0);
  return {std::vector<Rat>(c_.begin() + 1, c_.end()), order_ - 1};
}

PowerSeries PowerSeries::truncated(int order) const {
  if (order > order_) throw std::invalid_argument("cannot raise the order of a truncated series");
  return {c_, order};
}

double PowerSeries::evaluate(double t) const {
  double s = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * t + to_double(*it);
  return s;
}

Rat PowerSeries::evaluate(const Rat& t) const {
  Rat s(0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * t + *it;
  return s;
}

// ---------------------------------------------------------------------------
// Hypergeometric-type series

Rat pochhammer(const Rat& a, int k) {
  if (k < 0) throw std::invalid_argument("pochhammer needs k >= 0");
  Rat p(1);
  for (int j = 0; j < k; ++j) p *= a + j;
  return p;
}

namespace {

bool nonpositive_integer(const Rat& a) { return a.get_den() == 1 && sgn(a) <= 0; }

}  // namespace

PowerSeries F_series(const Rat& a, int N) {
  if (nonpositive_integer(a)) throw std::invalid_argument("F(a; t) needs a not in {0, -1, -2, ...}");
  if (N < 1) throw std::invalid_argument("F(a; t) needs N >= 1");
  std::vector<Rat> c(static_cast<std::size_t>(N) + 1);
  c[0] = 1;
  for (int k = 1; k <= N; ++k) c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] / ((a + k - 1) * k);
  return {std::move(c), N};
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Passes when every coefficient up to `upto` vanishes; otherwise the first
// nonzero one is the witness.
CheckReport zero_coefficients(std::string id, const PowerSeries& r, int upto, const std::string& what,
                              Clock::time_point t0) {
  CheckReport rep;
  rep.check_id = std::move(id);
  rep.status = CheckStatus::pass;
  for (int k = 0; k <= upto; ++k) {
    if (!is_zero(r[k])) {
      rep.status = CheckStatus::fail;
      rep.witness = "coefficient of t^" + std::to_string(k) + ": " + to_string(r[k]);
      rep.witness_point = {{"k", std::to_string(k)}};
      rep.detail = what + ": nonzero coefficient at order " + std::to_string(k);
      break;
    }
  }
  if (rep.passed()) rep.detail = what + ": coefficients 0.." + std::to_string(upto) + " are exactly zero";
  rep.elapsed_ms = ms_since(t0);
  return rep;
}

}  // namespace

CheckReport verify_Z_ode(int N, const Rat& a) {
  if (N < 4) throw std::invalid_argument("verify_Z_ode needs N >= 4");
  const auto t0 = Clock::now();
  const PowerSeries Z = F_series(a, N);
  const PowerSeries d1 = Z.derivative(), d2 = d1.derivative();
  const PowerSeries r = d2.times_t() + d1 * Rat(2) - Z;
  return zero_coefficients("special_z_ode", r, N - 2, "t Z'' + 2 Z' - Z with Z = F(" + to_string(a) + "; t)", t0);
}

CheckReport verify_riccati_symbolic(const PowerSeries& Z) {
  const auto t0 = Clock::now();
  const int N = Z.order();
  if (N < 6) throw std::invalid_argument("verify_riccati_symbolic needs N >= 6");
  const PowerSeries z = Z.derivative() * Rat(2) / Z;
  const PowerSeries one = PowerSeries::constant(Rat(1), z.order());
  PowerSeries pole_part;
  try {
    pole_part = ((z - one) * Rat(2)).divided_by_t();  // 2z/t - 2/t
  } catch (const std::domain_error& e) {
    CheckReport rep;
    rep.check_id = "special_riccati";
    rep.status = CheckStatus::fail;
    rep.witness = "1/t coefficient: " + to_string(((z - one) * Rat(2))[0]);
    rep.witness_point = {{"k", "-1"}};
    rep.detail = std::string("z(0) != 1, the residual has a 1/t pole: ") + e.what();
    rep.elapsed_ms = ms_since(t0);
    return rep;
  }
  const PowerSeries r = z.derivative() + z * z * make_rat(1, 2) + pole_part;
  return zero_coefficients("special_riccati", r, N - 3, "z' + z^2/2 + 2z/t - 2/t with z = 2Z'/Z", t0);
}

CheckReport verify_riccati_symbolic(int N) { return verify_riccati_symbolic(F_series(Rat(2), N)); }

// ---------------------------------------------------------------------------
// Evaluation and the seed

int terms_for(const Rat& a, double t) {
  if (nonpositive_integer(a)) throw std::invalid_argument("F(a; t) needs a not in {0, -1, -2, ...}");
  const double ad = to_double(a), at = std::abs(t);
  for (int N = 40; N <= (1 << 16); N *= 2) {
    // |term_k| for k = N + 1, then a geometric bound on the rest.
    double term = 1, sum = 1;
    for (int k = 1; k <= N + 1; ++k) {
      term *= at / (std::abs(ad + k - 1) * k);
      if (k <= N) sum += term;
    }
    const double q = at / (std::abs(ad + N + 1) * (N + 2));
    if (q < 1 && term / (1 - q) < 1e-14 * std::max(1.0, sum)) return N;
  }
  throw std::domain_error("F(a; t): no truncation below 1e-14 at t = " + std::to_string(t));
}

std::array<double, 2> evaluate_F(const Rat& a, double t) {
  const PowerSeries Z = F_series(a, terms_for(a, t));
  return {Z.evaluate(t), Z.derivative().evaluate(t)};
}

std::array<double, 3> seed_solution(double t) {
  const auto [Z, dZ] = evaluate_F(Rat(2), t);
  if (!(std::abs(Z) > 1e-300)) throw std::domain_error("Z vanishes at t = " + std::to_string(t));
  return {0.0, 0.0, 2 * dZ / Z};
}

std::array<Rat, 3> seed_solution(const Rat& t, int N) {
  const PowerSeries Z = F_series(Rat(2), N);
  const Rat z0 = Z.evaluate(t);
  if (is_zero(z0)) throw std::domain_error("Z vanishes at t = " + to_string(t));
  return {Rat(0), Rat(0), 2 * Z.derivative().evaluate(t) / z0};
}

// ---------------------------------------------------------------------------
// Hierarchy

namespace {

HierarchyStep certify(HierarchyStep step, const Trajectory& traj) {
  step.residual = residual(traj);
  step.certified = step.residual <= 1e-6;
  step.description += step.certified ? "; residual certified" : "; residual above 1e-6";
  return step;
}

}  // namespace

std::vector<HierarchyStep> hierarchy(int depth, double t_start, double t_end, const ModelSet& m) {
  if (depth < 0) throw std::invalid_argument("hierarchy depth must be nonnegative");
  NumState init;
  init.t = t_start;
  init.alpha0 = seed_alpha0;
  init.alpha1 = seed_alpha1;
  const auto seed = seed_solution(t_start);
  init.coords = {seed[0], seed[1], seed[2]};
  const Trajectory base = integrate(init, t_end, 1e-10, 1e-12, m);

  std::vector<std::future<HierarchyStep>> jobs;
  jobs.push_back(std::async(std::launch::async, [&] {
    HierarchyStep s;
    s.level = 0;
    s.description = "seed (0, 0, 2 Z'/Z), Z = F(2; t)";
    return certify(s, base);
  }));
  if (depth >= 1) {
    jobs.push_back(std::async(std::launch::async, [&] {
      HierarchyStep s;
      s.level = 1;
      s.alpha0 = -2 - seed_alpha0;
      s.alpha1 = seed_alpha1;
      s.maps = "s1";
      s.description = "s1 image of the seed";
      try {
        const Backlund b = m.backlund("s1");
        return certify(s, map_trajectory(b.chart, base, s.alpha0, s.alpha1));
      } catch (const std::domain_error& e) {
        s.description += std::string(": skipped, ") + e.what();
        return s;
      }
    }));
  }
  std::vector<HierarchyStep> out;
  for (auto& j : jobs) out.push_back(j.get());
  for (int level = 2; level <= depth; ++level) {
    HierarchyStep s;
    s.level = level;
    s.alpha0 = seed_alpha0 - 2 * level;
    s.alpha1 = seed_alpha1;
    s.description =
        "unreachable: at a1 = 3/2 only s1 keeps a1 (a0 -> -2 - a0, an involution on {0, -2}); "
        "s0 and pi move a1 to -1/2 and 1/2, where s1 and pi no longer apply";
    out.push_back(s);
  }
  return out;
}

}  // namespace hp3
