#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hp3/models/painleve.hpp"
#include "hp3/numerics/compiled.hpp"

namespace hp3 {

/// Right-hand side y' = f(t, y); returns false where f cannot be evaluated
/// (denominator near zero).
using RhsFn = std::function<bool(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

/// Compiled numeric vector field of an ODESystem at fixed parameter values.
class NumericField {
 public:
  NumericField() = default;
  /// Every parameter of s must have a value in `params`.
  NumericField(const ODESystem& s, const std::map<Symbol, double>& params);

  std::size_t dim() const { return rhs_.size(); }
  bool operator()(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const;
  RhsFn fn() const;

 private:
  std::vector<CompiledRFunc> rhs_;
  std::size_t n_ = 0;
  std::vector<double> fixed_;  // parameter values, after state and t
};

/// Compiled coordinate change at fixed parameter values.
class NumericMap {
 public:
  NumericMap() = default;
  /// Uses c.forward; with `use_inverse` the inverse instead (source and
  /// target swap roles).
  NumericMap(const ChartMap& c, const std::map<Symbol, double>& params, bool use_inverse = false);
  /// Returns nullopt near a pole of the map or for non-finite results.
  std::optional<Eigen::VectorXd> operator()(double t, const Eigen::VectorXd& v) const;

 private:
  std::vector<CompiledRFunc> comp_;
  std::size_t n_ = 0;
  std::vector<double> fixed_;
};

struct StepOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0;       // 0: automatic initial step
  double h_max = 0;    // 0: unlimited
  double h_min_rel = 1e-14;
  std::size_t max_steps = 2000000;
};

/// Result of a plain integration: accepted steps (t, y).
struct RawTrajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> y;
  bool failed = false;
  std::string failure;
  std::size_t rejected = 0;
  double last_h = 0;  // last accepted step size
};

/// Dormand-Prince 5(4) with PI step-size control; every step satisfies
/// err <= atol + rtol*|y| componentwise (RMS norm). `stop` is consulted after
/// each accepted step and ends the integration early when it returns true.
RawTrajectory dopri5(const RhsFn& f, double t0, const Eigen::VectorXd& y0, double t_end, const StepOptions& opt,
                     const std::function<bool(double, const Eigen::VectorXd&)>& stop = {});

/// Integrates and returns the state at each requested time (monotone in the
/// direction of integration). Throws std::runtime_error on failure.
std::vector<Eigen::VectorXd> integrate_to_times(const RhsFn& f, double t0, const Eigen::VectorXd& y0,
                                                const std::vector<double>& times, const StepOptions& opt);

enum class AtlasChart { base, glue1, glue2 };
std::string to_string(AtlasChart c);

struct NumState {
  AtlasChart chart = AtlasChart::base;
  std::array<double, 3> coords{};
  double t = 1;
  double alpha0 = 0, alpha1 = 0;
};

enum class EventKind { chart_switch, pole_crossing, step_failure };
std::string to_string(EventKind k);

struct TrajectoryEvent {
  double t = 0;
  EventKind kind = EventKind::chart_switch;
  /// Pole crossings: first sample after the crossing. Chart switches: the
  /// last sample in the old chart, where the switch happens.
  std::size_t sample_index = 0;
  std::string detail;
  // chart switches: the state in both charts at time t
  AtlasChart from = AtlasChart::base, to = AtlasChart::base;
  std::array<double, 3> from_coords{}, to_coords{};
};

struct Trajectory {
  std::vector<NumState> samples;
  std::vector<TrajectoryEvent> events;
};

/// Compiled atlas for the polynomial system: base chart plus glue1/glue2
/// with transported fields and transition maps.
class Atlas {
 public:
  Atlas(double alpha0, double alpha1, const ModelSet& m = default_models());

  const NumericField& field(AtlasChart c) const { return fields_[static_cast<int>(c)]; }
  /// base -> chart (identity for base).
  std::optional<Eigen::VectorXd> from_base(AtlasChart c, double t, const Eigen::VectorXd& v) const;
  /// chart -> base.
  std::optional<Eigen::VectorXd> to_base(AtlasChart c, double t, const Eigen::VectorXd& v) const;
  /// z in base coordinates (1/z-coordinate in glue charts).
  static double base_z(AtlasChart c, const Eigen::VectorXd& v);
  double alpha0() const { return a0_; }
  double alpha1() const { return a1_; }

 private:
  double a0_, a1_;
  std::array<NumericField, 3> fields_;
  std::array<NumericMap, 3> fwd_, inv_;
};

/// Plain integration of the polynomial system in the base chart.
Trajectory integrate(const NumState& init, double t_end, double rtol = 1e-10, double atol = 1e-12,
                     const ModelSet& m = default_models());

/// Atlas integration through movable poles: leaves the base chart for glue2
/// when |z| > z_switch and returns when |z| <= z_switch/2. When glue2 does
/// not resolve the branch (its segment fails), the segment is redone in
/// glue1, which covers large z with moderate x.
/// `h_max` bounds the step (0: unbounded).
Trajectory integrate_atlas(const NumState& init, double t_end, double rtol = 1e-10, double atol = 1e-12,
                           double z_switch = 10, double h_max = 0, const ModelSet& m = default_models());

/// Largest relative round-trip error over the chart switches of a
/// trajectory (0 when there are none).
double chart_switch_consistency(const Trajectory& traj, const ModelSet& m = default_models());

/// Max over samples of |FD derivative - rhs| / (|rhs| + 1), with derivatives
/// from 7-point finite differences on the sample times (fewer on short
/// chart segments), in each sample's own chart. Needs at least 3 samples.
double residual(const Trajectory& traj, const ModelSet& m = default_models());

/// Same diagnostic for a plain trajectory of an arbitrary field.
double residual(const RawTrajectory& traj, const RhsFn& f);

/// Finite-difference weights for the first derivative at x0 on nodes x
/// (Fornberg's algorithm).
std::vector<double> fd_weights(double x0, const std::vector<double>& x);

struct PoleFit {
  double t0;
  double residue;
  double offset;
  std::size_t samples;
};

/// Least-squares fit z(t) ~ r/(t - t0) + b on the samples around the given
/// pole-crossing event with |z| in [z_switch/4, z_switch], at least 8 on each
/// side. Throws std::domain_error otherwise.
PoleFit fit_pole(const Trajectory& traj, std::size_t event_index, double z_switch = 10);
/// Same fit on raw (t, z) data.
PoleFit fit_pole(const std::vector<double>& t, const std::vector<double>& z);

/// Matches the formal Laurent solution at the pole (t0 and the two free
/// coefficients) to the trajectory about 0.1 before the event, and returns
/// the relative discrepancy to the trajectory about 0.1 after it, both in
/// base coordinates. The balance follows the chart of the crossing: glue2
/// for poles of x, y and z, glue1 for a simple pole of z alone.
double laurent_restart_check(const Trajectory& traj, std::size_t event_index, int depth = 20,
                             const ModelSet& m = default_models());

/// Maps a base-chart trajectory through a coordinate change evaluated at
/// the source parameters; the result carries the image parameters. Throws
/// std::domain_error, naming the time, when a denominator of the map
/// vanishes at a sample or changes sign between samples.
Trajectory map_trajectory(const ChartMap& c, const Trajectory& traj, double image_alpha0, double image_alpha1);

/// Max over output times of |map(flow(init)) - flow(map(init))|, computed in
/// the base chart at image parameters. Throws std::domain_error when the
/// map's denominator vanishes on the path, naming the time.
double backlund_commute_check(const std::string& name, const NumState& init, double t_end, double rtol = 1e-11,
                              const ModelSet& m = default_models());

}  // namespace hp3
