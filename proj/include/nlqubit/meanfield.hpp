#pragma once

// Nonlinear mean-field qubit dynamics
//
//   d/dt (psi0, psi1) = -i H_eff (psi0, psi1),
//   H_eff = V01 sigma_x + (Bz + g (|psi0|^2 - |psi1|^2)) sigma_z,
//
// integrated with fixed-step classical RK4. The state is never renormalized;
// norm drift is checked against kPropagationNormTol and reported as an error.
// Units: hbar = 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlqubit/errors.hpp"
#include "nlqubit/io.hpp"
#include "nlqubit/qubit.hpp"

namespace nlqubit {

/// Controls entering H_eff. g may have either sign.
struct EffectiveParams {
  double v01 = 0.0;
  double bz = 0.0;
  double g = 0.0;

  bool finite() const { return std::isfinite(v01) && std::isfinite(bz) && std::isfinite(g); }
  /// Largest coefficient magnitude; sets the default step size.
  double rate_scale() const { return std::max({std::abs(g), std::abs(v01), std::abs(bz)}); }
};

/// State-feedback control: H_eff parameters recomputed from the current
/// (instantaneous, possibly RK-stage) Bloch vector at every evaluation.
struct FeedbackLaw {
  std::string name;
  std::function<EffectiveParams(const Vec3& bloch)> law;
  /// Upper bound on rate_scale() of any parameters the law can return.
  double rate_bound = 0.0;
};

using Control = std::variant<EffectiveParams, FeedbackLaw>;

struct Segment {
  double duration = 0.0;
  Control control;
};

/// Ordered list of constant or feedback-controlled segments.
class ControlSchedule {
 public:
  ControlSchedule() = default;

  ControlSchedule& then(double duration, Control control) {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
      throw InvalidArgument("segment duration must be positive and finite");
    }
    if (const auto* p = std::get_if<EffectiveParams>(&control); p && !p->finite()) {
      throw InvalidArgument("segment parameters must be finite");
    }
    if (const auto* f = std::get_if<FeedbackLaw>(&control); f && !f->law) {
      throw InvalidArgument("feedback segment without a control law");
    }
    segments_.push_back({duration, std::move(control)});
    return *this;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

  double total_duration() const {
    double t = 0.0;
    for (const auto& s : segments_) t += s.duration;
    return t;
  }

  double rate_bound() const {
    double r = 0.0;
    for (const auto& s : segments_) r = std::max(r, rate_bound_of(s.control));
    return r;
  }

  static double rate_bound_of(const Control& c) {
    if (const auto* p = std::get_if<EffectiveParams>(&c)) return p->rate_scale();
    return std::get<FeedbackLaw>(c).rate_bound;
  }

 private:
  std::vector<Segment> segments_;
};

inline constexpr double kDefaultStepFraction = 1e-3;
/// step() rejects dt > kMaxPhasePerStep / (3 max(|V01|, |Bz|, |g|)).
inline constexpr double kMaxPhasePerStep = 0.1;

/// dt = 1e-3 / max(|g|, |V01|, |Bz|, feedback bound); 1e-3 when all rates vanish.
inline double default_dt(double rate_scale) {
  return rate_scale > 0.0 ? kDefaultStepFraction / rate_scale : kDefaultStepFraction;
}
inline double default_dt(const EffectiveParams& p) { return default_dt(p.rate_scale()); }
inline double default_dt(const ControlSchedule& s) { return default_dt(s.rate_bound()); }

inline double max_step(double rate_scale) {
  return rate_scale > 0.0 ? kMaxPhasePerStep / (3.0 * rate_scale)
                          : std::numeric_limits<double>::infinity();
}

inline Matrix2c h_eff(const QubitAmplitudes& q, const EffectiveParams& p) {
  return p.v01 * sigma_x() + (p.bz + p.g * q.population_imbalance()) * sigma_z();
}

namespace detail {

struct Spinor {
  cplx a;
  cplx b;
};

inline Spinor to_spinor(const QubitAmplitudes& q) { return {q.psi0(), q.psi1()}; }

inline QubitAmplitudes to_amplitudes(const Spinor& s) {
  return {s.a, s.b, kPropagationNormTol};
}

inline Vec3 raw_bloch(const Spinor& s) {
  const cplx c = std::conj(s.a) * s.b;
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(s.a) - std::norm(s.b)};
}

inline cplx times_minus_i(cplx u) { return {u.imag(), -u.real()}; }

inline Spinor rhs(const Spinor& s, const EffectiveParams& p) {
  const double hz = p.bz + p.g * (std::norm(s.a) - std::norm(s.b));
  return {times_minus_i(hz * s.a + p.v01 * s.b), times_minus_i(p.v01 * s.a - hz * s.b)};
}

inline Spinor axpy(const Spinor& s, double h, const Spinor& k) {
  return {s.a + h * k.a, s.b + h * k.b};
}

/// One classical RK4 step; params_of maps a stage state to H_eff parameters.
template <class ParamsOf>
Spinor rk4_with(const Spinor& s, double h, ParamsOf&& params_of) {
  const Spinor k1 = rhs(s, params_of(s));
  const Spinor s2 = axpy(s, 0.5 * h, k1);
  const Spinor k2 = rhs(s2, params_of(s2));
  const Spinor s3 = axpy(s, 0.5 * h, k2);
  const Spinor k3 = rhs(s3, params_of(s3));
  const Spinor s4 = axpy(s, h, k3);
  const Spinor k4 = rhs(s4, params_of(s4));
  const double w = h / 6.0;
  return {s.a + w * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
          s.b + w * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b)};
}

inline Spinor rk4(const Spinor& s, double h, const Control& c) {
  if (const auto* p = std::get_if<EffectiveParams>(&c)) {
    return rk4_with(s, h, [p](const Spinor&) { return *p; });
  }
  const auto& law = std::get<FeedbackLaw>(c).law;
  return rk4_with(s, h, [&law](const Spinor& u) { return law(raw_bloch(u)); });
}

inline void check_step(double dt, double rate_scale) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw StepSizeError("step size must be positive and finite");
  }
  if (dt > max_step(rate_scale)) {
    throw StepSizeError("step size " + format_double(dt) + " exceeds limit " +
                        format_double(max_step(rate_scale)));
  }
}

}  // namespace detail

/// One RK4 step of the nonlinear equation of motion under fixed parameters.
inline QubitAmplitudes step(const QubitAmplitudes& q, const EffectiveParams& p, double dt) {
  detail::check_step(dt, p.rate_scale());
  return detail::to_amplitudes(detail::rk4(detail::to_spinor(q), dt, Control{p}));
}

/// One RK4 step under a feedback law (the law is queried at every RK stage).
inline QubitAmplitudes step(const QubitAmplitudes& q, const FeedbackLaw& law, double dt) {
  detail::check_step(dt, law.rate_bound);
  return detail::to_amplitudes(detail::rk4(detail::to_spinor(q), dt, Control{law}));
}

struct TrajectoryPoint {
  double t;
  QubitAmplitudes state;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;  // empty unless store_points was requested
  QubitAmplitudes final_state = QubitAmplitudes::zero();
  double final_time = 0.0;
  std::size_t steps = 0;
};

using Observer = std::function<void(double t, const QubitAmplitudes& state)>;

struct IntegrateOptions {
  bool store_points = true;
  Observer observer;  // called at t = 0 and after every step
};

/// Drives RK4 across the schedule. Each segment is split into
/// ceil(duration / dt) equal steps so segment boundaries are hit exactly.
/// An empty schedule yields the single point (0, q0).
inline Trajectory integrate(const QubitAmplitudes& q0, const ControlSchedule& schedule, double dt,
                            const IntegrateOptions& options = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw StepSizeError("step size must be positive and finite");
  }
  Trajectory traj;
  traj.final_state = q0;
  auto emit = [&](double t, const QubitAmplitudes& q) {
    if (options.store_points) traj.points.push_back({t, q});
    if (options.observer) options.observer(t, q);
  };
  emit(0.0, q0);

  detail::Spinor s = detail::to_spinor(q0);
  double t0 = 0.0;
  for (const auto& seg : schedule.segments()) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(seg.duration / dt - 1e-9)));
    const double h = seg.duration / static_cast<double>(n);
    detail::check_step(h, ControlSchedule::rate_bound_of(seg.control));
    for (std::size_t i = 1; i <= n; ++i) {
      s = detail::rk4(s, h, seg.control);
      const QubitAmplitudes q = detail::to_amplitudes(s);
      const double t = (i == n) ? t0 + seg.duration : t0 + static_cast<double>(i) * h;
      emit(t, q);
      traj.final_state = q;
      ++traj.steps;
    }
    t0 += seg.duration;
  }
  traj.final_time = t0;
  return traj;
}

/// Closed-form exp(-i angle sigma_x / 2); rotates the Bloch vector by +angle about x.
inline QubitAmplitudes rotate_x(const QubitAmplitudes& q, double angle) {
  const double c = std::cos(0.5 * angle);
  const cplx ms{0.0, -std::sin(0.5 * angle)};
  return {c * q.psi0() + ms * q.psi1(), ms * q.psi0() + c * q.psi1(), kPropagationNormTol};
}

inline QubitAmplitudes rotate_y(const QubitAmplitudes& q, double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  return {c * q.psi0() - s * q.psi1(), s * q.psi0() + c * q.psi1(), kPropagationNormTol};
}

/// Closed-form exp(-i angle sigma_z / 2).
inline QubitAmplitudes rotate_z(const QubitAmplitudes& q, double angle) {
  return {std::polar(1.0, -0.5 * angle) * q.psi0(), std::polar(1.0, 0.5 * angle) * q.psi1(),
          kPropagationNormTol};
}

struct FlowSample {
  BlochVector point;
  Vec3 velocity;
};

/// Bloch-sphere velocity 2 h(r) x r with h = (V01, 0, Bz + g z) for the
/// torsion flow, or h = (V01, 0, Bz + g) when `nonlinear` is false (g then
/// acts as a fixed sigma_z coefficient).
inline Vec3 flow_velocity(const BlochVector& r, const EffectiveParams& p, bool nonlinear) {
  const Vec3 h{p.v01, 0.0, p.bz + p.g * (nonlinear ? r.z() : 1.0)};
  return 2.0 * cross(h, r.vec());
}

inline std::vector<FlowSample> flow_field(std::span<const BlochVector> grid, const EffectiveParams& p,
                                          bool nonlinear) {
  std::vector<FlowSample> out;
  out.reserve(grid.size());
  for (const auto& r : grid) {
    if (!r.on_sphere()) throw InvalidState("flow_field grid point is off the unit sphere");
    out.push_back({r, flow_velocity(r, p, nonlinear)});
  }
  return out;
}

/// n_polar x n_azimuth grid at polar midpoints pi (i + 1/2) / n_polar and
/// azimuths 2 pi j / n_azimuth; polar-major order.
inline std::vector<BlochVector> sphere_grid(int n_polar, int n_azimuth) {
  if (n_polar < 1 || n_azimuth < 1) throw InvalidArgument("sphere grid dimensions must be >= 1");
  std::vector<BlochVector> grid;
  grid.reserve(static_cast<std::size_t>(n_polar) * static_cast<std::size_t>(n_azimuth));
  for (int i = 0; i < n_polar; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / n_polar;
    for (int j = 0; j < n_azimuth; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_azimuth;
      grid.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                        std::cos(theta));
    }
  }
  return grid;
}

/// Points on the z = 0 great circle (z exactly zero).
inline std::vector<BlochVector> equator_ring(int n_azimuth) {
  std::vector<BlochVector> ring;
  for (int j = 0; j < n_azimuth; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / n_azimuth;
    ring.emplace_back(std::cos(phi), std::sin(phi), 0.0);
  }
  return ring;
}

inline void write_flow_csv(std::ostream& os, std::span<const FlowSample> samples) {
  os << "x,y,z,vx,vy,vz\n";
  for (const auto& s : samples) {
    write_csv_row(os, s.point.x(), s.point.y(), s.point.z(), s.velocity.x, s.velocity.y,
                  s.velocity.z);
  }
}

}  // namespace nlqubit
