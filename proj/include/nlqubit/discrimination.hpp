#pragma once

// Single-input nonlinear state discrimination at mean-field level.
//
// Two candidate states a, b with Bloch angle theta_ab are pushed apart by
// z-axis torsion until they are (numerically) orthogonal, after which a
// readout unitary maps them onto the circulation basis |0>, |1> and a
// Born-rule measurement decides.
//
//  * Simple scheme: y = 0 inputs with z_a = -z_b, constant H_eff = g z sigma_z.
//    Each candidate precesses about z at rate 2 g z, so the azimuthal
//    separation grows at 4 g sin(theta/2) and antipodality is reached at
//    t = pi / (4 g sin(theta/2)).
//  * Childs-Young scheme: inputs with y = z, and the feedback
//    V01 = g x / 2 keeps y = z for all time (see docs/cy_control.md). On that
//    manifold dx/dt = -g (1 - x^2), so x reaches 0 (antipodal pair) after
//    artanh(cos(theta/2)) / g ~ ln(4/theta) / g.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nlqubit/errors.hpp"
#include "nlqubit/meanfield.hpp"
#include "nlqubit/parallel.hpp"
#include "nlqubit/qubit.hpp"

namespace nlqubit {

enum class Scheme { Simple, ChildsYoung };

inline std::string_view to_string(Scheme s) {
  return s == Scheme::Simple ? "simple" : "childs-young";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "simple") return Scheme::Simple;
  if (name == "childs-young" || name == "cy") return Scheme::ChildsYoung;
  throw InvalidArgument("unknown discrimination scheme '" + std::string(name) + "'");
}

struct InputPair {
  double theta_ab = 0.0;  // Bloch angle between the candidates, in [0, pi]
  Scheme scheme = Scheme::Simple;

  void validate() const {
    if (!(theta_ab >= 0.0 && theta_ab <= std::numbers::pi)) {
      throw InvalidArgument("theta_ab must lie in [0, pi]");
    }
  }
};

using CandidatePair = std::pair<QubitAmplitudes, QubitAmplitudes>;

/// a = cos((pi - theta)/4)|0> + sin((pi - theta)/4)|1>, b likewise with
/// (pi + theta)/4: x_a = x_b = cos(theta/2), z_a = -z_b = sin(theta/2), y = 0.
inline CandidatePair prepare_inputs_simple(double theta_ab) {
  InputPair{theta_ab}.validate();
  const double pa = 0.25 * (std::numbers::pi - theta_ab);
  const double pb = 0.25 * (std::numbers::pi + theta_ab);
  return {QubitAmplitudes(std::cos(pa), std::sin(pa)), QubitAmplitudes(std::cos(pb), std::sin(pb))};
}

/// x_a = x_b = |cos(theta/2)|, y_a = z_a = sin(theta/2)/sqrt2 = -y_b = -z_b.
inline CandidatePair prepare_inputs_cy(double theta_ab) {
  InputPair{theta_ab}.validate();
  const double x = std::abs(std::cos(0.5 * theta_ab));
  const double w = std::sin(0.5 * theta_ab) / std::numbers::sqrt2;
  const double len = std::sqrt(x * x + 2.0 * w * w);
  return {from_bloch(BlochVector(x / len, w / len, w / len)),
          from_bloch(BlochVector(x / len, -w / len, -w / len))};
}

inline CandidatePair prepare_inputs(const InputPair& pair) {
  return pair.scheme == Scheme::Simple ? prepare_inputs_simple(pair.theta_ab)
                                       : prepare_inputs_cy(pair.theta_ab);
}

/// Control law holding y = z under torsion: V01 = g x / 2, Bz = 0.
inline EffectiveParams cy_control(const Vec3& bloch, double g) {
  return {0.5 * g * bloch.x, 0.0, g};
}

inline EffectiveParams cy_control(const QubitAmplitudes& q, double g) {
  return cy_control(to_bloch(q).vec(), g);
}

inline FeedbackLaw cy_feedback(double g) {
  return {"childs-young", [g](const Vec3& r) { return cy_control(r, g); }, std::abs(g)};
}

/// Discrimination-phase control for a scheme.
inline Control discrimination_control(Scheme scheme, double g) {
  if (scheme == Scheme::Simple) return EffectiveParams{0.0, 0.0, g};
  return cy_feedback(g);
}

inline constexpr double kDefaultOrthEps = 1e-4;
inline constexpr double kDefaultOrthTol = 1e-3;

/// 4 pi / (|g| theta): eight times the Simple-scheme antipodal time.
inline double default_t_max(double theta_ab, double g) {
  if (g == 0.0 || theta_ab <= 0.0) return 100.0;
  return 4.0 * std::numbers::pi / (std::abs(g) * theta_ab);
}

struct DiscriminationOptions {
  double dt = 0.0;     // <= 0: default_dt for rate |g|
  double t_max = 0.0;  // <= 0: default_t_max
  double orth_eps = kDefaultOrthEps;
  bool store_trajectories = true;
};

enum class DiscriminationStatus {
  Orthogonalized,   // |<a|b>|^2 <= orth_eps reached
  ResidualMinimum,  // CY: overlap minimum reached above the threshold
  Inconclusive,     // t_max exceeded
};

inline std::string_view to_string(DiscriminationStatus s) {
  switch (s) {
    case DiscriminationStatus::Orthogonalized: return "orthogonalized";
    case DiscriminationStatus::ResidualMinimum: return "residual-minimum";
    case DiscriminationStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct DiscriminationRun {
  InputPair pair;
  double g = 0.0;
  double dt = 0.0;
  double t_max = 0.0;
  QubitAmplitudes a_initial = QubitAmplitudes::zero();
  QubitAmplitudes b_initial = QubitAmplitudes::zero();
  QubitAmplitudes a_final = QubitAmplitudes::zero();
  QubitAmplitudes b_final = QubitAmplitudes::zero();
  std::vector<TrajectoryPoint> trajectory_a;
  std::vector<TrajectoryPoint> trajectory_b;
  DiscriminationStatus status = DiscriminationStatus::Inconclusive;
  double t_stop = 0.0;           // time of the final states
  std::optional<double> t_orth;  // set unless inconclusive
  double residual_overlap = 1.0;  // |<a|b>|^2 at t_stop

  bool conclusive() const { return status != DiscriminationStatus::Inconclusive; }
};

namespace detail {

inline double overlap_sq(const Spinor& a, const Spinor& b) {
  return std::norm(std::conj(a.a) * b.a + std::conj(a.b) * b.b);
}

}  // namespace detail

/// Evolves both candidates in lock step under the scheme's control. t_orth is
/// the first time |<a(t)|b(t)>|^2 <= orth_eps, located by bisection inside
/// the step where the threshold is crossed. For the CY scheme a first
/// overlap minimum above the threshold ends the run as ResidualMinimum.
inline DiscriminationRun run_discrimination(const InputPair& pair, double g,
                                            const DiscriminationOptions& opt = {}) {
  pair.validate();
  if (!std::isfinite(g)) throw InvalidArgument("g must be finite");
  if (!(opt.orth_eps > 0.0 && opt.orth_eps < 1.0)) throw InvalidArgument("orth_eps must be in (0, 1)");

  const Control control = discrimination_control(pair.scheme, g);
  DiscriminationRun run;
  run.pair = pair;
  run.g = g;
  run.dt = opt.dt > 0.0 ? opt.dt : default_dt(std::abs(g));
  run.t_max = opt.t_max > 0.0 ? opt.t_max : default_t_max(pair.theta_ab, g);
  detail::check_step(run.dt, std::abs(g));

  const auto [a0, b0] = prepare_inputs(pair);
  run.a_initial = a0;
  run.b_initial = b0;

  auto record = [&](double t, const detail::Spinor& a, const detail::Spinor& b) {
    if (!opt.store_trajectories) return;
    run.trajectory_a.push_back({t, detail::to_amplitudes(a)});
    run.trajectory_b.push_back({t, detail::to_amplitudes(b)});
  };
  auto finish = [&](DiscriminationStatus status, double t, const detail::Spinor& a,
                    const detail::Spinor& b) {
    run.status = status;
    run.t_stop = t;
    run.a_final = detail::to_amplitudes(a);
    run.b_final = detail::to_amplitudes(b);
    run.residual_overlap = std::min(1.0, detail::overlap_sq(a, b));
    if (status != DiscriminationStatus::Inconclusive) run.t_orth = t;
    return std::move(run);
  };

  detail::Spinor a = detail::to_spinor(a0);
  detail::Spinor b = detail::to_spinor(b0);
  record(0.0, a, b);
  double ov = detail::overlap_sq(a, b);
  if (ov <= opt.orth_eps) return finish(DiscriminationStatus::Orthogonalized, 0.0, a, b);

  bool decreasing_seen = false;
  detail::Spinor a_prev = a, b_prev = b;
  double t_prev = 0.0;
  for (std::size_t k = 1;; ++k) {
    const double t = std::min(static_cast<double>(k) * run.dt, run.t_max);
    const double h = t - static_cast<double>(k - 1) * run.dt;
    const detail::Spinor a_next = detail::rk4(a, h, control);
    const detail::Spinor b_next = detail::rk4(b, h, control);
    const double ov_next = detail::overlap_sq(a_next, b_next);

    if (ov_next <= opt.orth_eps) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double ov_mid =
            detail::overlap_sq(detail::rk4(a, mid, control), detail::rk4(b, mid, control));
        (ov_mid <= opt.orth_eps ? hi : lo) = mid;
      }
      const detail::Spinor a_hit = detail::rk4(a, hi, control);
      const detail::Spinor b_hit = detail::rk4(b, hi, control);
      const double t_hit = t - h + hi;
      record(t_hit, a_hit, b_hit);
      return finish(DiscriminationStatus::Orthogonalized, t_hit, a_hit, b_hit);
    }

    if (pair.scheme == Scheme::ChildsYoung && decreasing_seen && ov_next > ov) {
      // Minimum lies in [t_prev, t]; golden-section search from the state at t_prev.
      double lo = 0.0, hi = t - t_prev;
      const double r = 0.5 * (std::sqrt(5.0) - 1.0);
      auto f = [&](double tau) {
        return detail::overlap_sq(detail::rk4(a_prev, tau, control), detail::rk4(b_prev, tau, control));
      };
      for (int it = 0; it < 100; ++it) {
        const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
        (f(x1) < f(x2) ? hi : lo) = (f(x1) < f(x2) ? x2 : x1);
      }
      const double tau = 0.5 * (lo + hi);
      const detail::Spinor a_min = detail::rk4(a_prev, tau, control);
      const detail::Spinor b_min = detail::rk4(b_prev, tau, control);
      record(t_prev + tau, a_min, b_min);
      return finish(DiscriminationStatus::ResidualMinimum, t_prev + tau, a_min, b_min);
    }
    if (ov_next < ov) decreasing_seen = true;

    a_prev = a, b_prev = b, t_prev = t - h;
    a = a_next, b = b_next, ov = ov_next;
    detail::to_amplitudes(a);  // norm-drift check
    record(t, a, b);
    if (t >= run.t_max) return finish(DiscriminationStatus::Inconclusive, t, a, b);
  }
}

/// U = |0><a| + |1><b'| with b' = b orthonormalized against a. Requires
/// |<a|b>|^2 <= orth_tol.
inline Matrix2c readout_unitary(const QubitAmplitudes& a, const QubitAmplitudes& b,
                                double orth_tol = kDefaultOrthTol) {
  const cplx ab = overlap(a, b);
  if (std::norm(ab) > orth_tol) {
    throw NotOrthogonal("readout needs orthogonal candidates: |<a|b>|^2 = " +
                        format_double(std::norm(ab)));
  }
  Eigen::Vector2cd bp = b.vector() - ab * a.vector();
  bp /= bp.norm();
  Matrix2c u;
  u.row(0) = a.vector().adjoint();
  u.row(1) = bp.adjoint();
  return u;
}

inline QubitAmplitudes apply_unitary(const Matrix2c& u, const QubitAmplitudes& q) {
  const Eigen::Vector2cd v = u * q.vector();
  return {v[0], v[1], kPropagationNormTol};
}

/// Counter-based seed mixing (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic uniform source; independent of the standard library's
/// distribution implementations so results reproduce across toolchains.
class ShotRng {
 public:
  explicit ShotRng(std::uint64_t seed) : engine_(mix_seed(seed)) {}
  ShotRng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed ^ mix_seed(stream))) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Born-rule measurement in the circulation basis: 0 with probability |psi0|^2.
inline int sample_measurement(const QubitAmplitudes& q, ShotRng& rng) {
  return rng.uniform() < std::norm(q.psi0()) ? 0 : 1;
}

inline int sample_measurement(const QubitAmplitudes& q, std::uint64_t seed) {
  ShotRng rng(seed);
  return sample_measurement(q, rng);
}

enum class Truth { A, B };

struct TrialResult {
  Truth truth = Truth::A;
  std::optional<int> outcome;    // empty when inconclusive
  std::optional<double> t_orth;  // empty when inconclusive
  /// Probability left on the wrong readout state, |<wrong|U psi_final>|^2.
  double residual_overlap = 1.0;

  bool inconclusive() const { return !outcome.has_value(); }
  bool correct() const { return outcome && *outcome == (truth == Truth::A ? 0 : 1); }
};

/// Hidden fair coin plus state preparation. Only the prepared state leaves
/// prepare(); the label is kept for scoring.
class BlackBox {
 public:
  explicit BlackBox(const InputPair& pair) : pair_(prepare_inputs(pair)) {}

  struct Prepared {
    Truth truth;
    QubitAmplitudes state;
  };

  Prepared prepare(ShotRng& rng) const {
    const Truth truth = rng.uniform() < 0.5 ? Truth::A : Truth::B;
    return {truth, truth == Truth::A ? pair_.first : pair_.second};
  }

 private:
  CandidatePair pair_;
};

/// Discriminator calibrated from the known candidates: evolves an input for
/// t_orth under the scheme's control, applies the readout unitary built from
/// the evolved candidates, then measures.
class Discriminator {
 public:
  Discriminator(const InputPair& pair, double g, const DiscriminationOptions& opt,
                double orth_tol = kDefaultOrthTol)
      : control_(discrimination_control(pair.scheme, g)) {
    DiscriminationOptions calib = opt;
    calib.store_trajectories = false;
    calibration_ = run_discrimination(pair, g, calib);
    if (calibration_.conclusive()) {
      readout_ = readout_unitary(calibration_.a_final, calibration_.b_final, orth_tol);
    }
  }

  bool conclusive() const { return calibration_.conclusive(); }
  const DiscriminationRun& calibration() const { return calibration_; }
  const Matrix2c& readout() const { return *readout_; }

  /// Returns the post-readout state, or nullopt when calibration was inconclusive.
  std::optional<QubitAmplitudes> process(const QubitAmplitudes& input) const {
    if (!readout_) return std::nullopt;
    QubitAmplitudes q = input;
    if (*calibration_.t_orth > 0.0) {
      ControlSchedule schedule;
      schedule.then(*calibration_.t_orth, control_);
      q = integrate(q, schedule, calibration_.dt, {.store_points = false, .observer = {}}).final_state;
    }
    return apply_unitary(*readout_, q);
  }

 private:
  Control control_;
  DiscriminationRun calibration_;
  std::optional<Matrix2c> readout_;
};

struct TrialOptions {
  DiscriminationOptions discrimination;
  double orth_tol = kDefaultOrthTol;
  int threads = 1;
};

struct TrialStatistics {
  InputPair pair;
  double g = 0.0;
  int shots = 0;
  std::uint64_t seed = 0;
  std::vector<TrialResult> results;
  int aa = 0, ab = 0, ba = 0, bb = 0;  // truth x outcome (0 = A, 1 = B)
  int inconclusive = 0;
  std::optional<double> t_orth_mean;
  double success_rate = 0.0;
  double inconclusive_rate = 0.0;
};

/// Runs `shots` independent trials. Shot i draws from ShotRng(seed, i), so
/// results do not depend on the thread count.
inline TrialStatistics run_trials(const InputPair& pair, double g, int shots, std::uint64_t seed,
                                  const TrialOptions& opt = {}) {
  if (shots < 1) throw InvalidArgument("shots must be >= 1");
  const BlackBox box(pair);
  const Discriminator disc(pair, g, opt.discrimination, opt.orth_tol);

  TrialStatistics st;
  st.pair = pair;
  st.g = g;
  st.shots = shots;
  st.seed = seed;
  st.results.resize(static_cast<std::size_t>(shots));
  parallel_for(st.results.size(), opt.threads, [&](std::size_t i) {
    ShotRng rng(seed, i);
    const auto prepared = box.prepare(rng);
    TrialResult r;
    r.truth = prepared.truth;
    if (const auto out = disc.process(prepared.state)) {
      r.outcome = sample_measurement(*out, rng);
      r.t_orth = disc.calibration().t_orth;
      r.residual_overlap = std::norm(prepared.truth == Truth::A ? out->psi1() : out->psi0());
    }
    st.results[i] = r;
  });

  double t_sum = 0.0;
  int conclusive = 0;
  for (const auto& r : st.results) {
    if (r.inconclusive()) {
      ++st.inconclusive;
      continue;
    }
    ++conclusive;
    t_sum += *r.t_orth;
    const bool read_a = *r.outcome == 0;
    if (r.truth == Truth::A) (read_a ? st.aa : st.ab)++;
    else (read_a ? st.ba : st.bb)++;
  }
  if (conclusive > 0) st.t_orth_mean = t_sum / conclusive;
  st.success_rate = static_cast<double>(st.aa + st.bb) / shots;
  st.inconclusive_rate = static_cast<double>(st.inconclusive) / shots;
  return st;
}

inline nlohmann::ordered_json to_json(const TrialStatistics& st) {
  nlohmann::ordered_json j;
  j["scheme"] = to_string(st.pair.scheme);
  j["theta_ab"] = st.pair.theta_ab;
  j["g"] = st.g;
  j["shots"] = st.shots;
  j["t_orth_mean"] = st.t_orth_mean ? nlohmann::ordered_json(*st.t_orth_mean) : nullptr;
  j["success_rate"] = st.success_rate;
  j["inconclusive_rate"] = st.inconclusive_rate;
  j["confusion"] = {{"AA", st.aa}, {"AB", st.ab}, {"BA", st.ba}, {"BB", st.bb}};
  return j;
}

}  // namespace nlqubit
