#pragma once

// Exact two-mode many-body model. Basis |k, n-k>: index k counts atoms in
// mode 0 (l = 0 circulation), n - k atoms in mode 1. The Hamiltonian
//
//   H = sum_l (omega_l + V_ll) n_l + gamma n_l (n_l - 1) + gamma' n_0 n_1
//       + V01 (a0^dag a1 + a1^dag a0),      gamma = K / n, gamma' = K' / n,
//
// is real symmetric tridiagonal in this basis. The classical kinetic offset
// -n Omega^2 / (2 Omega0) is kept out of the matrix and reported separately.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlqubit/errors.hpp"
#include "nlqubit/io.hpp"
#include "nlqubit/meanfield.hpp"
#include "nlqubit/qubit.hpp"

namespace nlqubit {

/// Coefficients over |k, n-k>, k = 0..n. Not normalized by construction:
/// annihilate() yields unnormalized vectors; encoders and propagators
/// produce unit vectors.
class FockVector {
 public:
  explicit FockVector(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw InvalidArgument("Fock vector needs at least one coefficient");
  }

  int n() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const cplx> coeffs() const { return coeffs_; }
  cplx operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
  }

  bool is_normalized(double tol = kConstructionNormTol) const {
    return std::abs(norm_squared() - 1.0) <= tol;
  }

  FockVector scaled(cplx s) const {
    std::vector<cplx> out(coeffs_);
    for (auto& c : out) c *= s;
    return FockVector(std::move(out));
  }

 private:
  std::vector<cplx> coeffs_;
};

/// Parameters of the two-mode ring Hamiltonian (hbar = 1). K and K' are the
/// fixed couplings of the weak-interaction large-n limit.
struct TwoModeParams {
  int n = 1;
  double omega0 = 1.0;  // ring frequency Omega0
  double omega = 0.5;   // rotation frequency Omega
  double bigK = 0.0;
  double bigKprime = 0.0;
  double v00 = 0.0;
  double v11 = 0.0;
  cplx v01 = 0.0;  // must be real

  double gamma() const { return bigK / n; }
  double gamma_prime() const { return bigKprime / n; }

  void validate() const {
    if (n < 1) throw InvalidArgument("particle count n must be >= 1");
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw InvalidArgument("omega0 must be > 0");
    for (double v : {omega, bigK, bigKprime, v00, v11, v01.real(), v01.imag()}) {
      if (!std::isfinite(v)) throw InvalidArgument("two-mode parameters must be finite");
    }
    if (v01.imag() != 0.0) throw InvalidArgument("complex V01 is not supported");
  }
};

/// omega_l = (Omega - l Omega0)^2 / (2 Omega0).
inline double mode_frequency(const TwoModeParams& p, int l) {
  const double d = p.omega - l * p.omega0;
  return d * d / (2.0 * p.omega0);
}

/// Mean-field parameters implied by the two-mode model:
/// Bz = (omega0 - omega1 + V00 - V11) / 2, g = (2K - K') / 2.
inline EffectiveParams effective_params(const TwoModeParams& p) {
  p.validate();
  return {p.v01.real(),
          0.5 * (mode_frequency(p, 0) - mode_frequency(p, 1) + p.v00 - p.v11),
          0.5 * (2.0 * p.bigK - p.bigKprime)};
}

inline constexpr int kLogBinomialThreshold = 300;

namespace detail {

/// sqrt(C(n, k)) for k = 0..n.
inline std::vector<double> sqrt_binomials(int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  if (n <= kLogBinomialThreshold) {
    double c = 1.0;
    for (int k = 0; k <= n; ++k) {
      out[k] = std::sqrt(c);
      c = c * (n - k) / (k + 1);
    }
  } else {
    const double lg_n = std::lgamma(n + 1.0);
    for (int k = 0; k <= n; ++k) {
      out[k] = std::exp(0.5 * (lg_n - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
    }
  }
  return out;
}

}  // namespace detail

/// Product-state encoding |F_n> = (psi0 a0^dag + psi1 a1^dag)^n / sqrt(n!) |vac>:
/// coeffs[k] = sqrt(C(n,k)) psi0^k psi1^(n-k). Above kLogBinomialThreshold the
/// coefficients are evaluated in the log domain.
inline FockVector encode_fn(int n, const QubitAmplitudes& q) {
  if (n < 1) throw InvalidArgument("encode_fn requires n >= 1");
  const cplx a = q.psi0();
  const cplx b = q.psi1();
  std::vector<cplx> c(static_cast<std::size_t>(n) + 1, 0.0);
  if (a == 0.0) {
    c[0] = std::pow(b, n);
    return FockVector(std::move(c));
  }
  if (b == 0.0) {
    c[n] = std::pow(a, n);
    return FockVector(std::move(c));
  }
  if (n <= kLogBinomialThreshold) {
    const auto sb = detail::sqrt_binomials(n);
    std::vector<cplx> pa(c.size()), pb(c.size());
    pa[0] = pb[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
      pa[k] = pa[k - 1] * a;
      pb[k] = pb[k - 1] * b;
    }
    for (int k = 0; k <= n; ++k) c[k] = sb[k] * pa[k] * pb[n - k];
  } else {
    // Log-magnitudes by the ratio recurrence |c_{k+1} / c_k| = sqrt((n-k)/(k+1)) |a/b|,
    // accumulated in long double, then scaled so that sum |c_k|^2 = 1 (the
    // binomial identity). lgamma differences lose ~1e-11 relative at n ~ 4000.
    const long double lr = std::log(std::abs(a)) - static_cast<long double>(std::log(std::abs(b)));
    const double pha = std::arg(a);
    const double phb = std::arg(b);
    std::vector<long double> lmag(c.size());
    lmag[0] = 0.0L;
    for (int k = 0; k < n; ++k) {
      lmag[k + 1] = lmag[k] + 0.5L * (std::log(static_cast<long double>(n - k)) -
                                      std::log(static_cast<long double>(k + 1))) + lr;
    }
    const long double peak = *std::max_element(lmag.begin(), lmag.end());
    long double sum = 0.0L;
    for (const auto l : lmag) sum += std::exp(2.0L * (l - peak));
    const long double shift = peak + 0.5L * std::log(sum);
    for (int k = 0; k <= n; ++k) {
      const double phase = std::remainder(k * pha + (n - k) * phb, 2.0 * std::numbers::pi);
      c[k] = std::polar(static_cast<double>(std::exp(lmag[k] - shift)), phase);
    }
  }
  return FockVector(std::move(c));
}

/// Cat encoding: psi0 on |n, 0> plus psi1 on |0, n>.
inline FockVector encode_cat(int n, const QubitAmplitudes& q) {
  if (n < 1) throw InvalidArgument("encode_cat requires n >= 1");
  std::vector<cplx> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[n] = q.psi0();
  c[0] = q.psi1();
  return FockVector(std::move(c));
}

/// Circulation state |Phi_l^n>: all atoms in mode l.
inline FockVector circulation_state(int n, int mode) {
  return encode_fn(n, mode == 0 ? QubitAmplitudes::zero() : QubitAmplitudes::one());
}

/// Bosonic annihilation a_mode; the result has particle count n - 1 and is
/// not renormalized.
inline FockVector annihilate(const FockVector& v, int mode) {
  const int n = v.n();
  if (n < 1) throw InvalidArgument("cannot annihilate from the vacuum");
  if (mode != 0 && mode != 1) throw InvalidArgument("mode must be 0 or 1");
  std::vector<cplx> out(static_cast<std::size_t>(n), 0.0);
  if (mode == 0) {
    for (int k = 1; k <= n; ++k) out[k - 1] = std::sqrt(static_cast<double>(k)) * v[k];
  } else {
    for (int k = 0; k < n; ++k) out[k] = std::sqrt(static_cast<double>(n - k)) * v[k];
  }
  return FockVector(std::move(out));
}

inline cplx overlap_fock(const FockVector& u, const FockVector& v) {
  if (u.n() != v.n()) throw DimensionMismatch("overlap_fock: particle counts differ");
  cplx s = 0.0;
  for (int k = 0; k <= u.n(); ++k) s += std::conj(u[k]) * v[k];
  return s;
}

struct Tridiagonal {
  std::vector<double> diagonal;      // length n + 1
  std::vector<double> off_diagonal;  // length n; couples k and k + 1
  double energy_offset = 0.0;        // dropped constant -n Omega^2 / (2 Omega0)
};

inline Tridiagonal hamiltonian(const TwoModeParams& p) {
  p.validate();
  const int n = p.n;
  const double e0 = mode_frequency(p, 0) + p.v00;
  const double e1 = mode_frequency(p, 1) + p.v11;
  const double gm = p.gamma();
  const double gp = p.gamma_prime();
  const double v = p.v01.real();
  Tridiagonal h;
  h.diagonal.resize(static_cast<std::size_t>(n) + 1);
  h.off_diagonal.resize(static_cast<std::size_t>(n));
  for (int k = 0; k <= n; ++k) {
    const double n0 = k;
    const double n1 = n - k;
    h.diagonal[k] = e0 * n0 + e1 * n1 + gm * n0 * (n0 - 1.0) + gm * n1 * (n1 - 1.0) + gp * n0 * n1;
  }
  for (int k = 0; k < n; ++k) {
    h.off_diagonal[k] = v * std::sqrt(static_cast<double>(k + 1) * (n - k));
  }
  h.energy_offset = -n * p.omega * p.omega / (2.0 * p.omega0);
  return h;
}

/// y = H x for a tridiagonal H.
inline std::vector<cplx> multiply(const Tridiagonal& h, std::span<const cplx> x) {
  const std::size_t m = h.diagonal.size();
  std::vector<cplx> y(m);
  for (std::size_t k = 0; k < m; ++k) y[k] = h.diagonal[k] * x[k];
  for (std::size_t k = 0; k + 1 < m; ++k) {
    y[k] += h.off_diagonal[k] * x[k + 1];
    y[k + 1] += h.off_diagonal[k] * x[k];
  }
  return y;
}

inline constexpr int kDenseLimit = 2000;

enum class PropagationMethod { Auto, Eigen, Chebyshev };

/// exp(-i H t) for a fixed two-mode Hamiltonian. The dense path diagonalizes
/// once and reuses the eigenbasis for every t; the Chebyshev path expands in
/// Chebyshev polynomials of the rescaled H (Bessel-function coefficients) and
/// never forms a dense matrix. Auto picks Eigen for n <= kDenseLimit.
class Propagator {
 public:
  explicit Propagator(const TwoModeParams& p, PropagationMethod method = PropagationMethod::Auto)
      : n_(p.n), h_(hamiltonian(p)) {
    method_ = method == PropagationMethod::Auto
                  ? (p.n <= kDenseLimit ? PropagationMethod::Eigen : PropagationMethod::Chebyshev)
                  : method;
    if (method_ == PropagationMethod::Eigen) {
      const auto m = static_cast<Eigen::Index>(h_.diagonal.size());
      const Eigen::Map<const Eigen::VectorXd> diag(h_.diagonal.data(), m);
      const Eigen::Map<const Eigen::VectorXd> sub(h_.off_diagonal.data(), m - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      if (es.info() != Eigen::Success) throw NumericalFailure("tridiagonal eigensolver failed");
      eigenvalues_ = es.eigenvalues();
      eigenvectors_ = es.eigenvectors();
    } else {
      spectral_bounds();
    }
  }

  PropagationMethod method() const { return method_; }
  const Tridiagonal& hamiltonian_matrix() const { return h_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  FockVector evolve(const FockVector& v, double t) const {
    if (v.n() != n_) throw DimensionMismatch("propagator and state particle counts differ");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("evolution time must be >= 0");
    if (t == 0.0) return v;
    return method_ == PropagationMethod::Eigen ? evolve_dense(v, t) : evolve_chebyshev(v, t);
  }

 private:
  FockVector evolve_dense(const FockVector& v, double t) const {
    const auto m = static_cast<Eigen::Index>(v.coeffs().size());
    const Eigen::Map<const Eigen::VectorXcd> x(v.coeffs().data(), m);
    Eigen::VectorXcd c = eigenvectors_.transpose().cast<cplx>() * x;
    for (Eigen::Index j = 0; j < m; ++j) c[j] *= std::polar(1.0, -eigenvalues_[j] * t);
    const Eigen::VectorXcd y = eigenvectors_.cast<cplx>() * c;
    if (!y.allFinite()) throw NumericalFailure("non-finite state after exact evolution");
    return FockVector(std::vector<cplx>(y.data(), y.data() + m));
  }

  void spectral_bounds() {
    const std::size_t m = h_.diagonal.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < m; ++k) {
      double r = 0.0;
      if (k > 0) r += std::abs(h_.off_diagonal[k - 1]);
      if (k + 1 < m) r += std::abs(h_.off_diagonal[k]);
      lo = std::min(lo, h_.diagonal[k] - r);
      hi = std::max(hi, h_.diagonal[k] + r);
    }
    center_ = 0.5 * (hi + lo);
    half_width_ = 0.5 * (hi - lo) * 1.01 + 1e-12;
  }

  // One Chebyshev expansion over a chunk with half_width_ * dt <= kMaxArg.
  std::vector<cplx> chebyshev_chunk(std::vector<cplx> x, double dt) const {
    const double arg = half_width_ * dt;
    const int terms = static_cast<int>(std::ceil(arg + 10.0 * std::cbrt(arg) + 25.0));
    const std::size_t m = x.size();
    auto scaled_apply = [&](const std::vector<cplx>& u) {
      std::vector<cplx> y = multiply(h_, u);
      for (std::size_t k = 0; k < m; ++k) y[k] = (y[k] - center_ * u[k]) / half_width_;
      return y;
    };
    std::vector<cplx> t_prev = x;
    std::vector<cplx> t_curr = scaled_apply(x);
    std::vector<cplx> acc(m);
    const double j0 = std::cyl_bessel_j(0.0, arg);
    for (std::size_t k = 0; k < m; ++k) acc[k] = j0 * t_prev[k];
    cplx minus_i_pow{0.0, -1.0};
    for (int j = 1; j <= terms; ++j) {
      const cplx coef = 2.0 * minus_i_pow * std::cyl_bessel_j(static_cast<double>(j), arg);
      for (std::size_t k = 0; k < m; ++k) acc[k] += coef * t_curr[k];
      if (j == terms) break;
      std::vector<cplx> t_next = scaled_apply(t_curr);
      for (std::size_t k = 0; k < m; ++k) t_next[k] = 2.0 * t_next[k] - t_prev[k];
      t_prev = std::move(t_curr);
      t_curr = std::move(t_next);
      minus_i_pow *= cplx{0.0, -1.0};
    }
    const cplx phase = std::polar(1.0, -center_ * dt);
    for (auto& a : acc) a *= phase;
    return acc;
  }

  FockVector evolve_chebyshev(const FockVector& v, double t) const {
    constexpr double kMaxArg = 40.0;
    const int chunks = std::max(1, static_cast<int>(std::ceil(half_width_ * t / kMaxArg)));
    const double dt = t / chunks;
    std::vector<cplx> x(v.coeffs().begin(), v.coeffs().end());
    for (int i = 0; i < chunks; ++i) x = chebyshev_chunk(std::move(x), dt);
    for (const auto& c : x) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw NumericalFailure("non-finite state after Chebyshev propagation");
      }
    }
    return FockVector(std::move(x));
  }

  int n_;
  Tridiagonal h_;
  PropagationMethod method_ = PropagationMethod::Eigen;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  double center_ = 0.0;
  double half_width_ = 1.0;
};

inline FockVector evolve_exact(const FockVector& v, const TwoModeParams& p, double t) {
  if (v.n() != p.n) throw DimensionMismatch("state and Hamiltonian particle counts differ");
  return Propagator(p).evolve(v, t);
}

/// <a_l^dag a_l'>.
inline cplx correlator_one(const FockVector& v, int l, int lp) {
  const int n = v.n();
  if ((l != 0 && l != 1) || (lp != 0 && lp != 1)) throw InvalidArgument("mode must be 0 or 1");
  if (l == lp) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) s += (l == 0 ? k : n - k) * std::norm(v[k]);
    return s;
  }
  // <a0^dag a1> = sum_k conj(c_{k+1}) c_k sqrt((k+1)(n-k)).
  cplx s = 0.0;
  for (int k = 0; k < n; ++k) {
    s += std::conj(v[k + 1]) * v[k] * std::sqrt(static_cast<double>(k + 1) * (n - k));
  }
  return l == 0 ? s : std::conj(s);
}

/// <a_l^dag a_l a_l'^dag a_l'> = <n_l n_l'> (unordered product of number operators).
inline cplx correlator_two(const FockVector& v, int l, int lp) {
  if ((l != 0 && l != 1) || (lp != 0 && lp != 1)) throw InvalidArgument("mode must be 0 or 1");
  const int n = v.n();
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double nl = l == 0 ? k : n - k;
    const double nlp = lp == 0 ? k : n - k;
    s += nl * nlp * std::norm(v[k]);
  }
  return s;
}

/// Normal-ordered <a_l^dag a_l'^dag a_l' a_l>; equals correlator_two for
/// l != l' and <n_l (n_l - 1)> for l == l'.
inline cplx correlator_two_normal_ordered(const FockVector& v, int l, int lp) {
  if (l != lp) return correlator_two(v, l, lp);
  if (l != 0 && l != 1) throw InvalidArgument("mode must be 0 or 1");
  const int n = v.n();
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double nl = l == 0 ? k : n - k;
    s += nl * (nl - 1.0) * std::norm(v[k]);
  }
  return s;
}

/// One-atom reduced density matrix (rho_1)_{l l'} = <a_l'^dag a_l> / n,
/// normalized by <v|v>.
inline Matrix2c reduced_density(const FockVector& v) {
  const int n = v.n();
  if (n < 1) throw InvalidArgument("reduced density needs n >= 1");
  const double scale = 1.0 / (n * v.norm_squared());
  Matrix2c rho;
  rho(0, 0) = correlator_one(v, 0, 0) * scale;
  rho(1, 1) = correlator_one(v, 1, 1) * scale;
  rho(0, 1) = correlator_one(v, 1, 0) * scale;
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

struct ModelError {
  double epsilon = 0.0;
  QubitAmplitudes meanfield_state = QubitAmplitudes::zero();
  Matrix2c rho_meanfield;
  Matrix2c rho_exact;
};

namespace detail {

inline QubitAmplitudes meanfield_evolve(const QubitAmplitudes& q0, const EffectiveParams& ep,
                                        double t, double dt) {
  if (t == 0.0) return q0;
  ControlSchedule schedule;
  schedule.then(t, ep);
  return integrate(q0, schedule, dt > 0.0 ? dt : default_dt(ep), {.store_points = false, .observer = {}})
      .final_state;
}

inline ModelError compare(const FockVector& exact, const QubitAmplitudes& mf) {
  ModelError r;
  r.meanfield_state = mf;
  r.rho_meanfield = density_matrix(mf);
  r.rho_exact = reduced_density(exact);
  r.epsilon = trace_distance_matrices(r.rho_meanfield, r.rho_exact);
  return r;
}

}  // namespace detail

/// Mean-field model error eps = || rho_eff(t) - rho_1(t) ||_1 for the product
/// state encode_fn(n, q0) under the exact two-mode dynamics versus q0 under the
/// nonlinear mean-field equation with parameters from effective_params(p).
/// dt <= 0 selects default_dt.
inline ModelError model_error(const TwoModeParams& p, const QubitAmplitudes& q0, double t,
                              double dt = 0.0) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be >= 0");
  const FockVector exact = Propagator(p).evolve(encode_fn(p.n, q0), t);
  return detail::compare(exact, detail::meanfield_evolve(q0, effective_params(p), t, dt));
}

struct ModelErrorRow {
  int n = 0;
  double t = 0.0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

/// Model error over an (n, t) grid, n-major. Each n is diagonalized once.
/// Failed cells are flagged (ok = false) rather than aborting the sweep.
inline std::vector<ModelErrorRow> model_error_sweep(TwoModeParams base, std::span<const int> ns,
                                                    std::span<const double> ts,
                                                    const QubitAmplitudes& q0, double dt = 0.0) {
  std::vector<ModelErrorRow> rows;
  for (int n : ns) {
    base.n = n;
    std::optional<Propagator> prop;
    std::string setup_error;
    try {
      prop.emplace(base);
    } catch (const Error& e) {
      setup_error = e.what();
    }
    const FockVector start = prop ? encode_fn(n, q0) : FockVector({1.0});
    for (double t : ts) {
      ModelErrorRow row{n, t, 0.0, false, {}};
      if (!prop) {
        row.error = setup_error;
      } else {
        try {
          const auto mf = detail::meanfield_evolve(q0, effective_params(base), t, dt);
          row.epsilon = detail::compare(prop->evolve(start, t), mf).epsilon;
          row.ok = true;
        } catch (const Error& e) {
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline void write_model_error_csv(std::ostream& os, std::span<const ModelErrorRow> rows) {
  os << "n,t,epsilon,n_times_epsilon\n";
  for (const auto& r : rows) write_csv_row(os, r.n, r.t, r.epsilon, r.n * r.epsilon);
}

/// Least-squares fit of n*eps ~= c (exp(t / t_ent) - 1).
struct ErrorBoundFit {
  double c = 0.0;
  double t_ent = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

inline ErrorBoundFit fit_error_bound(std::span<const double> t, std::span<const double> n_eps) {
  if (t.size() != n_eps.size() || t.empty()) throw InvalidArgument("fit needs matching non-empty data");
  auto solve_c = [&](double tau, double& sse) {
    double fy = 0.0, ff = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f = std::expm1(t[i] / tau);
      fy += f * n_eps[i];
      ff += f * f;
    }
    const double c = ff > 0.0 ? fy / ff : 0.0;
    sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = n_eps[i] - c * std::expm1(t[i] / tau);
      sse += r * r;
    }
    return c;
  };
  const double lo = std::log(1e-3), hi = std::log(1e4);
  constexpr int kScan = 400;
  double best_u = lo, best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double u = lo + (hi - lo) * i / kScan;
    double sse;
    solve_c(std::exp(u), sse);
    if (sse < best_sse) best_sse = sse, best_u = u;
  }
  // Golden-section refinement around the best scan point.
  const double h = (hi - lo) / kScan;
  double a = std::max(lo, best_u - h), b = std::min(hi, best_u + h);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double s1, s2;
    solve_c(std::exp(x1), s1);
    solve_c(std::exp(x2), s2);
    (s1 < s2 ? b : a) = (s1 < s2 ? x2 : x1);
  }
  ErrorBoundFit fit;
  fit.t_ent = std::exp(0.5 * (a + b));
  double sse;
  fit.c = solve_c(fit.t_ent, sse);
  fit.points = t.size();
  fit.rms_residual = std::sqrt(sse / static_cast<double>(t.size()));
  return fit;
}

}  // namespace nlqubit
