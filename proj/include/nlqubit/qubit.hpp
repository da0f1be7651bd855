#pragma once

// Qubit state representations shared by the mean-field and many-body code:
// normalized amplitude pairs, Bloch vectors, 2x2 density matrices, and the
// overlap / trace-norm distances between them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>

#include "nlqubit/errors.hpp"

namespace nlqubit {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kConstructionNormTol = 1e-12;
inline constexpr double kPropagationNormTol = 1e-9;
inline constexpr double kSphereTol = 1e-9;
inline constexpr double kHermitianTol = 1e-9;

/// Plain real 3-vector (velocities, Bloch-equation fields).
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Pure qubit state psi0|0> + psi1|1>. Normalization is a construction invariant.
class QubitAmplitudes {
 public:
  /// Throws InvalidState unless | |psi0|^2 + |psi1|^2 - 1 | <= tol.
  /// States produced by time integration are built with kPropagationNormTol.
  QubitAmplitudes(cplx psi0, cplx psi1, double tol = kConstructionNormTol)
      : psi0_(psi0), psi1_(psi1) {
    const double n2 = std::norm(psi0) + std::norm(psi1);
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tol) {
      std::ostringstream msg;
      msg << "qubit amplitudes not normalized: |psi|^2 = " << n2;
      throw InvalidState(msg.str());
    }
  }

  static QubitAmplitudes zero() { return {1.0, 0.0}; }
  static QubitAmplitudes one() { return {0.0, 1.0}; }

  cplx psi0() const { return psi0_; }
  cplx psi1() const { return psi1_; }
  cplx operator[](int mode) const { return mode == 0 ? psi0_ : psi1_; }

  double norm_squared() const { return std::norm(psi0_) + std::norm(psi1_); }
  /// Bloch z coordinate |psi0|^2 - |psi1|^2.
  double population_imbalance() const { return std::norm(psi0_) - std::norm(psi1_); }

  Eigen::Vector2cd vector() const { return {psi0_, psi1_}; }

 private:
  cplx psi0_;
  cplx psi1_;
};

/// Point in the closed unit ball; |r| <= 1 + kSphereTol.
class BlochVector {
 public:
  BlochVector(double x, double y, double z) : r_{x, y, z} {
    const double n = nlqubit::norm(r_);
    if (!std::isfinite(n) || n > 1.0 + kSphereTol) {
      std::ostringstream msg;
      msg << "Bloch vector outside the unit ball: |r| = " << n;
      throw InvalidState(msg.str());
    }
  }
  explicit BlochVector(Vec3 r) : BlochVector(r.x, r.y, r.z) {}

  double x() const { return r_.x; }
  double y() const { return r_.y; }
  double z() const { return r_.z; }
  Vec3 vec() const { return r_; }
  double norm() const { return nlqubit::norm(r_); }
  bool on_sphere(double tol = kSphereTol) const { return std::abs(norm() - 1.0) <= tol; }

 private:
  Vec3 r_;
};

inline Matrix2c sigma_x() {
  Matrix2c m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix2c sigma_y() {
  Matrix2c m;
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

inline Matrix2c sigma_z() {
  Matrix2c m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline BlochVector to_bloch(const QubitAmplitudes& q) {
  const cplx c = std::conj(q.psi0()) * q.psi1();
  return {2.0 * c.real(), 2.0 * c.imag(), q.population_imbalance()};
}

/// Inverse of to_bloch with the global phase fixed so psi0 is real and
/// non-negative (psi1 = 1 at the south pole). Rejects interior points.
inline QubitAmplitudes from_bloch(const BlochVector& r) {
  const double len = r.norm();
  if (len < 1.0 - kSphereTol) {
    std::ostringstream msg;
    msg << "interior Bloch point (|r| = " << len << ") is not a pure state";
    throw InvalidState(msg.str());
  }
  const double x = r.x() / len;
  const double y = r.y() / len;
  const double z = std::clamp(r.z() / len, -1.0, 1.0);
  const double c = std::sqrt(0.5 * (1.0 + z));
  const double s = std::sqrt(0.5 * (1.0 - z));
  if (c == 0.0) return QubitAmplitudes::one();
  const double phi = std::atan2(y, x);
  return {c, std::polar(s, phi)};
}

inline Matrix2c density_matrix(const QubitAmplitudes& q) {
  const Eigen::Vector2cd v = q.vector();
  return v * v.adjoint();
}

/// Density matrix (I + r.sigma)/2 for any point of the Bloch ball.
inline Matrix2c density_matrix(const BlochVector& r) {
  return 0.5 * (Matrix2c::Identity() + r.x() * sigma_x() + r.y() * sigma_y() + r.z() * sigma_z());
}

inline cplx overlap(const QubitAmplitudes& a, const QubitAmplitudes& b) {
  return std::conj(a.psi0()) * b.psi0() + std::conj(a.psi1()) * b.psi1();
}

/// Angle between the Bloch vectors of a and b, in [0, pi].
inline double bloch_angle(const QubitAmplitudes& a, const QubitAmplitudes& b) {
  return std::acos(std::clamp(dot(to_bloch(a).vec(), to_bloch(b).vec()), -1.0, 1.0));
}

namespace detail {

inline void require_hermitian(const Matrix2c& m, const char* name) {
  if (!m.allFinite()) throw InvalidState(std::string(name) + " has non-finite entries");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw InvalidState(std::string(name) + " is not Hermitian");
  }
}

inline void require_density(const Matrix2c& m, const char* name) {
  require_hermitian(m, name);
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > kHermitianTol) {
    throw InvalidState(std::string(name) + " does not have unit trace");
  }
  // Smallest eigenvalue of a 2x2 Hermitian matrix.
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double lmin = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
  if (lmin < -kHermitianTol) {
    throw InvalidState(std::string(name) + " is not positive semidefinite");
  }
}

}  // namespace detail

/// Trace norm ||rho1 - rho2||_1, the sum of |eigenvalues| of the Hermitian
/// difference. Inputs must be density matrices (Hermitian, unit trace, PSD).
inline double trace_distance_matrices(const Matrix2c& rho1, const Matrix2c& rho2) {
  detail::require_density(rho1, "rho1");
  detail::require_density(rho2, "rho2");
  const Matrix2c d = rho1 - rho2;
  const double a = d(0, 0).real();
  const double b = d(1, 1).real();
  const double mean = 0.5 * (a + b);
  const double radius = std::hypot(0.5 * (a - b), std::abs(d(0, 1)));
  return std::abs(mean + radius) + std::abs(mean - radius);
}

inline double trace_distance(const QubitAmplitudes& a, const QubitAmplitudes& b) {
  return trace_distance_matrices(density_matrix(a), density_matrix(b));
}

/// Purity tr(rho^2).
inline double purity(const Matrix2c& rho) { return (rho * rho).trace().real(); }

}  // namespace nlqubit
