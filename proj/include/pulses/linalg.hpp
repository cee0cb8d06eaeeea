#ifndef PULSES_LINALG_HPP
#define PULSES_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "pulses/fault.hpp"

namespace pulses {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Unitary2 = Eigen::Matrix2cd;
using Unitary4 = Eigen::Matrix4cd;
using MatrixC = Eigen::MatrixXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Unitarity tolerance used by validation helpers.
inline constexpr double unitary_tol = 1e-12;

// Products between re-projections onto the unitary group.
inline constexpr int renormalize_every = 64;

inline const Unitary2& sigma_x() {
  static const Unitary2 m = (Unitary2() << 0, 1, 1, 0).finished();
  return m;
}
inline const Unitary2& sigma_y() {
  static const Unitary2 m = (Unitary2() << 0, cplx(0, -1), cplx(0, 1), 0).finished();
  return m;
}
inline const Unitary2& sigma_z() {
  static const Unitary2 m = (Unitary2() << 1, 0, 0, -1).finished();
  return m;
}
// Spin-1/2 basis H = sigma / 2, index 0..2 = x, y, z.
inline Unitary2 spin_op(int mu) {
  switch (mu) {
    case 0: return 0.5 * sigma_x();
    case 1: return 0.5 * sigma_y();
    default: return 0.5 * sigma_z();
  }
}

// Unit quaternion: w*I - i*(v . sigma).
struct Spin {
  double w = 1.0;
  Vec3 v = Vec3::Zero();

  static Spin identity() { return {}; }

  Spin operator*(const Spin& b) const {
    return {w * b.w - v.dot(b.v), w * b.v + b.w * v + v.cross(b.v)};
  }
  Spin inverse() const { return {w, -v}; }
  Spin operator-() const { return {-w, -v}; }

  double norm() const { return std::sqrt(w * w + v.squaredNorm()); }
  Spin normalized() const {
    double n = norm();
    return {w / n, v / n};
  }

  Unitary2 matrix() const {
    Unitary2 m;
    m << cplx(w, -v.z()), cplx(-v.y(), -v.x()), cplx(v.y(), -v.x()), cplx(w, v.z());
    return m;
  }

  // Projection of a 2x2 matrix onto the quaternion span (exact for SU(2)).
  static Spin from_matrix(const Unitary2& m) {
    Spin s;
    s.w = 0.5 * (m(0, 0).real() + m(1, 1).real());
    s.v.x() = -0.5 * (m(0, 1).imag() + m(1, 0).imag());
    s.v.y() = 0.5 * (m(1, 0).real() - m(0, 1).real());
    s.v.z() = 0.5 * (m(1, 1).imag() - m(0, 0).imag());
    return s;
  }

  // Adjoint action on algebra vectors: U exp(-i a.H) U^dag = exp(-i (rotate(a)).H).
  Vec3 rotate(const Vec3& a) const {
    Vec3 t = v.cross(a);
    return a + 2.0 * w * t + 2.0 * v.cross(t);
  }
  Vec3 unrotate(const Vec3& a) const { return inverse().rotate(a); }

  Mat3 so3() const {
    Mat3 r;
    for (int j = 0; j < 3; ++j) r.col(j) = rotate(Vec3::Unit(j));
    return r;
  }
};

inline Spin spin_exp(const Vec3& a) {
  double th = a.norm();
  if (th == 0.0) return Spin::identity();
  return {std::cos(0.5 * th), (std::sin(0.5 * th) / th) * a};
}

// Rotation vector of s with angle in [0, pi]; flips the sign of s when needed.
inline Vec3 spin_log(const Spin& s, int* sign = nullptr) {
  double w = s.w;
  Vec3 v = s.v;
  int sg = 1;
  if (w < 0.0) {
    w = -w;
    v = -v;
    sg = -1;
  }
  if (sign) *sign = sg;
  double n = v.norm();
  if (n == 0.0) return Vec3::Zero();
  return (2.0 * std::atan2(n, w) / n) * v;
}

// exp(-i th (cos phi Hx + sin phi Hy)).
inline Unitary2 rotation(double theta, double phi) {
  double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  double cp = std::cos(phi), sp = std::sin(phi);
  Unitary2 m;
  m << cplx(c, 0), cplx(-s * sp, -s * cp), cplx(s * sp, -s * cp), cplx(c, 0);
  return m;
}

inline Unitary2 exp_su2(const Vec3& a) { return spin_exp(a).matrix(); }

struct LogResult {
  Vec3 v;    // exp_su2(v) == sign * U
  int sign;  // +1 or -1
};

// Principal logarithm with rotation angle in [0, pi]. Inputs within 1e-12 of
// -I carry no axis information; callers must then pass axis_hint.
inline LogResult log_su2(const Unitary2& u, std::optional<Vec3> axis_hint = std::nullopt) {
  if ((u + Unitary2::Identity()).norm() < 1e-12) {
    Spin s = Spin::from_matrix(u);
    if (s.v.norm() < 1e-12 && !axis_hint)
      throw Failure(Fault::ambiguous_branch, "log_su2 at -I needs an axis hint");
    if (axis_hint) return {Vec3::Zero(), -1};
  }
  Spin s = Spin::from_matrix(u).normalized();
  int sg = 1;
  Vec3 v = spin_log(s, &sg);
  return {v, sg};
}

template <class A, class B>
cplx hs_inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Failure(Fault::dimension_mismatch, "hs_inner needs equal square matrices");
  return (a.adjoint() * b).trace();
}

template <class A, class B>
double fidelity(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols())
    throw Failure(Fault::dimension_mismatch, "fidelity needs equal square matrices");
  return std::abs(hs_inner(u, v)) / static_cast<double>(u.rows());
}

// 1 - fidelity evaluated from eigenphase differences of U^dag V, so values far
// below machine epsilon keep their relative accuracy.
template <class A, class B>
double infidelity(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols())
    throw Failure(Fault::dimension_mismatch, "infidelity needs equal square matrices");
  MatrixC w = u.adjoint() * v;
  const double d = static_cast<double>(w.rows());
  if (w.rows() == 2) {
    cplx det = w.determinant();
    Unitary2 w2 = w / std::sqrt(det);
    Spin s = Spin::from_matrix(w2);
    double n2 = s.v.squaredNorm();
    return n2 / (1.0 + std::abs(s.w));
  }
  Eigen::ComplexEigenSolver<MatrixC> es(w, false);
  const auto& ev = es.eigenvalues();
  double gap = 0.0;
  for (int j = 0; j < ev.size(); ++j)
    for (int k = j + 1; k < ev.size(); ++k) {
      double s = std::sin(0.5 * std::arg(ev[k] / ev[j]));
      gap += s * s;
    }
  double t = std::abs(w.trace());
  return 4.0 * gap / (d * (d + t));
}

struct EulerAngles {
  double alpha1 = 0, alpha2 = 0, alpha3 = 0;
};

inline double wrap_4pi(double a) {
  double r = std::fmod(a, 2.0 * two_pi);
  if (r < 0) r += 2.0 * two_pi;
  if (r >= 2.0 * two_pi) r -= 2.0 * two_pi;
  return r;
}

// U = R(a3,0) exp(-i a2 Hy) R(a1,0). Degenerate middle angles take a1 = 0.
inline EulerAngles euler_decompose(const Unitary2& u) {
  Spin q = Spin::from_matrix(u).normalized();
  double cb = std::hypot(q.w, q.v.x());
  double sb = std::hypot(q.v.y(), q.v.z());
  double beta = 2.0 * std::atan2(sb, cb);
  double sum = std::atan2(q.v.x(), q.w);
  double dif = std::atan2(q.v.z(), q.v.y());
  constexpr double degenerate = 1e-13;
  double a1, a3;
  if (sb < degenerate) {
    a1 = 0.0;
    a3 = 2.0 * sum;
  } else if (cb < degenerate) {
    a1 = 0.0;
    a3 = 2.0 * dif;
  } else {
    a1 = sum - dif;
    a3 = sum + dif;
  }
  return {wrap_4pi(a1), wrap_4pi(beta), wrap_4pi(a3)};
}

inline Unitary2 euler_compose(const EulerAngles& e) {
  return rotation(e.alpha3, 0.0) * exp_su2(Vec3(0, e.alpha2, 0)) * rotation(e.alpha1, 0.0);
}

template <class T, class U>
auto conjugate(const Eigen::MatrixBase<T>& t, const Eigen::MatrixBase<U>& u) {
  return (t * u * t.adjoint()).eval();
}

// Nearest unitary in Frobenius norm (polar factor).
template <class M>
auto nearest_unitary(const Eigen::MatrixBase<M>& m) {
  using Plain = typename M::PlainObject;
  Eigen::JacobiSVD<Plain> svd(m.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Plain(svd.matrixU() * svd.matrixV().adjoint());
}

template <class M>
double unitarity_defect(const Eigen::MatrixBase<M>& m) {
  return (m.adjoint() * m - M::PlainObject::Identity(m.rows(), m.cols())).norm();
}

// Left-ordered product f(k-1) ... f(0) with periodic re-projection.
template <class Plain, class F>
Plain ordered_product(int count, F&& factor, int dim) {
  Plain acc = Plain::Identity(dim, dim);
  for (int k = 0; k < count; ++k) {
    acc = (factor(k) * acc).eval();
    if ((k + 1) % renormalize_every == 0) acc = nearest_unitary(acc);
  }
  return acc;
}

// Algebra coefficients of a traceless anti-Hermitian -i a.H from a 2x2 matrix.
inline Vec3 algebra_coeffs(const Unitary2& m) {
  Vec3 a;
  for (int mu = 0; mu < 3; ++mu) a[mu] = (cplx(0, 1) * (spin_op(mu) * m).trace()).real() * 2.0;
  return a;
}

}  // namespace pulses

#endif
